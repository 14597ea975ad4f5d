use num_complex::Complex64;
use serde::Serialize;

use super::basis::FockBasis;
use super::coherent::coherent_amplitudes;
use super::operator::{ladder, number, OperatorMatrix, StateMatrix};
use crate::error::{invalid, Result};
use crate::lattice::Mode;
use crate::linalg::{hermitian_eigenvalues, trace_product, CMatrix, HermitianEigen};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!("β must be positive and finite, got {beta}")));
    }
    Ok(())
}

/// `H − μ𝒩`.
pub fn grand_hamiltonian(h: &OperatorMatrix, mu: f64, basis: &FockBasis) -> Result<OperatorMatrix> {
    h.check_basis(basis)?;
    h.sub(&number(basis).scale(mu))
}

/// `−(1/β) ln Σ e^{−β E}` with the smallest level factored out.
fn free_energy_of_levels(levels: &[f64], beta: f64) -> f64 {
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = levels.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    e0 - z.ln() / beta
}

/// `−(1/β) ln tr e^{−β(H − μ𝒩)}`.
pub fn grand_potential(h: &OperatorMatrix, beta: f64, mu: f64, basis: &FockBasis) -> Result<f64> {
    check_beta(beta)?;
    let k = grand_hamiltonian(h, mu, basis)?;
    Ok(free_energy_of_levels(&hermitian_eigenvalues(k.matrix()), beta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsState {
    pub state: StateMatrix,
    pub grand_potential: f64,
}

/// `e^{−β(H − μ𝒩)} / tr(⋯)`, exponentiated after shifting by the ground
/// level.
pub fn gibbs_state(h: &OperatorMatrix, beta: f64, mu: f64, basis: &FockBasis) -> Result<GibbsState> {
    check_beta(beta)?;
    let k = grand_hamiltonian(h, mu, basis)?;
    let eig = HermitianEigen::new(k.matrix());
    let e0 = eig.min_value();
    let z: f64 = eig.values().iter().map(|e| (-beta * (e - e0)).exp()).sum();
    let rho = eig.map(|e| (-beta * (e - e0)).exp() / z);
    Ok(GibbsState {
        state: StateMatrix::trusted(basis, rho),
        grand_potential: e0 - z.ln() / beta,
    })
}

/// `𝒢(Γ) = tr[(H − μ𝒩)Γ] − S(Γ)/β`.
pub fn grand_potential_functional(
    state: &StateMatrix,
    h: &OperatorMatrix,
    beta: f64,
    mu: f64,
    basis: &FockBasis,
) -> Result<f64> {
    check_beta(beta)?;
    let k = grand_hamiltonian(h, mu, basis)?;
    Ok(state.expectation(&k)?.re - state.entropy() / beta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub n_exp: f64,
    pub n0_exp: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub a0_exp: Complex64,
    /// `γ(p, q) = tr[a_q* a_p Γ]` in basis mode order.
    #[serde(skip)]
    pub one_pdm: CMatrix,
    pub grand_potential: f64,
    pub entropy: f64,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Number, condensate, `⟨a₀⟩`, one-particle density matrix, `𝒢(Γ)` and
/// entropy of a state. The basis must contain the zero mode.
pub fn observables(
    state: &StateMatrix,
    h: &OperatorMatrix,
    beta: f64,
    mu: f64,
    basis: &FockBasis,
) -> Result<Observables> {
    check_beta(beta)?;
    let lowering: Vec<OperatorMatrix> = basis
        .modes()
        .iter()
        .map(|p| ladder(p, basis, false))
        .collect::<Result<_>>()?;
    // a_p Γ for each p, then tr[a_q* a_p Γ] = Σ_ij (a_p Γ)_ij conj(a_q)_ij
    let applied: Vec<CMatrix> = lowering.iter().map(|a| a.matrix() * state.matrix()).collect();
    let m = basis.modes().len();
    let mut one_pdm = CMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            one_pdm[(p, q)] = applied[p]
                .iter()
                .zip(lowering[q].matrix().iter())
                .map(|(x, a)| x * a.conj())
                .sum();
        }
    }
    let k0 = basis.mode_index(&Mode::ZERO)?;
    let entropy = state.entropy();
    let energy = state.expectation(&grand_hamiltonian(h, mu, basis)?)?.re;
    Ok(Observables {
        n_exp: state.expectation(&number(basis))?.re,
        n0_exp: one_pdm[(k0, k0)].re,
        a0_exp: trace_product(lowering[k0].matrix(), state.matrix()),
        one_pdm,
        grand_potential: energy - entropy / beta,
        entropy,
    })
}

/// `P (|z⟩⟨z| ⊗ G₊) P`, normalized, where `G₊` is the ideal Gibbs state of
/// the excited modes at `(β, μ̃)` and `P` projects onto the basis.
pub fn trial_state(basis: &FockBasis, z: Complex64, beta: f64, mu_tilde: f64) -> Result<StateMatrix> {
    check_beta(beta)?;
    let k0 = basis.mode_index(&Mode::ZERO)?;
    let amps = coherent_amplitudes(z, basis.n_max() as usize);
    let energies: Vec<f64> = basis.modes().iter().map(|p| p.momentum_sq() - mu_tilde).collect();
    // group basis states by their excited occupations
    let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<usize>> = Default::default();
    for i in 0..basis.dim() {
        let mut rest = basis.state(i).to_vec();
        rest[k0] = 0;
        groups.entry(rest).or_default().push(i);
    }
    let mut rho = CMatrix::zeros(basis.dim(), basis.dim());
    for (rest, members) in &groups {
        let weight: f64 = rest
            .iter()
            .zip(&energies)
            .enumerate()
            .filter(|&(k, _)| k != k0)
            .map(|(_, (&n, e))| (-beta * e * n as f64).exp())
            .product();
        for &i in members {
            let ci = amps[basis.state(i)[k0] as usize];
            for &j in members {
                let cj = amps[basis.state(j)[k0] as usize];
                rho[(i, j)] = ci * cj.conj() * weight;
            }
        }
    }
    StateMatrix::normalized(basis, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focked::hamiltonian::{build_hamiltonian, kinetic};
    use crate::selfconsistent::{Interaction, ModelParams};

    fn toy() -> (FockBasis, OperatorMatrix) {
        let b = FockBasis::new(vec![Mode::ZERO, Mode::new(1, 0, 0)], 6, 8).unwrap();
        let p = ModelParams::new(0.3, 1.0, 2.0, Interaction::contact(1.0).unwrap()).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        (b, h)
    }

    #[test]
    fn zero_hamiltonian_gives_maximally_mixed() {
        let b = FockBasis::new(vec![Mode::ZERO, Mode::new(0, 1, 0)], 2, 3).unwrap();
        let g = gibbs_state(&OperatorMatrix::zeros(&b), 0.7, 0.0, &b).unwrap();
        let d = b.dim() as f64;
        for i in 0..b.dim() {
            assert!((g.state.matrix()[(i, i)].re - 1.0 / d).abs() < 1e-15);
        }
        assert!((g.grand_potential + d.ln() / 0.7).abs() < 1e-14);
    }

    #[test]
    fn low_temperature_projects_on_ground_state() {
        let b = FockBasis::new(vec![Mode::ZERO, Mode::new(0, 1, 0)], 2, 3).unwrap();
        let g = gibbs_state(&kinetic(&b), 50.0, -1.0, &b).unwrap();
        assert!((g.state.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(g.state.entropy() < 1e-9);
    }

    #[test]
    fn gibbs_matches_its_functional() {
        let (b, h) = toy();
        let g = gibbs_state(&h, 0.3, 1.0, &b).unwrap();
        let f = grand_potential_functional(&g.state, &h, 0.3, 1.0, &b).unwrap();
        assert!((f - g.grand_potential).abs() < 1e-11);
        assert!((grand_potential(&h, 0.3, 1.0, &b).unwrap() - g.grand_potential).abs() < 1e-11);
    }

    #[test]
    fn unperturbed_observables_are_symmetric() {
        let (b, h) = toy();
        let g = gibbs_state(&h, 0.3, 1.0, &b).unwrap();
        let obs = observables(&g.state, &h, 0.3, 1.0, &b).unwrap();
        assert_eq!(obs.a0_exp.norm(), 0.0);
        assert_eq!(obs.one_pdm[(0, 1)].norm(), 0.0);
        let trace: f64 = (0..2).map(|k| obs.one_pdm[(k, k)].re).sum();
        assert!((trace - obs.n_exp).abs() < 1e-12);
    }

    #[test]
    fn trial_state_is_valid() {
        let (b, h) = toy();
        let t = trial_state(&b, Complex64::new(1.2, 0.0), 0.3, -0.4).unwrap();
        let g = gibbs_state(&h, 0.3, 1.0, &b).unwrap();
        let ft = grand_potential_functional(&t, &h, 0.3, 1.0, &b).unwrap();
        assert!(ft >= g.grand_potential);
    }
}
