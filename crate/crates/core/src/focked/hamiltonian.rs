use num_complex::Complex64;

use super::basis::FockBasis;
use super::operator::{ladder, OperatorMatrix};
use crate::error::{invalid, Result};
use crate::lattice::Mode;
use crate::linalg::HermitianEigen;
use crate::selfconsistent::{Interaction, ModelParams};

/// `Σ_p p² a_p* a_p`.
pub fn kinetic(basis: &FockBasis) -> OperatorMatrix {
    let p2: Vec<f64> = basis.modes().iter().map(Mode::momentum_sq).collect();
    OperatorMatrix::diagonal(basis, |s| s.iter().zip(&p2).map(|(&n, e)| n as f64 * e).sum())
}

/// `(1/2η) Σ_{p,u,v} v̂(p) a*_{u+p} a*_{v-p} a_u a_v`, keeping only terms
/// whose four modes all belong to the basis.
pub fn interaction(interaction: &Interaction, eta: f64, basis: &FockBasis) -> Result<OperatorMatrix> {
    if !(eta > 0.0) {
        return Err(invalid(format!("η must be positive, got {eta}")));
    }
    let modes = basis.modes();
    let mut op = OperatorMatrix::zeros(basis);
    let mut m = op.clone().into_matrix();
    for (p, &vp) in interaction.support() {
        let coeff = vp / (2.0 * eta);
        for (iu, u) in modes.iter().enumerate() {
            let Ok(iup) = basis.mode_index(&u.add(p)) else { continue };
            for (iv, v) in modes.iter().enumerate() {
                let Ok(ivp) = basis.mode_index(&v.sub(p)) else { continue };
                for j in 0..basis.dim() {
                    if let Some((i, amp)) = basis.apply_normal_ordered(j, &[iup, ivp], &[iu, iv]) {
                        m[(i, j)] += Complex64::new(coeff * amp, 0.0);
                    }
                }
            }
        }
    }
    op = OperatorMatrix::from_matrix(basis, m)?;
    Ok(op)
}

/// `H = Σ p² a_p* a_p + (1/2η) Σ v̂(p) a*_{u+p} a*_{v-p} a_u a_v` projected
/// onto the basis.
pub fn build_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<OperatorMatrix> {
    kinetic(basis).add(&interaction(&params.interaction, params.eta, basis)?)
}

/// `H + δ a₀*a₀ + λ √n_ref (a₀ + a₀*)`.
pub fn perturb_hamiltonian(
    h: &OperatorMatrix,
    basis: &FockBasis,
    lambda: f64,
    delta: f64,
    n_ref: f64,
) -> Result<OperatorMatrix> {
    h.check_basis(basis)?;
    if !(n_ref >= 0.0) {
        return Err(invalid(format!(
            "reference particle number must be nonnegative, got {n_ref}"
        )));
    }
    if lambda == 0.0 && delta == 0.0 {
        return Ok(h.clone());
    }
    let a0 = ladder(&Mode::ZERO, basis, false)?;
    let field = a0.add(&a0.adjoint())?.scale(lambda * n_ref.sqrt());
    let k0 = basis.mode_index(&Mode::ZERO)?;
    let shift = OperatorMatrix::diagonal(basis, |s| delta * s[k0] as f64);
    h.add(&field)?.add(&shift)
}

/// `𝒱 − v̂(0)𝒩²/(2η) + v(0)𝒩/(2η)` on the basis.
pub fn onsager_operator(interaction_coeffs: &Interaction, eta: f64, basis: &FockBasis) -> Result<OperatorMatrix> {
    let v = interaction(interaction_coeffs, eta, basis)?;
    let (vhat0, v0) = (interaction_coeffs.vhat0(), interaction_coeffs.v0());
    let correction = OperatorMatrix::diagonal(basis, |s| {
        let n = s.iter().sum::<u32>() as f64;
        (-vhat0 * n * n + v0 * n) / (2.0 * eta)
    });
    v.add(&correction)
}

/// Smallest eigenvalue of [`onsager_operator`], nonnegative up to rounding
/// for nonnegative coefficients.
pub fn onsager_gap(params: &ModelParams, basis: &FockBasis) -> Result<f64> {
    onsager_gap_for(&params.interaction, params.eta, basis)
}

pub fn onsager_gap_for(interaction_coeffs: &Interaction, eta: f64, basis: &FockBasis) -> Result<f64> {
    let op = onsager_operator(interaction_coeffs, eta, basis)?;
    Ok(HermitianEigen::new(op.matrix()).min_value())
}
