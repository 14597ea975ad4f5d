//! Frozen values checked against independent, deliberately naive oracles.

use mfbose::focked::hamiltonian::{build_hamiltonian, onsager_gap};
use mfbose::focked::operator::{ladder, number};
use mfbose::focked::{gibbs_state, observables, FockBasis, OperatorMatrix};
use mfbose::lattice::{bose_sum, zeta_three_halves, LatticeSpec, Mode, ModeShells, FOUR_PI_SQ};
use mfbose::selfconsistent::{
    beta_critical, condensate_fraction_limit, solve_ideal_mu, solve_mu_tilde, solve_mu_tilde_on,
};
use mfbose::variational::{minimize_surface, surface_value, SurfaceGrid};
use mfbose::{Interaction, MeanField, ModelParams, SolverOptions, SurfaceParams, VariationalPoint};

fn cube_sum(beta: f64, mu_tilde: f64, half_width: i32) -> f64 {
    let mut terms = Vec::new();
    for a in -half_width..=half_width {
        for b in -half_width..=half_width {
            for c in -half_width..=half_width {
                let p2 = FOUR_PI_SQ * (a * a + b * b + c * c) as f64;
                terms.push(1.0 / (beta * (p2 - mu_tilde)).exp_m1());
            }
        }
    }
    // smallest first
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

#[test]
fn bose_sum_matches_brute_force_cube() {
    // the cube |n_i| ≤ 8 holds every mode with weight above e^{-125}
    for &(beta, mu_tilde) in &[(0.05, -0.3), (0.2, -1e-3), (0.05, -40.0)] {
        let spec = LatticeSpec::certified(beta, 1e-14, true).unwrap();
        let got = bose_sum(&spec, beta, mu_tilde, 1e-12).unwrap().value;
        let want = cube_sum(beta, mu_tilde, 8);
        assert!((got / want - 1.0).abs() <= 1e-12, "{beta} {mu_tilde}: {got} vs {want}");
    }
}

#[test]
fn zeta_matches_tail_corrected_partial_sum() {
    let n = 1_000_000u64;
    let partial: f64 = (1..=n).rev().map(|k| (k as f64).powf(-1.5)).sum();
    let nf = n as f64;
    let oracle = partial + 2.0 / nf.sqrt() - 0.5 * nf.powf(-1.5);
    assert!((zeta_three_halves() - oracle).abs() <= 1e-12);
    assert!((zeta_three_halves() - 2.612_375_348_685_488).abs() <= 1e-14);
}

/// Plain bisection on `μ̃`, linear in the variable, on the same finite
/// mode list.
fn scalar_mu_tilde(params: &ModelParams, modes: &[Mode]) -> f64 {
    let f = |mt: f64| {
        let occ: f64 = modes
            .iter()
            .map(|m| 1.0 / (params.beta * (m.momentum_sq() - mt)).exp_m1())
            .sum();
        occ + (mt - params.mu) * params.eta / params.vhat0()
    };
    let (mut lo, mut hi) = (-1e4, -1e-300);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn mu_tilde_matches_scalar_bisection() {
    let modes = mfbose::lattice::enumerate_modes(&LatticeSpec::from_shell(3, true));
    let shells = ModeShells::from_modes(&modes);
    for &(beta, mu, eta) in &[(0.02, 1.0, 50.0), (0.5, -2.0, 10.0), (0.01, 3.0, 1e3)] {
        let params = ModelParams::new(beta, mu, eta, Interaction::contact(1.3).unwrap()).unwrap();
        let want = scalar_mu_tilde(&params, &modes);
        let got = solve_mu_tilde_on(&params, &shells, &SolverOptions::default())
            .unwrap()
            .mu_tilde;
        assert!((got / want - 1.0).abs() <= 1e-8, "{beta} {mu} {eta}: {got} vs {want}");
    }
}

#[test]
fn mean_field_matches_cube_bisection() {
    // κ = 2 at μ = 1, η = 10³; the cube |n_i| ≤ 22 drops only weights below e^{-57}
    let params = ModelParams::at_kappa(2.0, 1.0, 1e3, Interaction::contact(1.0).unwrap()).unwrap();
    assert!((params.beta / beta_critical(1.0, 1e3, 1.0) - 2.0).abs() <= 1e-14);
    let f = |mt: f64| cube_sum(params.beta, mt, 22) + (mt - params.mu) * params.eta;
    let (mut lo, mut hi) = (-10.0, -1e-6);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let want = 0.5 * (lo + hi);
    let spec = LatticeSpec::certified(params.beta, 1e-12, true).unwrap();
    let sol = solve_mu_tilde(&params, &spec, 1e-12).unwrap();
    assert!((sol.mu_tilde / want - 1.0).abs() <= 1e-10, "{} vs {want}", sol.mu_tilde);
    let n = sol.leading_particles(&params);
    assert!((sol.n0 + sol.n_plus - n).abs() <= 1e-9 * n);
}

#[test]
fn ideal_gas_fraction_follows_critical_law() {
    let n = 1e6;
    let bc = mfbose::selfconsistent::beta_critical_ideal(n);
    for kappa in [0.5, 2.0] {
        let beta = kappa * bc;
        let spec = LatticeSpec::certified(beta, 1e-12, true).unwrap();
        let sol = solve_ideal_mu(beta, n, &ModeShells::from_spec(&spec), &SolverOptions::default()).unwrap();
        let frac = sol.n0 / n;
        assert!(
            (frac - condensate_fraction_limit(kappa)).abs() <= 0.05,
            "{kappa}: {frac}"
        );
    }
}

/// `(1/2η) Σ v̂(p) a*_{u+p} a*_{v-p} a_u a_v` as a product of ladder
/// matrices; on a basis closed under lowering this is exact.
fn interaction_from_ladders(v: &Interaction, eta: f64, basis: &FockBasis) -> OperatorMatrix {
    let lower: Vec<OperatorMatrix> = basis.modes().iter().map(|m| ladder(m, basis, false).unwrap()).collect();
    let raise: Vec<OperatorMatrix> = lower.iter().map(OperatorMatrix::adjoint).collect();
    let mut acc = OperatorMatrix::zeros(basis);
    for (p, &vp) in v.support() {
        for (iu, u) in basis.modes().iter().enumerate() {
            for (iv, w) in basis.modes().iter().enumerate() {
                let (Ok(a), Ok(b)) = (basis.mode_index(&u.add(p)), basis.mode_index(&w.sub(p))) else {
                    continue;
                };
                let term = raise[a]
                    .mul(&raise[b])
                    .unwrap()
                    .mul(&lower[iu])
                    .unwrap()
                    .mul(&lower[iv])
                    .unwrap();
                acc = acc.add(&term.scale(vp / (2.0 * eta))).unwrap();
            }
        }
    }
    acc
}

#[test]
fn hamiltonian_matches_ladder_products() {
    let modes = vec![Mode::ZERO, Mode::new(1, 0, 0), Mode::new(-1, 0, 0), Mode::new(0, 1, 0)];
    // total cap below the per-mode cap, so lowering never leaves the basis
    let basis = FockBasis::new(modes, 4, 4).unwrap();
    let v = Interaction::from_pairs([
        (Mode::ZERO, 1.0),
        (Mode::new(1, 0, 0), 0.4),
        (Mode::new(-1, 0, 0), 0.4),
        (Mode::new(1, -1, 0), 0.2),
        (Mode::new(-1, 1, 0), 0.2),
    ])
    .unwrap();
    let params = ModelParams::new(0.1, 1.0, 2.5, v.clone()).unwrap();
    let h = build_hamiltonian(&params, &basis).unwrap();
    let kinetic: OperatorMatrix = OperatorMatrix::diagonal(&basis, |s| {
        s.iter()
            .zip(basis.modes())
            .map(|(&n, m)| n as f64 * m.momentum_sq())
            .sum()
    });
    let dual = kinetic.add(&interaction_from_ladders(&v, 2.5, &basis)).unwrap();
    assert!(h.sub(&dual).unwrap().max_abs() <= 1e-12);
    assert!(h.commutator(&number(&basis)).unwrap().max_abs() <= 1e-12);
}

#[test]
fn seven_mode_basis_dimension() {
    let modes = mfbose::lattice::enumerate_modes(&LatticeSpec::from_shell(1, true));
    assert_eq!(modes.len(), 7);
    // C(3 + 7, 7) states with at most three particles
    assert_eq!(FockBasis::new(modes, 3, 3).unwrap().dim(), 120);
}

#[test]
fn onsager_gap_on_seven_modes_is_nonnegative() {
    let modes = mfbose::lattice::enumerate_modes(&LatticeSpec::from_shell(1, true));
    let basis = FockBasis::new(modes.clone(), 4, 4).unwrap();
    let mut pairs = vec![(Mode::ZERO, 1.0)];
    for m in &modes[1..] {
        pairs.push((*m, 0.3));
        pairs.push((m.add(m), 0.1));
    }
    let params = ModelParams::new(1.0, 1.0, 3.0, Interaction::from_pairs(pairs).unwrap()).unwrap();
    assert!(onsager_gap(&params, &basis).unwrap() >= -1e-10);
}

#[test]
fn translation_invariance_and_symmetry_at_zero_field() {
    let basis = FockBasis::new(vec![Mode::ZERO, Mode::new(1, 0, 0), Mode::new(-1, 0, 0)], 6, 6).unwrap();
    let v =
        Interaction::from_pairs([(Mode::ZERO, 1.0), (Mode::new(1, 0, 0), 0.5), (Mode::new(-1, 0, 0), 0.5)]).unwrap();
    let params = ModelParams::new(0.1, 2.0, 2.0, v).unwrap();
    let h = build_hamiltonian(&params, &basis).unwrap();
    let g = gibbs_state(&h, 0.1, 2.0, &basis).unwrap();
    let obs = observables(&g.state, &h, 0.1, 2.0, &basis).unwrap();
    assert_eq!(obs.a0_exp.norm(), 0.0);
    for p in 0..3 {
        for q in 0..3 {
            if p != q {
                assert!(obs.one_pdm[(p, q)].norm() <= 1e-14);
            }
        }
    }
}

#[test]
fn surface_minimum_beats_dense_grid() {
    let params = ModelParams::at_kappa(2.0, 1.0, 1e3, Interaction::contact(1.0).unwrap()).unwrap();
    let mf = MeanField::solve_lattice(params, 1e-12).unwrap();
    for &(lambda, delta) in &[(0.0, 0.0), (0.2, -0.1), (-0.3, 0.3)] {
        let sp = SurfaceParams::from_mean_field(&mf, lambda, delta);
        let grid = SurfaceGrid::default_for(&sp);
        let min = minimize_surface(&sp, &grid).unwrap();
        let n = 2001;
        let (dx, dy) = (grid.x_max / (n - 1) as f64, grid.y_max / (n - 1) as f64);
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let pt = VariationalPoint {
                    x: i as f64 * dx,
                    y: j as f64 * dy,
                };
                best = best.min(surface_value(pt, &sp));
            }
        }
        assert!(min.value <= best + 1e-12, "{lambda} {delta}: {} vs {best}", min.value);
        // a dense grid gets within its curvature-scaled resolution
        assert!(best - min.value <= 1e-4);
    }
}
