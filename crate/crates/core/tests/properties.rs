//! Randomized invariants.

use mfbose::focked::operator::ladder;
use mfbose::focked::{build_hamiltonian, FockBasis};
use mfbose::lattice::{bose_occupation, enumerate_modes, LatticeSpec, Mode, ModeShells};
use mfbose::selfconsistent::{condensate_fraction_limit, solve_mu_tilde_on};
use mfbose::variational::{griffith_bracket, surface_value};
use mfbose::{Interaction, ModelParams, SolverOptions, SurfaceParams, VariationalPoint};
use proptest::prelude::*;

fn small_shells() -> ModeShells {
    ModeShells::from_modes(&enumerate_modes(&LatticeSpec::from_shell(4, true)))
}

fn surface_params() -> impl Strategy<Value = SurfaceParams> {
    (
        0.1f64..3.0,
        0.0f64..3.0,
        0.0f64..2.0,
        0.0f64..2.0,
        -0.3f64..0.3,
        -0.3f64..0.3,
    )
        .prop_map(|(vhat0, gap, n0, n_plus, lambda, delta)| SurfaceParams {
            c1: 2.0 / 27.0,
            vhat0,
            gap,
            dv_over_eta: 0.0,
            delta,
            lambda,
            n0,
            n_plus,
            n: n0 + n_plus,
            eta: 1e3,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn occupation_decreases_in_energy(beta in 0.01f64..5.0, mu in -10.0f64..-1e-6, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(bose_occupation(beta, mu, lo) >= bose_occupation(beta, mu, hi));
    }

    #[test]
    fn solution_satisfies_its_equation(beta in 0.005f64..2.0, mu in -3.0f64..3.0, eta in 1.0f64..1e4, v in 0.2f64..3.0) {
        let params = ModelParams::new(beta, mu, eta, Interaction::contact(v).unwrap()).unwrap();
        let shells = small_shells();
        let s = solve_mu_tilde_on(&params, &shells, &SolverOptions::default()).unwrap();
        prop_assert!(s.mu_tilde < 0.0 && s.mu_tilde < mu);
        let total = s.n0 + s.n_plus;
        prop_assert!((total - s.gap * eta / v).abs() <= 1e-9 * total.max(1.0));
        prop_assert!(s.bracket.0 <= s.mu_tilde && s.mu_tilde <= s.bracket.1);
    }

    #[test]
    fn fraction_limit_is_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (fl, fh) = (condensate_fraction_limit(lo), condensate_fraction_limit(hi));
        prop_assert!(fl <= fh && (0.0..1.0).contains(&fh));
    }

    #[test]
    fn surface_is_even_in_lambda(sp in surface_params(), x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let pt = VariationalPoint { x, y };
        let flipped = sp.with_perturbation(-sp.lambda, sp.delta);
        prop_assert_eq!(surface_value(pt, &sp), surface_value(pt, &flipped));
    }

    #[test]
    fn surface_is_coercive(sp in surface_params(), angle in 0.0f64..std::f64::consts::FRAC_PI_2) {
        // the quartic term dominates far out
        let r = 10.0 * (1.0 + sp.gap + sp.delta.abs() + sp.lambda.abs() + sp.n_plus).sqrt() / sp.vhat0.sqrt();
        let far = VariationalPoint { x: r * angle.cos(), y: r * angle.sin() };
        let near = VariationalPoint { x: sp.n_plus.sqrt(), y: sp.n0.sqrt() };
        prop_assert!(surface_value(far, &sp) > surface_value(near, &sp));
    }

    #[test]
    fn brackets_nest_for_concave_functions(c in 0.1f64..5.0, s in -2.0f64..2.0, at in -1.0f64..1.0, h in 1e-3f64..0.5) {
        // log-sum-exp is convex, its negative concave
        let f = |t: f64| -((c * t).exp() + (s - t).exp()).ln();
        let (lo1, hi1) = griffith_bracket(f, at, h).unwrap();
        let (lo2, hi2) = griffith_bracket(f, at, h / 2.0).unwrap();
        let eps = 1e-12;
        prop_assert!(lo1 <= lo2 + eps && lo2 <= hi2 + eps && hi2 <= hi1 + eps);
        let e = (c * at).exp();
        let g = (s - at).exp();
        let exact = -(c * e - g) / (e + g);
        prop_assert!(lo2 - eps <= exact && exact <= hi2 + eps);
    }

    #[test]
    fn ccr_on_cap_safe_states(n_max in 2u32..5, total in 2u32..6) {
        let modes = vec![Mode::ZERO, Mode::new(1, 0, 0), Mode::new(0, 0, -1)];
        let basis = FockBasis::new(modes.clone(), n_max, total).unwrap();
        for p in &modes {
            for q in &modes {
                let a = ladder(p, &basis, false).unwrap();
                let ad = ladder(q, &basis, true).unwrap();
                let comm = a.mul(&ad).unwrap().sub(&ad.mul(&a).unwrap()).unwrap();
                let want = if p == q { 1.0 } else { 0.0 };
                for i in (0..basis.dim()).filter(|&i| basis.is_cap_safe(i)) {
                    for j in (0..basis.dim()).filter(|&j| basis.is_cap_safe(j)) {
                        let expected = if i == j { want } else { 0.0 };
                        prop_assert!((comm.matrix()[(i, j)].re - expected).abs() <= 1e-12);
                        prop_assert!(comm.matrix()[(i, j)].im.abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian(v1 in 0.0f64..2.0, eta in 0.5f64..10.0) {
        let modes = vec![Mode::ZERO, Mode::new(1, 0, 0), Mode::new(-1, 0, 0)];
        let basis = FockBasis::new(modes, 4, 5).unwrap();
        let v = Interaction::from_pairs([(Mode::ZERO, 1.0), (Mode::new(1, 0, 0), v1), (Mode::new(-1, 0, 0), v1)]).unwrap();
        let params = ModelParams::new(1.0, 0.0, eta, v).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12);
    }
}
