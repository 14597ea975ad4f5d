//! Seeded property checks of the operator, entropy and quadrature
//! inequalities. Each check reports its worst margin; a check passes when the
//! margin is nonnegative.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::focked::basis::FockBasis;
use crate::focked::coherent::{lower_symbol, upper_symbol_check, PolarGrid};
use crate::focked::ed::EdSystem;
use crate::focked::entropy::{bosonic_entropy_lower_bound, bosonic_relative_entropy};
use crate::focked::gibbs::{grand_potential_functional, trial_state};
use crate::focked::hamiltonian::onsager_gap_for;
use crate::focked::operator::StateMatrix;
use crate::lattice::{enumerate_modes, LatticeSpec, Mode};
use crate::linalg::CMatrix;
use crate::selfconsistent::{Interaction, ModelParams};
use crate::variational::{griffith_bracket, DEFAULT_C1};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Worst-case slack; negative means violated.
    pub margin: f64,
    pub samples: usize,
}

impl CheckReport {
    fn new(name: &str, margin: f64, samples: usize) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: margin >= 0.0,
            margin,
            samples,
        }
    }
}

/// Sizes and tolerances of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub onsager_systems: usize,
    pub onsager_max_modes: usize,
    pub onsager_max_dim: usize,
    pub entropy_states: usize,
    pub bosonic_pairs: usize,
    pub bosonic_max_dim: usize,
    pub gibbs_perturbations: usize,
    pub radial_order: usize,
    pub angular_points: usize,
    pub z_max: f64,
    pub n_max: u32,
    pub symbol_tol: f64,
    pub entropy_slack: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            onsager_systems: 50,
            onsager_max_modes: 7,
            onsager_max_dim: 1000,
            entropy_states: 20,
            bosonic_pairs: 200,
            bosonic_max_dim: 6,
            gibbs_perturbations: 100,
            radial_order: 64,
            angular_points: 128,
            z_max: 6.0,
            n_max: 12,
            symbol_tol: 1e-6,
            entropy_slack: 1e-4,
        }
    }
}

/// Allowed negativity of the Onsager operator's spectrum.
pub const ONSAGER_TOL: f64 = 1e-10;
/// Allowed violation of the bosonic relative entropy bound.
pub const BOSONIC_TOL: f64 = 1e-12;
/// Allowed rounding in the Gibbs variational principle and concavity checks.
pub const THERMO_TOL: f64 = 1e-9;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G*` for a complex Gaussian `dim × rank` matrix `G`.
pub fn random_psd(rng: &mut impl Rng, dim: usize, rank: usize, scale: f64) -> CMatrix {
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian_complex(rng));
    (&g * g.adjoint()) * Complex64::new(scale, 0.0)
}

/// A random density matrix of the given rank on `basis`.
pub fn random_state(rng: &mut impl Rng, basis: &FockBasis, rank: usize) -> Result<StateMatrix> {
    StateMatrix::normalized(basis, random_psd(rng, basis.dim(), rank, 1.0))
}

/// A random nonnegative, inversion-symmetric interaction supported on
/// `v̂(0)` and differences of the given modes.
pub fn random_interaction(rng: &mut impl Rng, modes: &[Mode]) -> Interaction {
    let mut pairs = vec![(Mode::ZERO, rng.random_range(0.1..2.0))];
    for (i, a) in modes.iter().enumerate() {
        for b in &modes[i + 1..] {
            let d = a.sub(b);
            if d.is_zero() || pairs.iter().any(|(m, _)| *m == d || *m == d.neg()) || rng.random_bool(0.4) {
                continue;
            }
            let v = rng.random_range(0.0..1.0);
            pairs.push((d, v));
            pairs.push((d.neg(), v));
        }
    }
    Interaction::from_pairs(pairs).expect("constructed symmetric and nonnegative")
}

/// A random system of at most `max_modes` modes drawn from the first two
/// shells, with caps chosen so the dimension stays at most `max_dim`.
pub fn random_onsager_system(
    rng: &mut impl Rng,
    max_modes: usize,
    max_dim: usize,
) -> Result<(Interaction, f64, FockBasis)> {
    let pool = enumerate_modes(&LatticeSpec::from_shell(2, true));
    let k = rng.random_range(2..=max_modes.clamp(2, pool.len()));
    let mut chosen: Vec<Mode> = Vec::with_capacity(k);
    while chosen.len() < k {
        let m = pool[rng.random_range(0..pool.len())];
        if !chosen.contains(&m) {
            chosen.push(m);
        }
    }
    chosen.sort();
    let interaction = random_interaction(rng, &chosen);
    let eta = rng.random_range(0.5..5.0);
    let mut total = rng.random_range(2..=12u32);
    loop {
        match FockBasis::with_cap(chosen.clone(), total, total, max_dim) {
            Ok(b) => return Ok((interaction, eta, b)),
            Err(crate::Error::DimensionTooLarge { .. }) if total > 1 => total -= 1,
            Err(e) => return Err(e),
        }
    }
}

/// Minimum over random systems of the Onsager operator's lowest eigenvalue,
/// shifted by the tolerance.
pub fn check_onsager(cfg: &SuiteConfig) -> Result<CheckReport> {
    let mut rng = rng_for(cfg.seed, 1);
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.onsager_systems {
        let (v, eta, basis) = random_onsager_system(&mut rng, cfg.onsager_max_modes, cfg.onsager_max_dim)?;
        worst = worst.min(onsager_gap_for(&v, eta, &basis)?);
    }
    Ok(CheckReport::new("onsager", worst + ONSAGER_TOL, cfg.onsager_systems))
}

/// Two-mode basis `{0, (1,0,0)}` with both caps at `n_max`.
pub fn two_mode_basis(n_max: u32) -> Result<FockBasis> {
    FockBasis::new(vec![Mode::ZERO, Mode::new(1, 0, 0)], n_max, n_max)
}

/// `S(Γ) ≤ ∫ S(Γ_z) ζ + S(ζ)` on random two-mode states.
pub fn check_entropy_decomposition(cfg: &SuiteConfig) -> Result<CheckReport> {
    let mut rng = rng_for(cfg.seed, 2);
    let basis = two_mode_basis(cfg.n_max)?;
    let grid = PolarGrid::new(cfg.radial_order, cfg.angular_points, cfg.z_max)?;
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.entropy_states {
        let rank = rng.random_range(1..=4);
        let state = random_state(&mut rng, &basis, rank)?;
        let sym = lower_symbol(&state, &basis, &grid, cfg.entropy_slack)?;
        let rhs = sym.mean_conditional_entropy() + sym.classical_entropy();
        worst = worst.min(rhs + cfg.entropy_slack - state.entropy());
    }
    Ok(CheckReport::new("entropy_decomposition", worst, cfg.entropy_states))
}

/// `s(a, b) ≥ (2/27) ‖a − b‖₁² / (‖1 + b‖ tr[a + b])` on random pairs.
pub fn check_bosonic_entropy(cfg: &SuiteConfig) -> Result<CheckReport> {
    let mut rng = rng_for(cfg.seed, 3);
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.bosonic_pairs {
        let dim = rng.random_range(1..=cfg.bosonic_max_dim.max(1));
        let scale_a = 10f64.powf(rng.random_range(-2.0..1.0));
        let scale_b = 10f64.powf(rng.random_range(-2.0..1.0));
        let rank = rng.random_range(1..=dim);
        let a = random_psd(&mut rng, dim, rank, scale_a);
        let b = random_psd(&mut rng, dim, dim, scale_b);
        let s = bosonic_relative_entropy(&a, &b)?;
        let bound = bosonic_entropy_lower_bound(&a, &b, DEFAULT_C1);
        worst = worst.min(s - bound + BOSONIC_TOL);
    }
    Ok(CheckReport::new("bosonic_relative_entropy", worst, cfg.bosonic_pairs))
}

/// Resolution of identity and number upper symbols on the faithful
/// occupations, for a few shifts `ν`.
pub fn check_symbols(cfg: &SuiteConfig) -> Result<CheckReport> {
    let grid = PolarGrid::new(cfg.radial_order, cfg.angular_points, cfg.z_max)?;
    let mut worst = f64::INFINITY;
    let shifts = [0.0, 0.5, -1.25, 2.0];
    for nu in shifts {
        let r = upper_symbol_check(&grid, cfg.n_max as usize, nu, cfg.symbol_tol)?;
        worst = worst.min(cfg.symbol_tol - r.max_deviation());
    }
    Ok(CheckReport::new("upper_symbols", worst, shifts.len()))
}

/// The two-mode experiment used by the thermodynamic checks.
pub fn toy_system() -> Result<EdSystem> {
    let interaction =
        Interaction::from_pairs([(Mode::ZERO, 1.0), (Mode::new(1, 0, 0), 0.5), (Mode::new(-1, 0, 0), 0.5)])?;
    let params = ModelParams::new(0.08, 1.5, 3.0, interaction)?;
    EdSystem::new(params, two_mode_basis(14)?, 4.0)
}

/// `𝒢(Gibbs) ≤ 𝒢(Γ)` for random perturbations of the perturbed Gibbs state
/// and for the coherent ⊗ thermal trial state.
pub fn check_gibbs_minimality(cfg: &SuiteConfig) -> Result<CheckReport> {
    let mut rng = rng_for(cfg.seed, 4);
    let sys = toy_system()?;
    let (lambda, delta) = (0.2, -0.1);
    let h = sys.hamiltonian_at(lambda, delta)?;
    let (beta, mu) = (sys.params.beta, sys.params.mu);
    let g = sys.gibbs(lambda, delta)?;
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.gibbs_perturbations {
        // log-uniform weights probe states close to the minimizer
        let t = 10f64.powf(rng.random_range(-6.0..0.0));
        let rank = rng.random_range(1..=3);
        let other = random_state(&mut rng, &sys.basis, rank)?;
        let mix = g.state.matrix() * Complex64::new(1.0 - t, 0.0) + other.matrix() * Complex64::new(t, 0.0);
        let gamma = StateMatrix::normalized(&sys.basis, mix)?;
        let f = grand_potential_functional(&gamma, &h, beta, mu, &sys.basis)?;
        worst = worst.min(f - g.grand_potential);
    }
    let trial = trial_state(&sys.basis, Complex64::new(-1.5, 0.0), beta, -0.5)?;
    worst = worst.min(grand_potential_functional(&trial, &h, beta, mu, &sys.basis)? - g.grand_potential);
    Ok(CheckReport::new(
        "gibbs_minimality",
        worst + THERMO_TOL,
        cfg.gibbs_perturbations + 1,
    ))
}

/// Nonpositive second differences of `λ ↦ Φ(λ, 0)` and `δ ↦ Φ(0, δ)`.
pub fn check_concavity(_cfg: &SuiteConfig) -> Result<CheckReport> {
    let sys = toy_system()?;
    let h = 0.05;
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    for k in -6..=6 {
        let t = k as f64 * 0.1;
        let lam = [
            sys.grand_potential(t - h, 0.0)?,
            sys.grand_potential(t, 0.0)?,
            sys.grand_potential(t + h, 0.0)?,
        ];
        let del = [
            sys.grand_potential(0.0, t - h)?,
            sys.grand_potential(0.0, t)?,
            sys.grand_potential(0.0, t + h)?,
        ];
        for v in [lam, del] {
            let second = v[0] - 2.0 * v[1] + v[2];
            worst = worst.min(-second + THERMO_TOL);
            samples += 1;
        }
    }
    Ok(CheckReport::new("concavity", worst, samples))
}

/// Difference-quotient brackets in `λ` and `δ` contain the exact
/// derivatives `√n_ref tr[(a₀ + a₀*)G]` and `tr[a₀*a₀ G]`.
pub fn check_brackets(_cfg: &SuiteConfig) -> Result<CheckReport> {
    let sys = toy_system()?;
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    for &(lambda, delta) in &[(0.0, 0.0), (0.15, 0.0), (-0.3, 0.1), (0.05, -0.2)] {
        let g = sys.gibbs(lambda, delta)?;
        for step in [1e-1, 1e-2, 1e-3] {
            let (lo, hi) = griffith_bracket(|t| sys.grand_potential(t, delta).unwrap_or(f64::NAN), lambda, step)?;
            let x = sys.field_exp(&g)?;
            worst = worst.min((x - lo).min(hi - x) + THERMO_TOL);
            let (lo, hi) = griffith_bracket(|t| sys.grand_potential(lambda, t).unwrap_or(f64::NAN), delta, step)?;
            let x = sys.condensate_exp(&g)?;
            worst = worst.min((x - lo).min(hi - x) + THERMO_TOL);
            samples += 2;
        }
    }
    Ok(CheckReport::new("griffith_brackets", worst, samples))
}

/// Runs every check in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    Ok(vec![
        check_onsager(cfg)?,
        check_entropy_decomposition(cfg)?,
        check_bosonic_entropy(cfg)?,
        check_symbols(cfg)?,
        check_gibbs_minimality(cfg)?,
        check_concavity(cfg)?,
        check_brackets(cfg)?,
    ])
}
