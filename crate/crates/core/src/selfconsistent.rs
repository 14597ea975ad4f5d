//! The effective chemical potential `μ̃ < 0` solving
//!
//! ```text
//!     Σ_p 1/(e^{β(p² - μ̃)} - 1) = (μ - μ̃) η / v̂(0)
//! ```
//!
//! and the quantities derived from it: critical temperature, condensate
//! fraction and leading-order particle number.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{zeta_three_halves, LatticeSpec, Mode, ModeShells, DEFAULT_TAIL_TOL};

/// Fourier coefficients `v̂(p) ≥ 0` of the pair interaction, finitely
/// supported and symmetric under `p ↦ -p`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    coeffs: BTreeMap<Mode, f64>,
}

impl Interaction {
    /// `v̂(0) = vhat0`, all other coefficients zero.
    pub fn contact(vhat0: f64) -> Result<Self> {
        Self::from_pairs([(Mode::ZERO, vhat0)])
    }

    /// Validates nonnegativity, finiteness and inversion symmetry. Zero
    /// coefficients are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Mode, f64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (mode, value) in pairs {
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(format!(
                    "v̂{:?} = {value} must be finite and nonnegative",
                    mode.0
                )));
            }
            if coeffs.insert(mode, value).is_some() {
                return Err(invalid(format!("v̂{:?} given twice", mode.0)));
            }
        }
        for (mode, value) in &coeffs {
            let mirrored = coeffs.get(&mode.neg()).copied().unwrap_or(0.0);
            if (mirrored - value).abs() > 1e-14 * value.abs().max(1.0) {
                return Err(invalid(format!("v̂{:?} ≠ v̂{:?}", mode.0, mode.neg().0)));
            }
        }
        coeffs.retain(|_, v| *v != 0.0);
        Ok(Interaction { coeffs })
    }

    pub fn vhat(&self, p: &Mode) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn vhat0(&self) -> f64 {
        self.vhat(&Mode::ZERO)
    }

    /// `v(0) = Σ_p v̂(p)`.
    pub fn v0(&self) -> f64 {
        self.coeffs.values().sum()
    }

    /// Nonzero coefficients in mode order.
    pub fn support(&self) -> impl Iterator<Item = (&Mode, &f64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Physical parameters of the grand-canonical mean-field gas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub mu: f64,
    pub eta: f64,
    pub interaction: Interaction,
}

impl ModelParams {
    pub fn new(beta: f64, mu: f64, eta: f64, interaction: Interaction) -> Result<Self> {
        let params = ModelParams {
            beta,
            mu,
            eta,
            interaction,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters at `β = κ β_c(μ, η)`; needs `μ > 0`.
    pub fn at_kappa(kappa: f64, mu: f64, eta: f64, interaction: Interaction) -> Result<Self> {
        let bc = beta_critical(mu, eta, interaction.vhat0());
        if !bc.is_finite() {
            return Err(invalid(format!("β_c is infinite for μ = {mu}; give β directly")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(invalid(format!("κ must be positive, got {kappa}")));
        }
        Self::new(kappa * bc, mu, eta, interaction)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("β must be positive and finite, got {}", self.beta)));
        }
        if !self.mu.is_finite() {
            return Err(invalid("μ must be finite"));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(invalid(format!("η must be positive, got {}", self.eta)));
        }
        if !(self.interaction.vhat0() > 0.0) {
            return Err(invalid("v̂(0) must be positive"));
        }
        Ok(())
    }

    pub fn vhat0(&self) -> f64 {
        self.interaction.vhat0()
    }

    pub fn v0(&self) -> f64 {
        self.interaction.v0()
    }

    /// `d_v = (v(0) + 3 v̂(0)) / 2`.
    pub fn dv(&self) -> f64 {
        0.5 * (self.v0() + 3.0 * self.vhat0())
    }

    /// `κ = β / β_c(μ, η)`; zero when `β_c = ∞`.
    pub fn kappa(&self) -> f64 {
        let bc = beta_critical(self.mu, self.eta, self.vhat0());
        if bc.is_finite() {
            self.beta / bc
        } else {
            0.0
        }
    }
}

/// Solver knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Stop once `|f(μ̃)| ≤ tol · max(1, Σ_p occupation)`.
    pub tol: f64,
    /// Relative tolerance on the certified lattice tail at the root.
    pub tail_tol: f64,
    /// Doublings allowed when pushing the lower bracket end down.
    pub max_bracket_expansions: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            tail_tol: DEFAULT_TAIL_TOL,
            max_bracket_expansions: 64,
        }
    }
}

/// Solution of the effective chemical potential equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChemPotSolution {
    pub mu_tilde: f64,
    /// `|f(μ̃)| / max(1, Σ_p occupation)` at the returned root.
    pub residual: f64,
    /// `μ - μ̃`.
    pub gap: f64,
    /// `N₀(β, μ̃) = 1/(e^{-βμ̃} - 1)`.
    pub n0: f64,
    /// Occupation summed over the excited modes.
    pub n_plus: f64,
    /// Final bisection interval in `μ̃`.
    pub bracket: (f64, f64),
    /// Certified bound on the omitted lattice modes.
    pub tail_bound: f64,
}

impl ChemPotSolution {
    /// `(μ - μ̃) η / v̂(0)`.
    pub fn leading_particles(&self, params: &ModelParams) -> f64 {
        self.gap * params.eta / params.vhat0()
    }
}

/// Bisection in `t = ln(-μ̃)` for a function that increases with `μ̃` on
/// `(-∞, 0)`. Returns the final bracket `(μ̃_lo, μ̃_hi)` with `f(lo) < 0 < f(hi)`
/// and the best point found.
fn bisect_increasing(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    converged: &dyn Fn(f64, f64) -> bool,
) -> (f64, f64, f64) {
    debug_assert!(lo < hi && hi < 0.0);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut best = if f_hi.abs() < f_lo.abs() { hi } else { lo };
    for _ in 0..400 {
        let t_lo = (-lo).ln();
        let t_hi = (-hi).ln();
        let mid = -(0.5 * (t_lo + t_hi)).exp();
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm.abs() < f(best).abs() {
            best = mid;
        }
        if converged(mid, fm) {
            best = mid;
            break;
        }
        if fm < 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    // one secant step inside the final bracket
    if f_hi != f_lo {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if secant > lo && secant < hi && f(secant).abs() < f(best).abs() {
            best = secant;
        }
    }
    (lo, hi, best)
}

/// Finds `μ̃ < 0` with `g(μ̃) = 0` for `g` strictly increasing, `g → -∞` as
/// `μ̃ → -∞` and `g → +∞` as `μ̃ → 0⁻`.
fn solve_increasing(
    g: &dyn Fn(f64) -> f64,
    scale: &dyn Fn(f64) -> f64,
    initial_lo: f64,
    opts: &SolverOptions,
) -> Result<(f64, (f64, f64))> {
    let mut hi = -1e-3;
    let mut shrink = 0;
    while g(hi) <= 0.0 {
        hi /= 16.0;
        shrink += 1;
        if shrink > 120 || hi == 0.0 {
            return Err(Error::BracketNotFound(format!(
                "f stays nonpositive down to μ̃ = {hi:e}"
            )));
        }
    }
    let mut lo = initial_lo.min(2.0 * hi);
    let mut expansions = 0;
    while g(lo) >= 0.0 {
        if expansions >= opts.max_bracket_expansions {
            return Err(Error::BracketNotFound(format!(
                "f(μ̃) ≥ 0 at the lower end μ̃ = {lo:e} after {expansions} expansions"
            )));
        }
        lo *= 2.0;
        expansions += 1;
    }
    let tol = opts.tol;
    let converged = |x: f64, fx: f64| fx.abs() <= tol * scale(x).max(1.0);
    let (lo, hi, root) = bisect_increasing(g, lo, hi, &converged);
    Ok((root, (lo, hi)))
}

/// Solves the effective chemical potential equation on a truncation of the
/// lattice; the spec must contain `p = 0`.
pub fn solve_mu_tilde(params: &ModelParams, spec: &LatticeSpec, tol: f64) -> Result<ChemPotSolution> {
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    solve_mu_tilde_on(params, &ModeShells::from_spec(spec), &opts)
}

/// Same as [`solve_mu_tilde`] on a prepared shell table, which may also be a
/// finite mode set (no tail).
pub fn solve_mu_tilde_on(params: &ModelParams, shells: &ModeShells, opts: &SolverOptions) -> Result<ChemPotSolution> {
    params.validate()?;
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !shells.contains_zero() {
        return Err(invalid("the mode set must contain p = 0"));
    }
    let (beta, mu, eta, vhat0) = (params.beta, params.mu, params.eta, params.vhat0());
    let occupation = |mt: f64| shells.occupation_sum(beta, mt).value;
    let f = |mt: f64| occupation(mt) + (mt - mu) * eta / vhat0;
    let initial_lo = mu - eta * mu.abs().max(1.0);
    let (mu_tilde, bracket) = solve_increasing(&f, &occupation, initial_lo.min(-1.0), opts)?;

    let sum = shells.occupation_sum(beta, mu_tilde).certify(opts.tail_tol)?;
    let n0 = 1.0 / (-beta * mu_tilde).exp_m1();
    let n_plus = shells.excited().occupation_sum(beta, mu_tilde).value;
    let residual = f(mu_tilde).abs() / sum.value.max(1.0);
    Ok(ChemPotSolution {
        mu_tilde,
        residual,
        gap: mu - mu_tilde,
        n0,
        n_plus,
        bracket,
        tail_bound: sum.tail_bound,
    })
}

/// Chemical potential of the ideal gas with expected particle number `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealSolution {
    pub mu0: f64,
    pub n0: f64,
    pub residual: f64,
}

/// Solves `Σ_p 1/(e^{β(p² - μ₀)} - 1) = n` for `μ₀ < 0`.
pub fn solve_ideal_mu(beta: f64, n: f64, shells: &ModeShells, opts: &SolverOptions) -> Result<IdealSolution> {
    if !(beta > 0.0) || !(n > 0.0) {
        return Err(invalid("β and N must be positive"));
    }
    if !shells.contains_zero() {
        return Err(invalid("the mode set must contain p = 0"));
    }
    let g = |mt: f64| shells.occupation_sum(beta, mt).value - n;
    let scale = |_: f64| n;
    let (mu0, _) = solve_increasing(&g, &scale, -1.0, opts)?;
    shells.occupation_sum(beta, mu0).certify(opts.tail_tol)?;
    Ok(IdealSolution {
        mu0,
        n0: 1.0 / (-beta * mu0).exp_m1(),
        residual: g(mu0).abs() / n.max(1.0),
    })
}

/// `β_c(μ, η) = (1/4π) (μη / (v̂(0) ζ(3/2)))^{-2/3}` for `μ > 0`, `+∞`
/// otherwise.
pub fn beta_critical(mu: f64, eta: f64, vhat0: f64) -> f64 {
    if mu <= 0.0 {
        return f64::INFINITY;
    }
    (mu * eta / (vhat0 * zeta_three_halves())).powf(-2.0 / 3.0) / (4.0 * PI)
}

/// Ideal-gas critical inverse temperature at particle number `n`.
pub fn beta_critical_ideal(n: f64) -> f64 {
    (n / zeta_three_halves()).powf(-2.0 / 3.0) / (4.0 * PI)
}

/// `[1 - κ^{-3/2}]_+`.
pub fn condensate_fraction_limit(kappa: f64) -> f64 {
    if kappa <= 1.0 {
        0.0
    } else {
        1.0 - kappa.powf(-1.5)
    }
}

/// `max(ln η, 1)`: the logarithm in error envelopes, kept ≥ 1 so envelopes
/// stay meaningful at toy values of η.
pub fn log_plus(eta: f64) -> f64 {
    eta.ln().max(1.0)
}

/// A leading-order value together with an explicit error radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub radius: f64,
    /// The policy constant multiplying the radius' η-dependence.
    pub policy_constant: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.radius
    }
}

/// `N(β, μ) ≈ (μ - μ̃) η / v̂(0)` with radius `K η^{5/6} √(ln η)`.
pub fn expected_particles(params: &ModelParams, sol: &ChemPotSolution, k: f64) -> Estimate {
    let eta = params.eta;
    Estimate {
        value: sol.leading_particles(params),
        radius: k * eta.powf(5.0 / 6.0) * log_plus(eta).sqrt(),
        policy_constant: k,
    }
}
