//! Ideal-gas grand potentials and explicit envelopes for the interacting
//! grand potential.
//!
//! Every envelope is a center (the leading-order expression, kept as a sum of
//! labelled terms) plus a radius `K · shape(η, λ, δ)`. The constant `K` is a
//! policy knob: the asymptotic statements only guarantee that some constant
//! exists, so `K` is calibrated against exact data and then frozen.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{LatticeSpec, LatticeSum, ModeShells, DEFAULT_TAIL_TOL};
use crate::selfconsistent::{log_plus, solve_mu_tilde_on, ChemPotSolution, ModelParams, SolverOptions};

/// `(1/β) Σ_p ln(1 - e^{-β(p² - μ̃)})` over the spec's modes (or only the
/// excited ones), failing if the omitted tail exceeds `rel_tol` of the sum.
pub fn phi_ideal(beta: f64, mu_tilde: f64, spec: &LatticeSpec, excited_only: bool, rel_tol: f64) -> Result<LatticeSum> {
    let shells = ModeShells::from_spec(spec);
    let shells = if excited_only { shells.excited() } else { shells };
    phi_ideal_on(beta, mu_tilde, &shells, rel_tol)
}

/// [`phi_ideal`] over a prepared shell table.
pub fn phi_ideal_on(beta: f64, mu_tilde: f64, shells: &ModeShells, rel_tol: f64) -> Result<LatticeSum> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!("β must be positive, got {beta}")));
    }
    if !(mu_tilde < 0.0) {
        return Err(invalid(format!("μ̃ must be negative, got {mu_tilde}")));
    }
    let raw = shells.log_partition_sum(beta, mu_tilde).certify(rel_tol)?;
    Ok(LatticeSum {
        value: raw.value / beta,
        tail_bound: raw.tail_bound / beta,
        max_shell: raw.max_shell,
    })
}

/// A solved mean-field problem: parameters, effective chemical potential and
/// the excited-mode ideal grand potential at `μ̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanField {
    pub params: ModelParams,
    pub solution: ChemPotSolution,
    /// `Φ₊(β, μ̃)`.
    pub phi_plus: f64,
    pub shells: ModeShells,
}

impl MeanField {
    pub fn solve(params: ModelParams, shells: ModeShells, opts: &SolverOptions) -> Result<Self> {
        let solution = solve_mu_tilde_on(&params, &shells, opts)?;
        let phi_plus = phi_ideal_on(params.beta, solution.mu_tilde, &shells.excited(), opts.tail_tol)?.value;
        Ok(MeanField {
            params,
            solution,
            phi_plus,
            shells,
        })
    }

    /// Solves on a certified truncation of the full lattice.
    pub fn solve_lattice(params: ModelParams, tol: f64) -> Result<Self> {
        let spec = LatticeSpec::certified(params.beta, DEFAULT_TAIL_TOL * 1e-2, true)?;
        let opts = SolverOptions {
            tol,
            ..SolverOptions::default()
        };
        Self::solve(params, ModeShells::from_spec(&spec), &opts)
    }

    /// `N(β, μ) ≈ (μ - μ̃) η / v̂(0)`.
    pub fn particles(&self) -> f64 {
        self.solution.leading_particles(&self.params)
    }

    /// `Φ₊(β, μ̃) - (μ - μ̃)² η / (2 v̂(0))`.
    pub fn unperturbed_center(&self) -> f64 {
        self.phi_plus + self.quadratic_gap_term()
    }

    fn quadratic_gap_term(&self) -> f64 {
        let gap = self.solution.gap;
        -gap * gap * self.params.eta / (2.0 * self.params.vhat0())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Ideal,
    QuadraticGap,
    Delta,
    Lambda,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeTerm {
    pub kind: TermKind,
    pub value: f64,
}

/// `center ± radius`, with the center broken into labelled terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub center: f64,
    pub radius: f64,
    pub terms: Vec<EnvelopeTerm>,
    pub policy_constant: f64,
}

impl BoundEnvelope {
    fn from_terms(terms: Vec<EnvelopeTerm>, policy_constant: f64, shape: f64) -> Self {
        let center = terms.iter().map(|t| t.value).sum();
        BoundEnvelope {
            center,
            radius: policy_constant * shape,
            terms,
            policy_constant,
        }
    }

    pub fn lower(&self) -> f64 {
        self.center - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.center + self.radius
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn term(&self, kind: TermKind) -> f64 {
        self.terms.iter().filter(|t| t.kind == kind).map(|t| t.value).sum()
    }
}

fn unperturbed_terms(mf: &MeanField) -> Vec<EnvelopeTerm> {
    vec![
        EnvelopeTerm {
            kind: TermKind::Ideal,
            value: mf.phi_plus,
        },
        EnvelopeTerm {
            kind: TermKind::QuadraticGap,
            value: mf.quadratic_gap_term(),
        },
    ]
}

/// Radius shape `η^{2/3}` of the upper bound.
pub fn upper_shape(eta: f64) -> f64 {
    eta.powf(2.0 / 3.0)
}

/// Radius shape `η^{2/3} ln η` of the lower bound.
pub fn lower_shape(eta: f64) -> f64 {
    eta.powf(2.0 / 3.0) * log_plus(eta)
}

/// Radius shape `η (δ² + |δ||λ|^{1/3} + |λ|^{4/3} + η^{-1/6} ln η)` of the
/// perturbed two-sided bound.
pub fn perturbed_shape(eta: f64, lambda: f64, delta: f64) -> f64 {
    let l = lambda.abs();
    eta * (delta * delta + delta.abs() * l.cbrt() + l.powf(4.0 / 3.0) + eta.powf(-1.0 / 6.0) * log_plus(eta))
}

/// Upper envelope for the unperturbed grand potential; only `upper()` is a
/// claim.
pub fn unperturbed_upper_bound(mf: &MeanField, k: f64) -> BoundEnvelope {
    BoundEnvelope::from_terms(unperturbed_terms(mf), k, upper_shape(mf.params.eta))
}

/// Lower envelope for the unperturbed grand potential, with the quadratic
/// number penalty that accompanies it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub envelope: BoundEnvelope,
    /// `v̂(0) / (2η)`.
    pub penalty_coefficient: f64,
    /// `(μ - μ̃ + v(0)/(2η)) η / v̂(0)`, the particle number the penalty is
    /// centered on.
    pub number_target: f64,
}

impl LowerBound {
    /// `lower() + penalty · ⟨(𝒩 - target)²⟩` for a state with the given first
    /// two moments of the number operator.
    pub fn with_number_moments(&self, mean: f64, second_moment: f64) -> f64 {
        let t = self.number_target;
        self.envelope.lower() + self.penalty_coefficient * (second_moment - 2.0 * t * mean + t * t)
    }
}

pub fn unperturbed_lower_bound(mf: &MeanField, k: f64) -> LowerBound {
    let p = &mf.params;
    LowerBound {
        envelope: BoundEnvelope::from_terms(unperturbed_terms(mf), k, lower_shape(p.eta)),
        penalty_coefficient: p.vhat0() / (2.0 * p.eta),
        number_target: (mf.solution.gap + p.v0() / (2.0 * p.eta)) * p.eta / p.vhat0(),
    }
}

/// Two-sided envelope for the grand potential of `H + δ a₀*a₀ + λ√N (a₀ + a₀*)`.
pub fn perturbed_bounds(mf: &MeanField, lambda: f64, delta: f64, k: f64) -> BoundEnvelope {
    let n0 = mf.solution.n0;
    let mut terms = unperturbed_terms(mf);
    terms.push(EnvelopeTerm {
        kind: TermKind::Delta,
        value: delta * n0,
    });
    terms.push(EnvelopeTerm {
        kind: TermKind::Lambda,
        value: -2.0 * lambda.abs() * (mf.particles() * n0).sqrt(),
    });
    BoundEnvelope::from_terms(terms, k, perturbed_shape(mf.params.eta, lambda, delta))
}

/// Smallest `K` with `excess ≤ K · shape` over all samples, times `safety`.
/// Samples are `(excess, shape)`; nonpositive excesses need no radius.
pub fn calibrate_constant(samples: impl IntoIterator<Item = (f64, f64)>, safety: f64) -> f64 {
    let k = samples
        .into_iter()
        .filter(|&(excess, _)| excess > 0.0)
        .map(|(excess, shape)| if shape > 0.0 { excess / shape } else { f64::INFINITY })
        .fold(0.0, f64::max);
    k * safety
}
