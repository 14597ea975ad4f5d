//! Von Neumann, relative and bosonic relative entropies.

use serde::Serialize;

use super::operator::StateMatrix;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, trace, trace_norm, CMatrix, HermitianEigen};

/// `-Σ p ln p` over a spectrum, with `0 ln 0 = 0` and rounding-level
/// negative eigenvalues treated as zero.
pub fn von_neumann_of_spectrum(spectrum: &[f64]) -> f64 {
    -spectrum.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

pub fn von_neumann(state: &StateMatrix) -> f64 {
    state.entropy()
}

/// `tr Γ (ln Γ − ln Γ₀)`; `+∞` when `Γ` has weight outside the support of
/// `Γ₀`.
pub fn relative_entropy(state: &StateMatrix, reference: &StateMatrix) -> Result<f64> {
    if state.fingerprint() != reference.fingerprint() || state.dim() != reference.dim() {
        return Err(Error::BasisMismatch);
    }
    let a = HermitianEigen::new(state.matrix()).pairs();
    let b = HermitianEigen::new(reference.matrix()).pairs();
    let mut acc = 0.0;
    for (p, psi) in &a {
        if *p <= 0.0 {
            continue;
        }
        acc += p * p.ln();
        for (q, phi) in &b {
            let w = psi.dotc(phi).norm_sqr();
            if w <= 1e-28 {
                continue;
            }
            if *q <= 0.0 {
                return Ok(f64::INFINITY);
            }
            acc -= p * w * q.ln();
        }
    }
    Ok(acc.max(0.0))
}

/// `σ(x) = x ln x − (1+x) ln(1+x)`.
pub fn sigma(x: f64) -> f64 {
    let xl = if x > 0.0 { x * x.ln() } else { 0.0 };
    xl - (1.0 + x) * x.ln_1p()
}

/// Bregman divergence `σ(g) − σ(e) − σ'(e)(g − e) ≥ 0` of the convex
/// function `σ`.
pub fn sigma_divergence(g: f64, e: f64) -> f64 {
    if e <= 0.0 {
        return if g <= 0.0 { 0.0 } else { f64::INFINITY };
    }
    let d = g - e;
    if d.abs() <= 0.5 * e {
        // Taylor series in d around e; every coefficient is
        // (−1)^k (k−2)! (e^{1−k} − (1+e)^{1−k}) / k!.
        let u = d / e;
        let log_ratio = (1.0 / e).ln_1p();
        let mut acc = 0.0;
        let mut uk = u;
        for k in 2..200 {
            uk *= u;
            let km1 = (k - 1) as f64;
            let gap = -(-km1 * log_ratio).exp_m1();
            let term = if k % 2 == 0 { uk } else { -uk } * e * gap / (k as f64 * km1);
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        let first = if g > 0.0 { g * (g / e).ln() } else { 0.0 };
        (first - (1.0 + g) * (d / (1.0 + e)).ln_1p()).max(0.0)
    }
}

/// `s(a, b) = Σ_ij |⟨ψ_i, φ_j⟩|² (σ(γ_i) − σ(η_j) − σ'(η_j)(γ_i − η_j))` for
/// nonnegative Hermitian `a = Σ γ_i |ψ_i⟩⟨ψ_i|`, `b = Σ η_j |φ_j⟩⟨φ_j|`.
pub fn bosonic_relative_entropy(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::BasisMismatch);
    }
    let ea = HermitianEigen::new(a).pairs();
    let eb = HermitianEigen::new(b).pairs();
    let mut acc = 0.0;
    for (g, psi) in &ea {
        let g = g.max(0.0);
        for (e, phi) in &eb {
            let w = psi.dotc(phi).norm_sqr();
            if w == 0.0 {
                continue;
            }
            let e = e.max(0.0);
            let d = sigma_divergence(g, e);
            if d.is_infinite() {
                if w > 1e-28 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            acc += w * d;
        }
    }
    Ok(acc)
}

/// `c₁ ‖a − b‖₁² / (‖1 + b‖ tr[a + b])`.
pub fn bosonic_entropy_lower_bound(a: &CMatrix, b: &CMatrix, c1: f64) -> f64 {
    let diff = trace_norm(&(a - b));
    let op_norm = 1.0 + hermitian_eigenvalues(b).last().copied().unwrap_or(0.0).max(0.0);
    let tr = trace(&(a + b)).re;
    if tr <= 0.0 {
        return 0.0;
    }
    c1 * diff * diff / (op_norm * tr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Entropies {
    pub von_neumann: f64,
    pub relative: f64,
    pub bosonic_relative: f64,
}

pub fn entropies(
    state: &StateMatrix,
    reference: &StateMatrix,
    gamma_a: &CMatrix,
    gamma_b: &CMatrix,
) -> Result<Entropies> {
    Ok(Entropies {
        von_neumann: state.entropy(),
        relative: relative_entropy(state, reference)?,
        bosonic_relative: bosonic_relative_entropy(gamma_a, gamma_b)?,
    })
}

/// `−Σ_j w_j f_j ln f_j` for a density sampled with quadrature weights.
pub fn classical_entropy(densities: &[f64], weights: &[f64]) -> f64 {
    -densities
        .iter()
        .zip(weights)
        .filter(|(&f, _)| f > 0.0)
        .map(|(&f, &w)| w * f * f.ln())
        .sum::<f64>()
}
