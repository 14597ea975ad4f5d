//! Zero-mode coherent states, polar quadrature over the complex plane, lower
//! symbols of states and quadrature checks of upper symbols.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::basis::FockBasis;
use super::entropy::{classical_entropy, von_neumann_of_spectrum};
use super::operator::StateMatrix;
use crate::error::{invalid, Error, Result};
use crate::lattice::Mode;
use crate::linalg::{hermitian_eigenvalues, CMatrix};

/// Reported truncation error above which a coherent state is refused.
pub const MAX_TRUNCATION_ERROR: f64 = 0.01;

/// `⟨n|z⟩ = e^{−|z|²/2} zⁿ/√n!` for `n = 0..=n_max`, not renormalized.
pub fn coherent_amplitudes(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * z / (n as f64).sqrt();
        out.push(c);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    /// Unit-norm amplitudes on occupations `0..=n_max`.
    pub amplitudes: Vec<Complex64>,
    /// `1 − Σ_{n ≤ n_max} |⟨n|z⟩|²`.
    pub truncation_error: f64,
}

/// The truncated coherent state, renormalized.
pub fn coherent_state(z: Complex64, n_max: usize) -> Result<CoherentState> {
    let raw = coherent_amplitudes(z, n_max);
    let kept: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
    let truncation_error = (1.0 - kept).max(0.0);
    if truncation_error > MAX_TRUNCATION_ERROR {
        return Err(Error::TruncationUnfaithful(truncation_error));
    }
    let s = kept.sqrt();
    Ok(CoherentState {
        amplitudes: raw.into_iter().map(|c| c / s).collect(),
        truncation_error,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule for `∫_{|z| ≤ z_max} f(z) d²z/π`: Gauss–Legendre in the
/// radius, uniform in the angle.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub radial_order: usize,
    pub angular_points: usize,
    pub z_max: f64,
    radii: Vec<f64>,
    /// `r w_r` for each radius; the angular weight `2/N` is applied separately.
    radial_weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(radial_order: usize, angular_points: usize, z_max: f64) -> Result<Self> {
        if radial_order == 0 || angular_points == 0 || !(z_max > 0.0) {
            return Err(invalid("polar grid needs positive orders and radius"));
        }
        let (x, w) = gauss_legendre(radial_order);
        let half = 0.5 * z_max;
        let radii: Vec<f64> = x.iter().map(|t| half * (t + 1.0)).collect();
        let radial_weights = radii.iter().zip(&w).map(|(r, w)| r * w * half).collect();
        Ok(PolarGrid {
            radial_order,
            angular_points,
            z_max,
            radii,
            radial_weights,
        })
    }

    fn angular_weight(&self) -> f64 {
        2.0 / self.angular_points as f64
    }

    fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.angular_points as f64
    }

    /// All nodes and weights, radius-major.
    pub fn nodes(&self) -> Vec<(Complex64, f64)> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angular_points);
        for (r, wr) in self.radii.iter().zip(&self.radial_weights) {
            for k in 0..self.angular_points {
                out.push((Complex64::from_polar(*r, self.angle(k)), wr * self.angular_weight()));
            }
        }
        out
    }

    /// `∫ s(|z|²) |z⟩⟨z| d²z/π` on occupations `0..=n_max`.
    pub fn symbol_matrix(&self, n_max: usize, symbol: impl Fn(f64) -> f64) -> CMatrix {
        let mut m = CMatrix::zeros(n_max + 1, n_max + 1);
        for (z, w) in self.nodes() {
            let c = coherent_amplitudes(z, n_max);
            let s = w * symbol(z.norm_sqr());
            for j in 0..=n_max {
                for i in 0..=n_max {
                    m[(i, j)] += c[i] * c[j].conj() * s;
                }
            }
        }
        m
    }
}

/// `Q(s, x) = Γ(s, x)/Γ(s)` for integer `s ≥ 1`.
fn upper_gamma_regularized(s: usize, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut sum = term;
    for j in 1..s {
        term *= x / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Bound on `∫_{|z| > z_max} |s(|z|²)| |⟨m|z⟩|² d²z/π` for a polynomial
/// symbol `s(t) = Σ c_k t^k`.
pub fn disc_tail_bound(m: usize, z_max: f64, coeffs: &[f64]) -> f64 {
    let x = z_max * z_max;
    let mut total = 0.0;
    let mut rising = 1.0; // (m+k)!/m!
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            rising *= (m + k) as f64;
        }
        total += c.abs() * rising * upper_gamma_regularized(m + k + 1, x);
    }
    total
}

/// Largest occupation `m ≤ n_max` (if any) such that every `m' ≤ m` has a
/// disc tail below `tol/10` for each of the symbols.
pub fn faithful_occupation(n_max: usize, z_max: f64, symbols: &[&[f64]], tol: f64) -> Option<usize> {
    let mut last = None;
    for m in 0..=n_max {
        if symbols.iter().all(|c| disc_tail_bound(m, z_max, c) <= 0.1 * tol) {
            last = Some(m);
        } else {
            break;
        }
    }
    last
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolReport {
    pub nu: f64,
    /// Occupations `0..=faithful_max` form the checked subspace.
    pub faithful_max: usize,
    pub identity_deviation: f64,
    pub number_deviation: f64,
    pub number_squared_deviation: f64,
}

impl SymbolReport {
    pub fn max_deviation(&self) -> f64 {
        self.identity_deviation
            .max(self.number_deviation)
            .max(self.number_squared_deviation)
    }
}

/// Quadrature check of `∫ |z⟩⟨z| = 1`, `∫ (|z|² − 1)|z⟩⟨z| = a₀*a₀` and
/// `∫ ((|z|²+ν)² − 3(|z|²+ν) + ν + 1)|z⟩⟨z| = (a₀*a₀ + ν)²`, compared
/// elementwise on the occupations whose disc tails stay below `tol/10`.
pub fn upper_symbol_check(grid: &PolarGrid, n_max: usize, nu: f64, tol: f64) -> Result<SymbolReport> {
    let one = [1.0];
    let num = [-1.0, 1.0];
    let sq = [(nu - 1.0) * (nu - 1.0), 2.0 * nu - 3.0, 1.0];
    let faithful_max = faithful_occupation(n_max, grid.z_max, &[&one, &num, &sq], tol)
        .ok_or(Error::QuadratureNotConverged { mass: 0.0, tol })?;
    let deviation = |symbol: &dyn Fn(f64) -> f64, target: &dyn Fn(usize) -> f64| {
        let m = grid.symbol_matrix(faithful_max, symbol);
        let mut worst: f64 = 0.0;
        for j in 0..=faithful_max {
            for i in 0..=faithful_max {
                let want = if i == j { target(i) } else { 0.0 };
                worst = worst.max((m[(i, j)] - want).norm());
            }
        }
        worst
    };
    Ok(SymbolReport {
        nu,
        faithful_max,
        identity_deviation: deviation(&|_| 1.0, &|_| 1.0),
        number_deviation: deviation(&|t| t - 1.0, &|m| m as f64),
        number_squared_deviation: deviation(&|t| (t + nu) * (t + nu) - 3.0 * (t + nu) + nu + 1.0, &|m| {
            (m as f64 + nu) * (m as f64 + nu)
        }),
    })
}

/// Lower symbol `ζ(z) = tr⟨z|Γ|z⟩` of a state and the conditional states
/// `Γ_z = ⟨z|Γ|z⟩/ζ(z)` on the remaining modes, sampled on a polar grid.
#[derive(Clone, Debug)]
pub struct LowerSymbol {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
    /// Conditional states over [`Self::rest_configs`].
    pub conditional: Vec<CMatrix>,
    /// Occupations of the non-zero modes indexing the conditional states.
    pub rest_configs: Vec<Vec<u32>>,
}

impl LowerSymbol {
    /// `∫ ζ(z) d²z/π`.
    pub fn mass(&self) -> f64 {
        self.density.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// `−∫ ζ ln ζ d²z/π`.
    pub fn classical_entropy(&self) -> f64 {
        classical_entropy(&self.density, &self.weights)
    }

    /// `∫ S(Γ_z) ζ(z) d²z/π`.
    pub fn mean_conditional_entropy(&self) -> f64 {
        self.conditional
            .iter()
            .zip(self.density.iter().zip(&self.weights))
            .filter(|(_, (&f, _))| f > 0.0)
            .map(|(g, (&f, &w))| w * f * von_neumann_of_spectrum(&hermitian_eigenvalues(g)))
            .sum()
    }
}

/// Samples the lower symbol of `state` with respect to the zero mode. Fails
/// with `QuadratureNotConverged` when the sampled mass differs from one by
/// more than `mass_tol`.
pub fn lower_symbol(state: &StateMatrix, basis: &FockBasis, grid: &PolarGrid, mass_tol: f64) -> Result<LowerSymbol> {
    if state.fingerprint() != basis.fingerprint() {
        return Err(Error::BasisMismatch);
    }
    let k0 = basis.mode_index(&Mode::ZERO)?;
    let n_max = basis.n_max() as usize;

    let mut rest_configs: Vec<Vec<u32>> = Vec::new();
    let mut rest_of = Vec::with_capacity(basis.dim());
    let mut lookup = std::collections::HashMap::new();
    for i in 0..basis.dim() {
        let mut rest = basis.state(i).to_vec();
        rest.remove(k0);
        let r = *lookup.entry(rest.clone()).or_insert_with(|| {
            rest_configs.push(rest);
            rest_configs.len() - 1
        });
        rest_of.push(r);
    }
    let nr = rest_configs.len();
    let occ0: Vec<usize> = (0..basis.dim()).map(|i| basis.state(i)[k0] as usize).collect();

    // For |z| = ρ, ⟨z|Γ|z⟩ = e^{−ρ²} Σ_k e^{ikθ} F_k(ρ) with
    // F_k = Σ_{m' − m = k} ρ^{m+m'} / √(m! m'!) Γ[(m, ·), (m', ·)].
    let ln_fact: Vec<f64> = (0..=n_max)
        .scan(0.0, |acc, n| {
            if n > 0 {
                *acc += (n as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let rho_m = state.matrix();
    let span = 2 * n_max + 1;
    let (mut nodes, mut weights, mut density, mut conditional) = (vec![], vec![], vec![], vec![]);
    let angular_weight = grid.angular_weight();
    for (&r, &wr) in grid.radii.iter().zip(&grid.radial_weights) {
        let ln_r = r.ln();
        let mut f = vec![CMatrix::zeros(nr, nr); span];
        for j in 0..basis.dim() {
            for i in 0..basis.dim() {
                let g = rho_m[(i, j)];
                if g == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (m, mp) = (occ0[i], occ0[j]);
                let scale = ((m + mp) as f64 * ln_r - 0.5 * (ln_fact[m] + ln_fact[mp]) - r * r).exp();
                f[mp + n_max - m][(rest_of[i], rest_of[j])] += g * scale;
            }
        }
        for a in 0..grid.angular_points {
            let theta = grid.angle(a);
            let mut g = CMatrix::zeros(nr, nr);
            for (idx, fk) in f.iter().enumerate() {
                let k = idx as f64 - n_max as f64;
                g += fk * Complex64::from_polar(1.0, k * theta);
            }
            let zeta = crate::linalg::trace(&g).re;
            nodes.push(Complex64::from_polar(r, theta));
            weights.push(wr * angular_weight);
            density.push(zeta.max(0.0));
            if zeta > 0.0 {
                g /= Complex64::new(zeta, 0.0);
                g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
            }
            conditional.push(g);
        }
    }
    let sym = LowerSymbol {
        nodes,
        weights,
        density,
        conditional,
        rest_configs,
    };
    let mass = sym.mass();
    if (mass - 1.0).abs() > mass_tol {
        return Err(Error::QuadratureNotConverged { mass, tol: mass_tol });
    }
    Ok(sym)
}
