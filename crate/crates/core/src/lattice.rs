//! The momentum lattice `2πZ³`, its truncations, and Bose–Einstein occupation
//! sums over it.
//!
//! Sums over the full lattice are evaluated shell by shell (all integer
//! triples with the same `|n|²` share a term) up to a finite cutoff. Every
//! truncated sum carries a certified bound on the omitted modes, obtained by
//! comparing the lattice Gaussian `Σ e^{-a|n|²}` beyond the cutoff with an
//! integral against the lattice point counting function.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `4π²`, the kinetic energy of a mode with `|n|² = 1`.
pub const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Default relative tolerance for certified lattice tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// A lattice momentum `p = 2π n`, stored as its integer triple `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode(pub [i32; 3]);

impl Mode {
    pub const ZERO: Mode = Mode([0, 0, 0]);

    pub fn new(x: i32, y: i32, z: i32) -> Self {
        Mode([x, y, z])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// `|n|²`, the shell index.
    pub fn shell(&self) -> u64 {
        self.0.iter().map(|&c| (c as i64 * c as i64) as u64).sum()
    }

    /// `p² = 4π²|n|²`.
    pub fn momentum_sq(&self) -> f64 {
        FOUR_PI_SQ * self.shell() as f64
    }

    pub fn momentum(&self) -> [f64; 3] {
        self.0.map(|c| 2.0 * PI * c as f64)
    }

    pub fn neg(&self) -> Mode {
        Mode(self.0.map(|c| -c))
    }

    pub fn add(&self, other: &Mode) -> Mode {
        Mode([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }

    pub fn sub(&self, other: &Mode) -> Mode {
        self.add(&other.neg())
    }
}

/// A finite, inversion-symmetric truncation of `2πZ³`: all `p` with
/// `|p| ≤ cutoff_norm`, optionally without `p = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Momentum-space radius (in units where `p = 2πn`).
    pub cutoff_norm: f64,
    pub include_zero: bool,
}

impl LatticeSpec {
    pub fn new(cutoff_norm: f64, include_zero: bool) -> Self {
        LatticeSpec {
            cutoff_norm,
            include_zero,
        }
    }

    /// Only the condensate mode.
    pub fn zero_only() -> Self {
        LatticeSpec::new(0.0, true)
    }

    /// All shells with `|n|² ≤ max_shell`.
    pub fn from_shell(max_shell: u64, include_zero: bool) -> Self {
        LatticeSpec::new(2.0 * PI * (max_shell as f64).sqrt(), include_zero)
    }

    /// Largest `K` such that every `n` with `|n|² ≤ K` is inside the cutoff.
    pub fn max_shell(&self) -> u64 {
        if !(self.cutoff_norm > 0.0) {
            return 0;
        }
        let r = self.cutoff_norm / (2.0 * PI);
        // tolerate the rounding in `2π√K` round trips
        (r * r * (1.0 + 1e-12)).floor() as u64
    }

    /// Smallest shell cutoff whose omitted tail is certified below
    /// `rel_tol` relative to the truncated sum, uniformly in the chemical
    /// potential.
    ///
    /// Each Bose term satisfies `e^{-x} ≤ 1/(e^x - 1) ≤ e^{-x}/(1 - e^{-x_K})`,
    /// so the ratio tail/sum is bounded by the μ-independent ratio of the
    /// Gaussian tail to the truncated Gaussian sum.
    pub fn certified(beta: f64, rel_tol: f64, include_zero: bool) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must be positive, got {rel_tol}"
            )));
        }
        let a = beta * FOUR_PI_SQ;
        let ok = |k: u64| {
            let tail = gaussian_tail_bound(a, k + 1);
            let full = (PI / a).powf(1.5);
            let kept = full - tail - if include_zero { 0.0 } else { 1.0 };
            let kept = if include_zero {
                kept.max(1.0)
            } else {
                kept.max(6.0 * (-a).exp())
            };
            let denom = -(-(a * (k + 1) as f64)).exp_m1();
            tail / denom <= rel_tol * kept
        };
        let mut hi: u64 = 1;
        while !ok(hi) {
            hi *= 2;
            if hi > 1 << 40 {
                return Err(Error::InvalidParameter(format!(
                    "beta {beta} too small for a finite cutoff"
                )));
            }
        }
        let mut lo = hi / 2;
        // smallest K with ok(K), in (lo, hi]
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(LatticeSpec::from_shell(hi, include_zero))
    }
}

/// All modes inside the cutoff, ordered by `|p|²` then lexicographically on
/// the integer triple.
pub fn enumerate_modes(spec: &LatticeSpec) -> Vec<Mode> {
    let k = spec.max_shell();
    let m = (k as f64).sqrt().floor() as i32 + 1;
    let mut modes = Vec::new();
    for x in -m..=m {
        for y in -m..=m {
            for z in -m..=m {
                let mode = Mode::new(x, y, z);
                if mode.shell() > k || (mode.is_zero() && !spec.include_zero) {
                    continue;
                }
                modes.push(mode);
            }
        }
    }
    modes.sort_by_key(|mode| (mode.shell(), mode.0));
    modes
}

/// Number of integer triples on each shell `|n|² = k`, `k ≤ max_shell`.
pub fn shell_multiplicities(max_shell: u64) -> Vec<u64> {
    let k_max = max_shell as usize;
    let m = (max_shell as f64).sqrt().floor() as i64 + 1;
    let squares: Vec<usize> = (-m..=m).map(|c| (c * c) as usize).filter(|&s| s <= k_max).collect();
    let mut r2 = vec![0u64; k_max + 1];
    for &a in &squares {
        for &b in &squares {
            if a + b <= k_max {
                r2[a + b] += 1;
            }
        }
    }
    let mut r3 = vec![0u64; k_max + 1];
    for &c in &squares {
        for (dst, src) in r3[c..].iter_mut().zip(r2.iter()) {
            *dst += *src;
        }
    }
    r3
}

/// Certified upper bound on `Σ_{|n|² ≥ first_shell} e^{-a|n|²}` over `Z³`.
///
/// With `A(r) ≤ (4π/3)(r + √3/2)³` counting lattice points in the ball of
/// radius `r`, Abel summation gives `Σ_{|n|≥R} f(|n|) ≤ ∫_R^∞ A(r)(-f'(r)) dr`.
pub fn gaussian_tail_bound(a: f64, first_shell: u64) -> f64 {
    if first_shell == 0 {
        // the whole lattice: θ(a)³ with θ(a) ≤ 1 + √(π/a)
        return (1.0 + (PI / a).sqrt()).powi(3);
    }
    let r = (first_shell as f64).sqrt();
    let r2 = r * r;
    let e = (-a * r2).exp();
    let i1 = e / (2.0 * a);
    let i3 = e * (r2 / (2.0 * a) + 1.0 / (2.0 * a * a));
    let i5 = e * (r2 * r2 / (2.0 * a) + r2 / (a * a) + 1.0 / (a * a * a));
    let i2 = i3 / r;
    let i4 = i5 / r;
    let c = 3f64.sqrt() / 2.0;
    (8.0 / 3.0) * PI * a * (i4 + 3.0 * c * i3 + 3.0 * c * c * i2 + c * c * c * i1)
}

/// `1/(e^{β(p² - μ̃)} - 1)` for a single mode.
pub fn bose_occupation(beta: f64, mu_tilde: f64, p2: f64) -> f64 {
    1.0 / (beta * (p2 - mu_tilde)).exp_m1()
}

/// `ln(1 - e^{-x})` without cancellation at either end.
pub(crate) fn log1m_exp_neg(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

/// Ideal-gas occupation numbers at inverse temperature `beta` and chemical
/// potential `mu_tilde < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoseOccupation {
    pub beta: f64,
    pub mu_tilde: f64,
}

impl BoseOccupation {
    pub fn new(beta: f64, mu_tilde: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(mu_tilde < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "chemical potential must be negative, got {mu_tilde}"
            )));
        }
        Ok(BoseOccupation { beta, mu_tilde })
    }

    pub fn value_at(&self, p2: f64) -> f64 {
        bose_occupation(self.beta, self.mu_tilde, p2)
    }

    /// The elementary bound `1/(β(p² - μ̃))`.
    pub fn upper_bound_at(&self, p2: f64) -> f64 {
        1.0 / (self.beta * (p2 - self.mu_tilde))
    }
}

/// A truncated lattice sum together with a bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub value: f64,
    /// Upper bound on the absolute contribution of the omitted modes.
    pub tail_bound: f64,
    pub max_shell: u64,
}

impl LatticeSum {
    /// Fails unless `tail_bound ≤ rel_tol · |value|`.
    pub fn certify(self, rel_tol: f64) -> Result<Self> {
        let allowed = rel_tol * self.value.abs();
        if self.tail_bound > allowed {
            return Err(Error::TailNotConverged {
                tail: self.tail_bound,
                allowed,
                max_shell: self.max_shell,
            });
        }
        Ok(self)
    }
}

/// A mode set grouped into shells of equal `|n|²`.
///
/// Built either from a [`LatticeSpec`] (a truncation of the infinite lattice,
/// so sums report a tail bound) or from an explicit finite mode list (a
/// finite system, no tail).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeShells {
    /// `(|n|², multiplicity)` in increasing `|n|²`.
    shells: Vec<(u64, u64)>,
    /// First shell of `Z³` not included, for truncations of the full lattice.
    omitted_from: Option<u64>,
}

impl ModeShells {
    pub fn from_spec(spec: &LatticeSpec) -> Self {
        let k = spec.max_shell();
        let shells = shell_multiplicities(k)
            .into_iter()
            .enumerate()
            .filter(|&(idx, mult)| mult > 0 && (idx > 0 || spec.include_zero))
            .map(|(idx, mult)| (idx as u64, mult))
            .collect();
        ModeShells {
            shells,
            omitted_from: Some(k + 1),
        }
    }

    pub fn from_modes(modes: &[Mode]) -> Self {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for m in modes {
            *counts.entry(m.shell()).or_default() += 1;
        }
        ModeShells {
            shells: counts.into_iter().collect(),
            omitted_from: None,
        }
    }

    /// The same set without the zero mode.
    pub fn excited(&self) -> Self {
        ModeShells {
            shells: self.shells.iter().copied().filter(|&(k, _)| k > 0).collect(),
            omitted_from: self.omitted_from,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.shells.first().is_some_and(|&(k, _)| k == 0)
    }

    pub fn mode_count(&self) -> u64 {
        self.shells.iter().map(|&(_, m)| m).sum()
    }

    pub fn max_shell(&self) -> u64 {
        self.shells.last().map_or(0, |&(k, _)| k)
    }

    pub fn is_finite_system(&self) -> bool {
        self.omitted_from.is_none()
    }

    pub fn shells(&self) -> &[(u64, u64)] {
        &self.shells
    }

    /// `Σ_p f(p²)`, accumulated from the outermost shell inwards.
    pub fn sum_with(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.shells
            .iter()
            .rev()
            .map(|&(k, mult)| mult as f64 * f(FOUR_PI_SQ * k as f64))
            .sum()
    }

    /// Bound on `Σ_{omitted} e^{-β(p² - μ̃)} / (1 - e^{-x_min})`, which
    /// dominates both the omitted occupation numbers and the omitted
    /// `|ln(1 - e^{-x})|`.
    fn tail(&self, beta: f64, mu_tilde: f64) -> f64 {
        match self.omitted_from {
            None => 0.0,
            Some(first) => {
                let a = beta * FOUR_PI_SQ;
                let x_min = beta * (FOUR_PI_SQ * first as f64 - mu_tilde);
                (beta * mu_tilde).exp() * gaussian_tail_bound(a, first) / -(-x_min).exp_m1()
            }
        }
    }

    /// `Σ_p 1/(e^{β(p² - μ̃)} - 1)`.
    pub fn occupation_sum(&self, beta: f64, mu_tilde: f64) -> LatticeSum {
        LatticeSum {
            value: self.sum_with(|p2| bose_occupation(beta, mu_tilde, p2)),
            tail_bound: self.tail(beta, mu_tilde),
            max_shell: self.max_shell(),
        }
    }

    /// `Σ_p ln(1 - e^{-β(p² - μ̃)})` (not divided by β).
    pub fn log_partition_sum(&self, beta: f64, mu_tilde: f64) -> LatticeSum {
        LatticeSum {
            value: self.sum_with(|p2| log1m_exp_neg(beta * (p2 - mu_tilde))),
            tail_bound: self.tail(beta, mu_tilde),
            max_shell: self.max_shell(),
        }
    }
}

fn check_sum_args(beta: f64, mu_tilde: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(mu_tilde < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chemical potential must be negative, got {mu_tilde}"
        )));
    }
    Ok(())
}

/// `Σ_{p ∈ spec} 1/(e^{β(p² - μ̃)} - 1)`, failing if the omitted modes could
/// contribute more than `rel_tol` of the result.
pub fn bose_sum(spec: &LatticeSpec, beta: f64, mu_tilde: f64, rel_tol: f64) -> Result<LatticeSum> {
    check_sum_args(beta, mu_tilde)?;
    ModeShells::from_spec(spec)
        .occupation_sum(beta, mu_tilde)
        .certify(rel_tol)
}

/// `ζ(3/2)` by Euler–Maclaurin summation of `Σ k^{-3/2}`.
pub fn zeta_three_halves() -> f64 {
    const S: f64 = 1.5;
    const N: u32 = 64;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-S)).sum();
    let n = N as f64;
    let mut tail = n.powf(1.0 - S) / (S - 1.0) + 0.5 * n.powf(-S);
    // B_{2j}/(2j)!
    const COEFFS: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let mut rising = S; // s(s+1)...(s+2j-2)
    for (j, c) in COEFFS.iter().enumerate() {
        let order = 2 * j as i32 + 1;
        tail += c * rising * n.powf(-S - order as f64);
        rising *= (S + order as f64) * (S + order as f64 + 1.0);
    }
    head + tail
}

/// `(2π)^{-3} ∫ dp / (e^{βp²} - 1) = ζ(3/2) (4πβ)^{-3/2}`.
pub fn bose_integral(beta: f64) -> f64 {
    zeta_three_halves() * (4.0 * PI * beta).powf(-1.5)
}
