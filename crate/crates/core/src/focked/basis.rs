use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{enumerate_modes, LatticeSpec, Mode};

/// Default ceiling on the number of basis states.
pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// Occupation-number basis over a finite mode list, truncated by a per-mode
/// cap and a total-number cap.
///
/// States are ordered by total number, then in descending lexicographic
/// order of the occupation tuple, so for two modes the order starts
/// `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: Vec<Mode>,
    n_max: u32,
    total_max: u32,
    states: Vec<Box<[u32]>>,
    index: HashMap<Box<[u32]>, usize>,
    mode_index: HashMap<Mode, usize>,
    fingerprint: u64,
}

/// Number of tuples of `modes` entries in `[0, cap]` summing to `total`.
fn count_tuples(modes: usize, cap: u32, total: u32) -> u128 {
    let mut ways = vec![0u128; total as usize + 1];
    ways[0] = 1;
    for _ in 0..modes {
        let mut next = vec![0u128; total as usize + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for k in 0..=cap.min(total - t as u32) as usize {
                next[t + k] += w;
            }
        }
        ways = next;
    }
    ways[total as usize]
}

fn push_tuples(prefix: &mut Vec<u32>, modes: usize, cap: u32, remaining: u32, out: &mut Vec<Box<[u32]>>) {
    if prefix.len() == modes {
        if remaining == 0 {
            out.push(prefix.clone().into_boxed_slice());
        }
        return;
    }
    let slots_left = (modes - prefix.len() - 1) as u64;
    for k in (0..=cap.min(remaining)).rev() {
        if (remaining - k) as u64 > slots_left * cap as u64 {
            break;
        }
        prefix.push(k);
        push_tuples(prefix, modes, cap, remaining - k, out);
        prefix.pop();
    }
}

impl FockBasis {
    pub fn new(modes: Vec<Mode>, n_max: u32, total_max: u32) -> Result<Self> {
        Self::with_cap(modes, n_max, total_max, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(modes: Vec<Mode>, n_max: u32, total_max: u32, cap: usize) -> Result<Self> {
        let mode_index: HashMap<Mode, usize> = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        if mode_index.len() != modes.len() {
            return Err(invalid("basis modes must be distinct"));
        }
        let dimension: u128 = (0..=total_max).map(|t| count_tuples(modes.len(), n_max, t)).sum();
        if dimension > cap as u128 {
            return Err(Error::DimensionTooLarge {
                dimension: usize::try_from(dimension).unwrap_or(usize::MAX),
                cap,
            });
        }
        let mut states = Vec::with_capacity(dimension as usize);
        for total in 0..=total_max {
            push_tuples(
                &mut Vec::with_capacity(modes.len()),
                modes.len(),
                n_max,
                total,
                &mut states,
            );
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut h = DefaultHasher::new();
        modes.hash(&mut h);
        n_max.hash(&mut h);
        total_max.hash(&mut h);
        Ok(FockBasis {
            modes,
            n_max,
            total_max,
            states,
            index,
            mode_index,
            fingerprint: h.finish(),
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn total_max(&self) -> u32 {
        self.total_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Box<[u32]>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn mode_index(&self, p: &Mode) -> Result<usize> {
        self.mode_index.get(p).copied().ok_or(Error::UnknownMode(p.0))
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn total(&self, i: usize) -> u32 {
        self.states[i].iter().sum()
    }

    /// Whether one more particle in any mode stays inside the caps.
    pub fn is_cap_safe(&self, i: usize) -> bool {
        let s = &self.states[i];
        s.iter().sum::<u32>() < self.total_max && s.iter().all(|&n| n < self.n_max)
    }

    pub fn total_momentum(&self, i: usize) -> Mode {
        self.states[i].iter().zip(&self.modes).fold(Mode::ZERO, |acc, (&n, m)| {
            Mode([
                acc.0[0] + n as i32 * m.0[0],
                acc.0[1] + n as i32 * m.0[1],
                acc.0[2] + n as i32 * m.0[2],
            ])
        })
    }

    /// Applies `a*_{c₁} ⋯ a*_{c_k} a_{d₁} ⋯ a_{d_l}` (mode indices) to basis
    /// state `i`. Returns the image state and amplitude, or `None` if it
    /// vanishes or leaves the basis.
    pub fn apply_normal_ordered(&self, i: usize, creators: &[usize], annihilators: &[usize]) -> Option<(usize, f64)> {
        let mut occ: Vec<u32> = self.states[i].to_vec();
        let mut amp = 1.0;
        for &d in annihilators.iter().rev() {
            if occ[d] == 0 {
                return None;
            }
            amp *= (occ[d] as f64).sqrt();
            occ[d] -= 1;
        }
        for &c in creators.iter().rev() {
            occ[c] += 1;
            amp *= (occ[c] as f64).sqrt();
        }
        self.index_of(&occ).map(|j| (j, amp))
    }
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.modes == other.modes && self.states == other.states
    }
}

/// Basis over the modes of a lattice truncation, in the lattice's order.
pub fn build_basis(spec: &LatticeSpec, n_max: u32, total_max: u32) -> Result<FockBasis> {
    FockBasis::new(enumerate_modes(spec), n_max, total_max)
}

/// Summary used in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisInfo {
    pub modes: Vec<[i32; 3]>,
    pub n_max: u32,
    pub total_max: u32,
    pub dimension: usize,
}

impl From<&FockBasis> for BasisInfo {
    fn from(b: &FockBasis) -> Self {
        BasisInfo {
            modes: b.modes.iter().map(|m| m.0).collect(),
            n_max: b.n_max,
            total_max: b.total_max,
            dimension: b.dim(),
        }
    }
}
