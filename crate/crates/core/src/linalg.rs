//! Dense complex Hermitian eigen-decompositions, split along the connected
//! components of the nonzero pattern so that symmetry sectors are
//! diagonalized independently.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Index sets of the connected components of the graph `i ~ j ⇔ m_ij ≠ 0`,
/// each sorted, ordered by their smallest index.
pub fn sectors(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn sub_matrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Eigenpairs of one sector.
#[derive(Clone, Debug)]
pub struct Sector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are eigenvectors in the sector's local coordinates.
    pub vectors: CMatrix,
}

/// Eigen-decomposition of a Hermitian matrix, sector by sector.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub dim: usize,
    pub sectors: Vec<Sector>,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let sectors = sectors(m)
            .into_iter()
            .map(|indices| {
                let eig = sub_matrix(m, &indices).symmetric_eigen();
                Sector {
                    values: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                    indices,
                }
            })
            .collect();
        HermitianEigen {
            dim: m.nrows(),
            sectors,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sectors.iter().flat_map(|s| s.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_value(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for s in &self.sectors {
            let n = s.indices.len();
            let scaled = CMatrix::from_fn(n, n, |i, k| s.vectors[(i, k)] * f(s.values[k]));
            let local = &scaled * s.vectors.adjoint();
            for (a, &i) in s.indices.iter().enumerate() {
                for (b, &j) in s.indices.iter().enumerate() {
                    out[(i, j)] = local[(a, b)];
                }
            }
        }
        out
    }

    /// All eigenpairs as `(value, full-length vector)`.
    pub fn pairs(&self) -> Vec<(f64, CVector)> {
        let mut out = Vec::with_capacity(self.dim);
        for s in &self.sectors {
            for (k, &value) in s.values.iter().enumerate() {
                let mut v = CVector::zeros(self.dim);
                for (a, &i) in s.indices.iter().enumerate() {
                    v[i] = s.vectors[(a, k)];
                }
                out.push((value, v));
            }
        }
        out
    }
}

/// Eigenvalues only, sector by sector, sorted ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = sectors(m)
        .iter()
        .flat_map(|idx| {
            sub_matrix(m, idx)
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect::<Vec<_>>()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `max_ij |m_ij - m_ji*|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// `tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}
