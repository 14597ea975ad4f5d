use num_complex::Complex64;

use super::basis::FockBasis;
use crate::error::{Error, Result};
use crate::lattice::Mode;
use crate::linalg::{hermiticity_defect, max_abs, trace, trace_product, CMatrix, HermitianEigen};

/// A dense operator on a [`FockBasis`], tagged with the basis fingerprint.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    fingerprint: u64,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn zeros(basis: &FockBasis) -> Self {
        OperatorMatrix {
            fingerprint: basis.fingerprint(),
            matrix: CMatrix::zeros(basis.dim(), basis.dim()),
        }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        OperatorMatrix {
            fingerprint: basis.fingerprint(),
            matrix: CMatrix::identity(basis.dim(), basis.dim()),
        }
    }

    pub fn from_matrix(basis: &FockBasis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(OperatorMatrix {
            fingerprint: basis.fingerprint(),
            matrix,
        })
    }

    /// Diagonal operator with entries `f(occupation)`.
    pub fn diagonal(basis: &FockBasis, f: impl Fn(&[u32]) -> f64) -> Self {
        let mut op = Self::zeros(basis);
        for i in 0..basis.dim() {
            op.matrix[(i, i)] = Complex64::new(f(basis.state(i)), 0.0);
        }
        op
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn check_basis(&self, basis: &FockBasis) -> Result<()> {
        if self.fingerprint != basis.fingerprint() || self.dim() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    fn same_basis(&self, other: &Self) -> Result<()> {
        if self.fingerprint != other.fingerprint || self.dim() != other.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: &self.matrix * Complex64::new(c, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            fingerprint: self.fingerprint,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// A density matrix on a [`FockBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateMatrix {
    fingerprint: u64,
    matrix: CMatrix,
}

/// Tolerance for the trace, hermiticity and positivity checks on states.
pub const STATE_TOL: f64 = 1e-12;

impl StateMatrix {
    /// Validates hermiticity, unit trace and positivity to [`STATE_TOL`].
    pub fn new(basis: &FockBasis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        let defect = hermiticity_defect(&matrix);
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {defect:e}")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = crate::linalg::hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min:e}")));
        }
        Ok(StateMatrix {
            fingerprint: basis.fingerprint(),
            matrix,
        })
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn normalized(basis: &FockBasis, matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("nonpositive trace {tr}")));
        }
        let m = (&matrix + matrix.adjoint()) * Complex64::new(0.5 / tr, 0.0);
        Self::new(basis, m)
    }

    pub(crate) fn trusted(basis: &FockBasis, matrix: CMatrix) -> Self {
        StateMatrix {
            fingerprint: basis.fingerprint(),
            matrix,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `tr[A Γ]`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if op.fingerprint() != self.fingerprint || op.dim() != self.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(trace_product(op.matrix(), &self.matrix))
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix)
    }

    /// `-tr Γ ln Γ` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        super::entropy::von_neumann_of_spectrum(&crate::linalg::hermitian_eigenvalues(&self.matrix))
    }
}

/// `a_p` (or `a_p*` when `create`), with matrix elements pushing a state out
/// of the caps dropped.
pub fn ladder(p: &Mode, basis: &FockBasis, create: bool) -> Result<OperatorMatrix> {
    let k = basis.mode_index(p)?;
    let mut op = OperatorMatrix::zeros(basis);
    for j in 0..basis.dim() {
        if let Some((i, amp)) = basis.apply_normal_ordered(j, &[], &[k]) {
            let (r, c) = if create { (j, i) } else { (i, j) };
            op.matrix[(r, c)] = Complex64::new(amp, 0.0);
        }
    }
    Ok(op)
}

/// The total number operator.
pub fn number(basis: &FockBasis) -> OperatorMatrix {
    OperatorMatrix::diagonal(basis, |s| s.iter().sum::<u32>() as f64)
}

/// `a_p* a_p`.
pub fn mode_number(p: &Mode, basis: &FockBasis) -> Result<OperatorMatrix> {
    let k = basis.mode_index(p)?;
    Ok(OperatorMatrix::diagonal(basis, |s| s[k] as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_modes() -> FockBasis {
        FockBasis::new(vec![Mode::ZERO, Mode::new(1, 0, 0)], 4, 5).unwrap()
    }

    #[test]
    fn single_mode_matrix_elements() {
        let b = FockBasis::new(vec![Mode::ZERO], 6, 6).unwrap();
        let a = ladder(&Mode::ZERO, &b, false).unwrap();
        for n in 1..=6 {
            assert!((a.matrix()[(n - 1, n)].re - (n as f64).sqrt()).abs() < 1e-15);
        }
        let vac = a.matrix().column(0);
        assert!(vac.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn creation_is_adjoint() {
        let b = two_modes();
        for p in b.modes().to_vec() {
            let a = ladder(&p, &b, false).unwrap();
            let ad = ladder(&p, &b, true).unwrap();
            assert_eq!(a.adjoint(), ad);
        }
    }

    #[test]
    fn ccr_on_cap_safe_states() {
        let b = two_modes();
        let modes = b.modes().to_vec();
        for (ip, p) in modes.iter().enumerate() {
            for (iq, q) in modes.iter().enumerate() {
                let a = ladder(p, &b, false).unwrap();
                let ad = ladder(q, &b, true).unwrap();
                let comm = a.commutator(&ad).unwrap();
                for j in (0..b.dim()).filter(|&j| b.is_cap_safe(j)) {
                    for i in 0..b.dim() {
                        let want = if i == j && ip == iq { 1.0 } else { 0.0 };
                        assert!((comm.matrix()[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let b1 = two_modes();
        let b2 = FockBasis::new(vec![Mode::ZERO, Mode::new(1, 0, 0)], 4, 4).unwrap();
        assert_eq!(number(&b1).add(&number(&b2)), Err(Error::BasisMismatch));
    }

    #[test]
    fn state_validation() {
        let b = FockBasis::new(vec![Mode::ZERO], 1, 1).unwrap();
        let bad = CMatrix::from_diagonal_element(2, 2, Complex64::new(0.7, 0.0));
        assert!(matches!(StateMatrix::new(&b, bad), Err(Error::InvalidState(_))));
        let ok = StateMatrix::normalized(&b, CMatrix::identity(2, 2)).unwrap();
        assert!((ok.entropy() - 2f64.ln()).abs() < 1e-15);
    }
}
