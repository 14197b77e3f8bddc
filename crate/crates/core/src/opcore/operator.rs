use num_complex::Complex64;

use super::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

/// Hermiticity tolerance, max-entry metric.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = 1e-9;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-9;

/// A Hermitian operator on a `dim`-dimensional space.
///
/// The stored matrix is exactly Hermitian: on construction the input is
/// checked against [`HERMITIAN_TOL`] and then replaced by `(m + m†)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(ComplexMatrix);

impl Hermitian {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims("Hermitian operator (square)", m.nrows(), m.ncols()));
        }
        linalg::check_finite(&m)?;
        let deviation = linalg::hermiticity_defect(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the Hermitian part of `m` without any tolerance check.
    pub fn symmetrized(m: ComplexMatrix) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        Hermitian(h)
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(linalg::identity(dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Hermitian(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                linalg::c(diag[i], 0.0)
            } else {
                linalg::ZERO
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.0).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.0).iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm(&self.0)
    }

    /// `Re Tr[self · other]`, which is the full trace for Hermitian pairs.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        self.0
            .iter()
            .zip(other.0.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale(s))
    }

    pub fn add(&self, other: &Hermitian) -> Result<Hermitian> {
        self.same_dim(other, "Hermitian sum")?;
        Ok(Hermitian(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Hermitian) -> Result<Hermitian> {
        self.same_dim(other, "Hermitian difference")?;
        Ok(Hermitian(&self.0 - &other.0))
    }

    pub fn tensor(&self, other: &Hermitian) -> Hermitian {
        Hermitian(linalg::tensor(&self.0, &other.0))
    }

    /// Entrywise complex conjugate (equivalently, the transpose).
    pub fn conj(&self) -> Hermitian {
        Hermitian(self.0.map(|z| z.conj()))
    }

    /// Clips negative eigenvalues to zero.
    pub fn positive_part(&self) -> Hermitian {
        Hermitian::symmetrized(linalg::spectral_map(&self.0, |l| l.max(0.0)))
    }

    /// Principal square root of the positive part.
    pub fn sqrt_psd(&self) -> Hermitian {
        Hermitian::symmetrized(linalg::spectral_map(&self.0, |l| l.max(0.0).sqrt()))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    fn same_dim(&self, other: &Hermitian, context: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::dims(context, self.dim(), other.dim()));
        }
        Ok(())
    }
}

/// A density operator: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Hermitian);

impl DensityOperator {
    pub fn new(op: Hermitian) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace });
        }
        let min_eigenvalue = op.min_eigenvalue();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityOperator(op))
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(Hermitian::new(m)?)
    }

    /// Closest valid state in the sense used for numerically produced
    /// operators: negative eigenvalues clipped, then renormalized.
    ///
    /// Falls back to the maximally mixed state if nothing positive remains.
    pub fn nearest(op: &Hermitian) -> Self {
        let pos = op.positive_part();
        let t = pos.trace();
        if t <= f64::EPSILON {
            return Self::maximally_mixed(op.dim());
        }
        DensityOperator(pos.scale(1.0 / t))
    }

    pub fn pure(v: &linalg::ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Invalid("pure state from zero vector".into()));
        }
        let u = v.unscale(norm);
        Ok(DensityOperator(Hermitian::symmetrized(linalg::projector(&u))))
    }

    /// `|i⟩⟨i|` in the computational basis.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        DensityOperator(Hermitian(linalg::unit(dim, dim, i, i)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator(Hermitian::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn op(&self) -> &Hermitian {
        &self.0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator(self.0.tensor(&other.0))
    }
}

/// Partial trace keeping the listed factors (in their original order).
pub fn partial_trace(op: &Hermitian, dims: &[usize], keep: &[usize]) -> Result<Hermitian> {
    let m = linalg::partial_trace_matrix(op.matrix(), dims, keep)?;
    Ok(Hermitian::symmetrized(m))
}

/// Helstrom distinguishability `½‖ρ₁ − ρ₂‖₁`.
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    let diff = rho1.op().sub(rho2.op())?;
    Ok((0.5 * diff.trace_norm()).clamp(0.0, 1.0))
}

/// Operator norm: largest eigenvalue modulus.
pub fn operator_norm(op: &Hermitian) -> f64 {
    linalg::spectral_radius(op.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::linalg::{c, max_abs_diff, tensor};
    use nalgebra::DVector;

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = linalg::identity(2);
        m[(1, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(Hermitian::new(m), Err(Error::NonFinite { row: 1, col: 1 })));
    }

    #[test]
    fn density_checks() {
        assert!(matches!(
            DensityOperator::new(Hermitian::identity(2)),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            DensityOperator::new(Hermitian::from_real_diagonal(&[1.5, -0.5])),
            Err(Error::NotPositive { .. })
        ));
        assert!(DensityOperator::new(Hermitian::from_real_diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn nearest_repairs_small_defects() {
        let h = Hermitian::from_real_diagonal(&[1.0 + 1e-6, -1e-6]);
        let rho = DensityOperator::nearest(&h);
        assert!((rho.op().trace() - 1.0).abs() < 1e-14);
        assert!(rho.op().min_eigenvalue() >= 0.0);
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = DensityOperator::new(Hermitian::from_real_diagonal(&[0.3, 0.7])).unwrap();
        let sigma = DensityOperator::maximally_mixed(3);
        let joint = rho.tensor(&sigma);
        let reduced = partial_trace(joint.op(), &[2, 3], &[0]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_bell_state_is_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let phi = DVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let bell = DensityOperator::pure(&phi).unwrap();
        let reduced = partial_trace(bell.op(), &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let plus = DensityOperator::pure(&DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        // |0⟩⟨0| − |+⟩⟨+| = [[1/2, -1/2], [-1/2, -1/2]], eigenvalues ±1/√2.
        assert!((trace_distance(&zero, &plus).unwrap() - (0.5f64).sqrt()).abs() < 1e-12);
        assert!(trace_distance(&zero, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&Hermitian::identity(3)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&Hermitian::from_real_diagonal(&[3.0, -1.0])) - 3.0).abs() < 1e-14);
        assert!((operator_norm(&Hermitian::from_real_diagonal(&[1.0, -4.0])) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_of_identity_states() {
        let a = DensityOperator::maximally_mixed(2);
        let b = DensityOperator::maximally_mixed(2);
        let ab = a.tensor(&b);
        assert!(max_abs_diff(ab.matrix(), &tensor(a.matrix(), b.matrix())) < 1e-15);
        assert!(max_abs_diff(ab.matrix(), DensityOperator::maximally_mixed(4).matrix()) < 1e-15);
    }
}
