use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Orthonormality tolerance for eigenbases (max Gram-entry deviation).
pub const ONB_TOL: f64 = 1e-9;

/// A nondegenerate observable, held as its orthonormal eigenbasis.
///
/// Outcome `x` corresponds to the rank-one projector `|φ_x⟩⟨φ_x|`; the
/// eigenvalues themselves never enter, only the basis and the labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    eigenvectors: Vec<ComplexVector>,
    labels: Vec<String>,
}

impl Observable {
    pub fn new(eigenvectors: Vec<ComplexVector>, labels: Vec<String>) -> Result<Self> {
        let d = eigenvectors.len();
        if d == 0 {
            return Err(Error::Invalid("observable needs at least one eigenvector".into()));
        }
        if labels.len() != d {
            return Err(Error::CountMismatch {
                context: "observable labels".into(),
                expected: d,
                found: labels.len(),
            });
        }
        for v in &eigenvectors {
            if v.len() != d {
                return Err(Error::dims("observable eigenvector length", d, v.len()));
            }
            linalg::check_finite(&ComplexMatrix::from_column_slice(d, 1, v.as_slice()))?;
        }
        for i in 0..d {
            for j in 0..d {
                let g = eigenvectors[i].dotc(&eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - c(target, 0.0)).norm() > ONB_TOL {
                    return Err(Error::NotOrthonormal {
                        row: i,
                        col: j,
                        value: g.norm(),
                    });
                }
            }
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { eigenvectors, labels })
    }

    /// Eigenbasis given as the columns of a unitary matrix, labels `0..d`.
    pub fn from_columns(u: &ComplexMatrix) -> Result<Self> {
        let vectors = (0..u.ncols()).map(|k| u.column(k).into_owned()).collect();
        Self::new(vectors, default_labels(u.ncols()))
    }

    /// Computational basis `|0⟩, …, |d-1⟩`.
    pub fn computational(d: usize) -> Self {
        Self::from_columns(&linalg::identity(d)).expect("identity is orthonormal")
    }

    /// Discrete Fourier basis `|f_k⟩ = d^{-1/2} Σ_j ω^{jk} |j⟩`, `ω = e^{2πi/d}`.
    ///
    /// For `d = 2` this is the Hadamard basis `|±⟩`.
    pub fn fourier(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let u = ComplexMatrix::from_fn(d, d, |j, k| {
            let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
            c(s * phase.cos(), s * phase.sin())
        });
        Self::from_columns(&u).expect("Fourier matrix is unitary")
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn eigenvectors(&self) -> &[ComplexVector] {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, x: usize) -> &ComplexVector {
        &self.eigenvectors[x]
    }

    /// `Q(x) = |φ_x⟩⟨φ_x|`.
    pub fn projector(&self, x: usize) -> ComplexMatrix {
        linalg::projector(&self.eigenvectors[x])
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.eigenvectors)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::CountMismatch {
                context: "observable labels".into(),
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Self::new(self.eigenvectors, self.labels)
    }
}

pub fn default_labels(d: usize) -> Vec<String> {
    (0..d).map(|k| k.to_string()).collect()
}

/// Matrix of squared overlaps `|⟨φ_x|ϑ_z⟩|²`, rows indexed by `x`.
///
/// Doubly stochastic for any pair of orthonormal bases.
pub fn overlap_matrix(x: &Observable, z: &Observable) -> Result<DMatrix<f64>> {
    if x.dim() != z.dim() {
        return Err(Error::dims("overlap matrix", x.dim(), z.dim()));
    }
    let d = x.dim();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        x.eigenvector(i).dotc(z.eigenvector(j)).norm_sqr()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn shared_basis_overlap_is_identity() {
        let x = Observable::fourier(3);
        let o = overlap_matrix(&x, &x).unwrap();
        assert!((o - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn qubit_mub_overlaps_are_half() {
        let o = overlap_matrix(&Observable::computational(2), &Observable::fourier(2)).unwrap();
        assert!(o.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn qutrit_fourier_overlaps_are_third() {
        let o = overlap_matrix(&Observable::computational(3), &Observable::fourier(3)).unwrap();
        assert!(o.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_non_orthonormal() {
        let s = 1.0 / 2f64.sqrt();
        let v0 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let v1 = DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let err = Observable::new(vec![v0, v1], default_labels(2)).unwrap_err();
        assert!(matches!(err, Error::NotOrthonormal { row: 0, col: 1, .. }));
    }

    #[test]
    fn rejects_duplicate_labels_and_bad_counts() {
        let basis = Observable::computational(2);
        assert!(matches!(
            basis.clone().with_labels(vec!["a".into(), "a".into()]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(basis.with_labels(vec!["a".into()]).is_err());
        assert!(overlap_matrix(&Observable::computational(2), &Observable::computational(3)).is_err());
    }
}
