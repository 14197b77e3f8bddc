//! Dense complex matrix helpers.
//!
//! Layout convention: a composite space `H₁ ⊗ H₂ ⊗ … ⊗ Hₙ` with factor
//! dimensions `[d₁, …, dₙ]` is indexed in row-major (big-endian) order, i.e.
//! the left factor varies slowest. The basis vector `|i₁ … iₙ⟩` has index
//! `((i₁·d₂ + i₂)·d₃ + i₃)…`. Every operator in this crate, every file
//! format, and every partial trace follows this convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix with double-precision entries.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Kronecker product `a ⊗ b` with the left factor varying slowest.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::from_element(1, 1, ONE), |acc, f| tensor(&acc, f))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Matrix unit `|i⟩⟨j|` of size `n × m`.
pub fn unit(n: usize, m: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(n, m);
    e[(i, j)] = ONE;
    e
}

/// Basis ket `|i⟩` as an `n × 1` matrix.
pub fn ket(n: usize, i: usize) -> ComplexMatrix {
    unit(n, 1, i, 0)
}

/// `|v⟩⟨v|`.
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry modulus of `m - m†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// This is the one spectral kernel in the crate; norms, square roots and
/// positivity checks all route through it. Only the Hermitian part of `m`
/// is used.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (DVector<f64>, ComplexMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> DVector<f64> {
    hermitian_eigen(m).0
}

/// Rebuild `Σ f(λ_k) |v_k⟩⟨v_k|` from an eigendecomposition.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for k in 0..n {
        let w = f(values[k]);
        scaled.column_mut(k).scale_mut(w);
    }
    scaled * vectors.adjoint()
}

/// Trace norm `Σ |λ_k|` of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// Largest eigenvalue modulus of a Hermitian matrix.
pub fn spectral_radius(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()))
}

/// Largest singular value of an arbitrary (possibly rectangular) matrix,
/// computed as the square root of the top eigenvalue of `m† m`.
pub fn singular_norm(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram)
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l))
        .max(0.0)
        .sqrt()
}

/// Factor bookkeeping shared by partial traces and permutations.
fn split_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
    digits
}

fn join_index(digits: impl IntoIterator<Item = usize>, dims: impl IntoIterator<Item = usize>) -> usize {
    digits
        .into_iter()
        .zip(dims)
        .fold(0, |acc, (i, d)| acc * d + i)
}

fn check_factor_dims(n: usize, dims: &[usize], context: &str) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::Invalid(format!("{context}: zero factor dimension")));
    }
    let product: usize = dims.iter().product();
    if product != n {
        return Err(Error::dims(context, n, product));
    }
    Ok(())
}

/// Partial trace of a square matrix over every factor not listed in `keep`.
///
/// Kept factors stay in their original relative order regardless of the
/// order of `keep`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::dims("partial trace (square input)", m.nrows(), m.ncols()));
    }
    check_factor_dims(m.nrows(), dims, "partial trace factor dims")?;
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Invalid(format!(
            "partial trace: factor index {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| keep.contains(k)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let n_out: usize = kept_dims.iter().product();

    let n = m.nrows();
    let coords: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let digits = split_index(i, dims);
            let k = join_index(kept.iter().map(|&f| digits[f]), kept_dims.iter().copied());
            let t = join_index(traced.iter().map(|&f| digits[f]), traced_dims.iter().copied());
            (k, t)
        })
        .collect();

    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for i in 0..n {
        let (ki, ti) = coords[i];
        for j in 0..n {
            let (kj, tj) = coords[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Permutation matrix `P` with `P (v₀ ⊗ … ⊗ vₙ₋₁) = v_{perm[0]} ⊗ … ⊗ v_{perm[n-1]}`.
pub fn factor_permutation(dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(Error::dims("factor permutation length", dims.len(), perm.len()));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let n: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut p = ComplexMatrix::zeros(n, n);
    for old in 0..n {
        let digits = split_index(old, dims);
        let new = join_index(perm.iter().map(|&f| digits[f]), new_dims.iter().copied());
        p[(new, old)] = ONE;
    }
    Ok(p)
}

/// Reorder the tensor factors of a square operator: factor `k` of the result
/// is factor `perm[k]` of the input.
pub fn permute_factors(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_factor_dims(m.nrows(), dims, "permute factors")?;
    let p = factor_permutation(dims, perm)?;
    Ok(&p * m * p.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: u64) -> ComplexMatrix {
        // Small deterministic LCG; keeps this module free of rand.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ComplexMatrix::from_fn(n, m, |_, _| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            c(next(), next())
        })
    }

    #[test]
    fn identity_tensor_identity() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn projector_tensor_is_block_diagonal() {
        let a = sample(2, 2, 3);
        let p0 = unit(2, 2, 0, 0);
        let t = tensor(&p0, &a);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i < 2 && j < 2 { a[(i, j)] } else { ZERO };
                assert_eq!(t[(i, j)], expected);
            }
        }
    }

    #[test]
    fn tensor_matches_index_loop() {
        let a = sample(2, 2, 11);
        let b = sample(2, 2, 12);
        let t = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(t[(i * 2 + k, j * 2 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = identity(6);
        assert!(matches!(
            partial_trace_matrix(&m, &[2, 2], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace_matrix(&m, &[2, 3], &[2]).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = sample(2, 2, 1);
        let b = sample(3, 3, 2);
        let ab = tensor(&a, &b);
        let left = partial_trace_matrix(&ab, &[2, 3], &[0]).unwrap();
        let right = partial_trace_matrix(&ab, &[2, 3], &[1]).unwrap();
        assert!(max_abs_diff(&left, &a.scale(1.0).map(|z| z * trace(&b))) < 1e-12);
        assert!(max_abs_diff(&right, &b.map(|z| z * trace(&a))) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let m = sample(4, 4, 9);
        let reduced = partial_trace_matrix(&m, &[2, 2], &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = ZERO;
                for k in 0..2 {
                    s += m[(i * 2 + k, j * 2 + k)];
                }
                assert!((reduced[(i, j)] - s).norm() < 1e-14);
            }
        }
        let reduced = partial_trace_matrix(&m, &[2, 2], &[1]).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let mut s = ZERO;
                for i in 0..2 {
                    s += m[(i * 2 + k, i * 2 + l)];
                }
                assert!((reduced[(k, l)] - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn full_and_empty_keep() {
        let m = sample(12, 12, 5);
        let all = partial_trace_matrix(&m, &[2, 3, 2], &[0, 1, 2]).unwrap();
        assert!(max_abs_diff(&all, &m) < 1e-15);
        let none = partial_trace_matrix(&m, &[2, 3, 2], &[]).unwrap();
        assert!((none[(0, 0)] - trace(&m)).norm() < 1e-12);
    }

    #[test]
    fn permutation_swaps_product_factors() {
        let a = sample(2, 2, 21);
        let b = sample(3, 3, 22);
        let swapped = permute_factors(&tensor(&a, &b), &[2, 3], &[1, 0]).unwrap();
        assert!(max_abs_diff(&swapped, &tensor(&b, &a)) < 1e-15);
        assert!(factor_permutation(&[2, 3], &[0, 0]).is_err());
    }

    #[test]
    fn eigen_reconstructs_input() {
        let a = sample(5, 5, 77);
        let h = &a + a.adjoint();
        let (values, vectors) = hermitian_eigen(&h);
        let diag = ComplexMatrix::from_diagonal(&values.map(|v| c(v, 0.0)));
        let rebuilt = &vectors * diag * vectors.adjoint();
        assert!(max_abs_diff(&rebuilt, &h) < 1e-9);
        assert!(values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn singular_norm_of_isometry_is_one() {
        let v = ComplexMatrix::from_fn(4, 2, |i, j| if i == j { ONE } else { ZERO });
        assert!((singular_norm(&v) - 1.0).abs() < 1e-12);
    }
}
