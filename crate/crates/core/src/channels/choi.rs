use crate::opcore::linalg::{self, ComplexMatrix};
use crate::opcore::{partial_trace, Hermitian, Observable};
use crate::{Error, Result};

use super::channel::QuantumChannel;

/// Choi matrix `𝙲(E) = (E ⊗ 1)(|Ω⟩⟨Ω|)` on output ⊗ input.
///
/// `|Ω⟩ = Σ_k |b_k⟩ ⊗ |b_k⟩` is unnormalized, so a trace-preserving map has
/// `Tr_out 𝙲 = 1` and `Tr 𝙲 = dim_in`. The basis `{|b_k⟩}` is recorded
/// because different bases give unitarily related, not equal, matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    op: Hermitian,
    dim_in: usize,
    dim_out: usize,
    input_basis: Observable,
}

impl ChoiMatrix {
    pub fn op(&self) -> &Hermitian {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn input_basis(&self) -> &Observable {
        &self.input_basis
    }

    /// `Tr_out 𝙲`, equal to the identity for a trace-preserving map.
    pub fn input_marginal(&self) -> Hermitian {
        partial_trace(&self.op, &[self.dim_out, self.dim_in], &[1]).expect("Choi dims are consistent")
    }

    /// Recovers a Kraus representation from the eigendecomposition of the
    /// Choi matrix; eigenvalues below `1e-12 · Tr 𝙲` are dropped.
    pub fn to_channel(&self) -> QuantumChannel {
        let (values, vectors) = linalg::hermitian_eigen(self.op.matrix());
        let (din, dout) = (self.dim_in, self.dim_out);
        // v = Σ_k K|b_k⟩ ⊗ |b_k⟩ reshapes to K·B·Bᵀ, so K = V·conj(B)·B†.
        let b = self.input_basis.basis_matrix();
        let undo = b.map(|z| z.conj()) * b.adjoint();
        let cutoff = 1e-12 * (din as f64);
        let mut kraus = Vec::new();
        for k in (0..values.len()).rev() {
            if values[k] <= cutoff {
                continue;
            }
            let v = vectors.column(k);
            let reshaped = ComplexMatrix::from_fn(dout, din, |o, i| v[o * din + i]);
            kraus.push(&reshaped * &undo * linalg::c(values[k].sqrt(), 0.0));
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(dout, din));
        }
        QuantumChannel::from_kraus_unchecked(kraus).expect("reshaped Kraus operators have consistent shape")
    }
}

/// Choi matrix of `ch` with `|Ω⟩` built from `input_basis`.
pub fn choi_of(ch: &QuantumChannel, input_basis: &Observable) -> Result<ChoiMatrix> {
    if input_basis.dim() != ch.dim_in() {
        return Err(Error::dims("Choi input basis", ch.dim_in(), input_basis.dim()));
    }
    let n = ch.dim_in();
    let mut acc = ComplexMatrix::zeros(ch.dim_out() * n, ch.dim_out() * n);
    for k in 0..n {
        for kp in 0..n {
            let e = input_basis.eigenvector(k) * input_basis.eigenvector(kp).adjoint();
            let out = ch.apply_matrix(&e)?;
            acc += linalg::tensor(&out, &e);
        }
    }
    Ok(ChoiMatrix {
        op: Hermitian::symmetrized(acc),
        dim_in: n,
        dim_out: ch.dim_out(),
        input_basis: input_basis.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{constant_channel, ideal_measurement};
    use crate::opcore::linalg::max_abs_diff;
    use crate::opcore::DensityOperator;

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let choi = QuantumChannel::identity(2).choi();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(i, j)] = linalg::ONE;
        }
        assert!(max_abs_diff(choi.matrix(), &expected) < 1e-15);
        assert!((choi.op().trace() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn measurement_choi_in_its_own_basis() {
        let x = Observable::fourier(2);
        let q = ideal_measurement(&x);
        let choi = choi_of(q.channel(), &x).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for k in 0..2 {
            expected += linalg::tensor(&linalg::unit(2, 2, k, k), &x.projector(k));
        }
        assert!(max_abs_diff(choi.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn constant_channel_choi_by_linearity() {
        let sigma = DensityOperator::from_matrix(ComplexMatrix::from_row_slice(
            2,
            2,
            &[linalg::c(0.7, 0.0), linalg::c(0.1, 0.3), linalg::c(0.1, -0.3), linalg::c(0.3, 0.0)],
        ))
        .unwrap();
        let ch = constant_channel(&sigma, 3);
        let choi = ch.choi();
        // Oracle: E(|i⟩⟨j|) = δ_ij σ, so Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j| = σ ⊗ 1.
        let mut oracle = ComplexMatrix::zeros(6, 6);
        for i in 0..3 {
            oracle += linalg::tensor(sigma.matrix(), &linalg::unit(3, 3, i, i));
        }
        assert!(max_abs_diff(choi.matrix(), &oracle) < 1e-14);
    }

    #[test]
    fn choi_basis_must_match() {
        let ch = QuantumChannel::identity(2);
        assert!(choi_of(&ch, &Observable::computational(3)).is_err());
    }

    #[test]
    fn round_trip_in_non_standard_basis() {
        let ch = QuantumChannel::depolarizing(2, 0.35).unwrap();
        let basis = Observable::fourier(2);
        let back = choi_of(&ch, &basis).unwrap().to_channel();
        assert!(back.action_difference(&ch).unwrap() < 1e-10);
    }
}
