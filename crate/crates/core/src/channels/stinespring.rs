use crate::opcore::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

use super::channel::QuantumChannel;

/// Isometry tolerance on `‖V†V − 1‖_max`.
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Stinespring isometry `V : H_in → H_out ⊗ H_env`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringIsometry {
    v: ComplexMatrix,
    dim_out: usize,
    dim_env: usize,
}

impl StinespringIsometry {
    pub fn new(v: ComplexMatrix, dim_out: usize, dim_env: usize) -> Result<Self> {
        if v.nrows() != dim_out * dim_env {
            return Err(Error::dims("Stinespring isometry rows", dim_out * dim_env, v.nrows()));
        }
        linalg::check_finite(&v)?;
        let defect = linalg::max_abs_diff(&(v.adjoint() * &v), &linalg::identity(v.ncols()));
        if defect > ISOMETRY_TOL {
            return Err(Error::NotTracePreserving { deviation: defect });
        }
        Ok(Self { v, dim_out, dim_env })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim_in(&self) -> usize {
        self.v.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    /// Row block `(1_out ⊗ ⟨e|) V`.
    fn env_slice(&self, e: usize) -> ComplexMatrix {
        let din = self.dim_in();
        ComplexMatrix::from_fn(self.dim_out, din, |o, i| self.v[(o * self.dim_env + e, i)])
    }

    /// Row block `(⟨o| ⊗ 1_env) V`.
    fn out_slice(&self, o: usize) -> ComplexMatrix {
        let din = self.dim_in();
        ComplexMatrix::from_fn(self.dim_env, din, |e, i| self.v[(o * self.dim_env + e, i)])
    }

    /// `ρ ↦ Tr_env[VρV†]`.
    pub fn channel(&self) -> QuantumChannel {
        let kraus = (0..self.dim_env).map(|e| self.env_slice(e)).collect();
        QuantumChannel::from_kraus_unchecked(kraus).expect("isometry slices share a shape")
    }

    /// `ρ ↦ Tr_out[VρV†]`.
    pub fn complement(&self) -> QuantumChannel {
        let kraus = (0..self.dim_out).map(|o| self.out_slice(o)).collect();
        QuantumChannel::from_kraus_unchecked(kraus).expect("isometry slices share a shape")
    }

    /// Embeds the environment into a larger one of dimension `dim_env`
    /// (`|e⟩ ↦ |e⟩`), leaving both the channel and its complement's
    /// information content unchanged.
    pub fn padded(&self, dim_env: usize) -> Result<StinespringIsometry> {
        if dim_env < self.dim_env {
            return Err(Error::dims("environment padding", self.dim_env, dim_env));
        }
        let din = self.dim_in();
        let mut v = ComplexMatrix::zeros(self.dim_out * dim_env, din);
        for o in 0..self.dim_out {
            for e in 0..self.dim_env {
                for i in 0..din {
                    v[(o * dim_env + e, i)] = self.v[(o * self.dim_env + e, i)];
                }
            }
        }
        Ok(StinespringIsometry {
            v,
            dim_out: self.dim_out,
            dim_env,
        })
    }
}

/// Canonical dilation `V = Σ_k K_k ⊗ |k⟩_E`; the environment is the Kraus
/// index space.
pub fn stinespring_of(ch: &QuantumChannel) -> StinespringIsometry {
    let env = ch.kraus().len();
    let (dout, din) = (ch.dim_out(), ch.dim_in());
    let mut v = ComplexMatrix::zeros(dout * env, din);
    for (k, kraus) in ch.kraus().iter().enumerate() {
        for o in 0..dout {
            for i in 0..din {
                v[(o * env + k, i)] = kraus[(o, i)];
            }
        }
    }
    StinespringIsometry {
        v,
        dim_out: dout,
        dim_env: env,
    }
}

/// Complementary channel of the canonical dilation: `ρ ↦ Σ_{kk'} Tr[K_k ρ K_{k'}†] |k⟩⟨k'|`.
pub fn complement_of(ch: &QuantumChannel) -> QuantumChannel {
    stinespring_of(ch).complement()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{compose, constant_channel, ideal_measurement, luders_apparatus};
    use crate::opcore::{DensityOperator, Observable};

    #[test]
    fn identity_dilation_is_trivial() {
        let v = stinespring_of(&QuantumChannel::identity(2));
        assert_eq!(v.dim_env(), 1);
        assert!(linalg::max_abs_diff(v.matrix(), &linalg::identity(2)) < 1e-15);
    }

    #[test]
    fn identity_complement_is_trace() {
        let comp = complement_of(&QuantumChannel::identity(3));
        assert_eq!(comp.dim_out(), 1);
        let expected = constant_channel(&DensityOperator::maximally_mixed(1), 3);
        assert!(comp.action_difference(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn luders_dilation_is_isometric() {
        let ch = luders_apparatus(&Observable::fourier(2)).channel().clone();
        assert_eq!(ch.kraus().len(), 2);
        let v = stinespring_of(&ch);
        assert_eq!(v.dim_env(), 2);
        let gram = v.matrix().adjoint() * v.matrix();
        assert!(linalg::max_abs_diff(&gram, &linalg::identity(2)) < 1e-12);
        assert!(StinespringIsometry::new(v.matrix().clone(), 4, 2).is_ok());
    }

    #[test]
    fn rejects_non_isometry() {
        let v = linalg::identity(2).scale(2.0);
        assert!(StinespringIsometry::new(v, 2, 1).is_err());
        assert!(StinespringIsometry::new(linalg::identity(2), 3, 1).is_err());
    }

    #[test]
    fn double_complement_recovers_channel() {
        let ch = compose(
            &QuantumChannel::depolarizing(2, 0.2).unwrap(),
            &QuantumChannel::dephasing(&Observable::fourier(2), 0.5).unwrap(),
        )
        .unwrap();
        let back = complement_of(&complement_of(&ch));
        assert!(back.action_difference(&ch).unwrap() < 1e-12);
    }

    #[test]
    fn padding_keeps_channel() {
        let ch = ideal_measurement(&Observable::fourier(2)).channel().clone();
        let v = stinespring_of(&ch);
        let padded = v.padded(5).unwrap();
        assert!(padded.channel().action_difference(&ch).unwrap() < 1e-15);
        assert!(v.padded(1).is_err());
    }
}
