use serde::{Deserialize, Serialize};

use crate::channels::StinespringIsometry;
use crate::opcore::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMethod {
    Procrustes,
    Identity,
}

/// An environment unitary `U` together with `‖(1 ⊗ U)V₁ − V₂‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryAlignment {
    pub u: ComplexMatrix,
    pub achieved: f64,
    pub method: AlignmentMethod,
}

/// Aligns the environments of two dilations. Both are padded to the larger
/// environment; `U` is the polar factor of their cross-Gram matrix unless the
/// identity does better in operator norm.
pub fn align_isometries(v1: &StinespringIsometry, v2: &StinespringIsometry) -> Result<IsometryAlignment> {
    if v1.dim_in() != v2.dim_in() {
        return Err(Error::dims("isometry input", v1.dim_in(), v2.dim_in()));
    }
    if v1.dim_out() != v2.dim_out() {
        return Err(Error::dims("isometry output", v1.dim_out(), v2.dim_out()));
    }
    let env = v1.dim_env().max(v2.dim_env());
    let (dout, din) = (v1.dim_out(), v1.dim_in());
    let a = v1.padded(env)?;
    let b = v2.padded(env)?;
    let (a, b) = (a.matrix(), b.matrix());

    let mut gram = ComplexMatrix::zeros(env, env);
    for o in 0..dout {
        for e in 0..env {
            for f in 0..env {
                for i in 0..din {
                    gram[(e, f)] += a[(o * env + e, i)] * b[(o * env + f, i)].conj();
                }
            }
        }
    }
    let svd = gram.svd(true, true);
    let (p, qh) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let procrustes = qh.adjoint() * p.adjoint();

    let residual = |u: &ComplexMatrix| linalg::singular_norm(&(linalg::tensor(&linalg::identity(dout), u) * a - b));
    let identity = linalg::identity(env);
    let (rp, ri) = (residual(&procrustes), residual(&identity));
    Ok(if rp <= ri {
        IsometryAlignment { u: procrustes, achieved: rp, method: AlignmentMethod::Procrustes }
    } else {
        IsometryAlignment { u: identity, achieved: ri, method: AlignmentMethod::Identity }
    })
}
