use crate::channels::{compose, ideal_measurement, pinch, Apparatus, Outcome};
use crate::opcore::{default_labels, Observable};
use crate::sdp::{diamond_distance, min_constant_distance, ConstantFit, DiamondResult};
use crate::{Error, Result};

/// `obs` with its eigenvectors reordered to match the `role` register of `a`.
fn aligned_observable(a: &Apparatus, role: Outcome, obs: &Observable) -> Result<Observable> {
    let order = a.outcome_order(role, obs)?;
    let vectors = order.iter().map(|&k| obs.eigenvector(k).clone()).collect();
    Observable::new(vectors, default_labels(order.len()))
}

/// `δ(M_role, Q_obs)` with its diamond-norm certificates.
pub fn error_certified(a: &Apparatus, role: Outcome, obs: &Observable) -> Result<DiamondResult> {
    if a.dim_in() != obs.dim() {
        return Err(Error::dims("apparatus input vs observable", obs.dim(), a.dim_in()));
    }
    let marginal = a.outcome_channel(role)?;
    let target = aligned_observable(a, role, obs)?;
    diamond_distance(&marginal, ideal_measurement(&target).channel())
}

/// Measurement error `ε = δ(M, Q)` of the `role` register against `obs`.
pub fn error(a: &Apparatus, role: Outcome, obs: &Observable) -> Result<f64> {
    Ok(error_certified(a, role, obs)?.delta)
}

/// `(η_Z, fit)` with `η_Z = 1 − min_𝒞 δ(A∘Q_Z^♮, 𝒞)`.
pub fn disturbance_certified(a: &Apparatus, z: &Observable) -> Result<(f64, ConstantFit)> {
    if a.dim_in() != z.dim() {
        return Err(Error::dims("apparatus input vs observable", z.dim(), a.dim_in()));
    }
    let fit = min_constant_distance(&compose(a.channel(), &pinch(z))?)?;
    Ok((1.0 - fit.delta, fit))
}

/// Disturbance `η_Z` of the whole apparatus output.
pub fn disturbance(a: &Apparatus, z: &Observable) -> Result<f64> {
    Ok(disturbance_certified(a, z)?.0)
}
