//! Operational distinguishability of finite-dimensional quantum channels.
//!
//! The distinguishability `δ(E₁, E₂)` of two channels is half their diamond-norm
//! distance: the optimal bias of any test that tries to tell them apart, including
//! tests with entangled reference systems. It is computed here by a dense
//! primal–dual interior-point SDP solver and then used to evaluate measurement
//! error, disturbance, and the uncertainty relations that tie them to the
//! complementarity of two observables.
//!
//! Module map:
//!
//! * [`opcore`]: complex dense linear algebra, Hermitian/density operators, observables.
//! * [`channels`]: CPTP maps in Kraus form, Choi and Stinespring forms, apparatuses.
//! * [`sdp`]: the interior-point solver and the distance formulations built on it.
//! * [`uncertainty`]: errors, disturbance, complementarity constants and verifiers.
//! * [`cli`]: file schemas and command implementations behind the `opdist` binary.

pub mod channels;
pub mod cli;
mod error;
pub mod opcore;
pub mod random;
pub mod sdp;
pub mod uncertainty;

pub use error::{Error, Result};
