//! Channels in Kraus form and the devices built from them.

mod apparatus;
mod channel;
mod choi;
mod devices;
mod stinespring;

pub use apparatus::{Apparatus, FactorKind, OutputFactor, Outcome, CLASSICAL_TOL};
pub use channel::{compose, hermitian_spanning_set, QuantumChannel, TP_TOL};
pub use choi::{choi_of, ChoiMatrix};
pub use devices::{
    conditional_preparation, constant_channel, ideal_measurement, ideal_measurement_as, joint_apparatus,
    luders_apparatus, measurement_dilation, pinch,
};
pub use stinespring::{complement_of, stinespring_of, StinespringIsometry, ISOMETRY_TOL};
