//! Measurement error, disturbance, complementarity constants and checks of
//! the uncertainty relations between them.

mod alignment;
mod constants;
mod families;
mod quantities;
mod report;
mod verify;

pub use alignment::{align_isometries, AlignmentMethod, IsometryAlignment};
pub use constants::{complementarity, ComplementarityPair};
pub use families::{family_device, sweep_row, Family, FamilyDevice, SweepRow};
pub use quantities::{disturbance, disturbance_certified, error, error_certified};
pub use report::{Relation, Sense, VerificationReport, GRACE};
pub use verify::{verify_ed, verify_jm, verify_leakage, verify_measprep, verify_sandwich};
