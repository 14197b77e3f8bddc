//! Semidefinite programming: a dense interior-point solver and the channel
//! distance programs built on it.

mod distance;
mod problem;
mod solver;

pub use distance::{
    diamond_distance, min_constant_distance, min_measprep_distance, min_recovery_measurement, ConstantFit,
    DiamondResult, MeasPrepFit, RecoveryFit,
};
pub use problem::{Constraint, SdpProblem, SparseHermitian};
pub use solver::{solve, solve_with, SdpSolution, SolverOptions, SolverStatus};
