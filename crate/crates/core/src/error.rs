use thiserror::Error;

use crate::sdp::SolverStatus;

/// Errors raised while validating inputs or running computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator does not have unit trace (trace {trace})")]
    NotNormalized { trace: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigenvectors are not orthonormal: Gram entry ({row}, {col}) = {value:.3e}")]
    NotOrthonormal { row: usize, col: usize, value: f64 },

    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("classical register {register} carries coherence (off-diagonal mass {mass:.3e})")]
    NotClassical { register: usize, mass: f64 },

    #[error("{context}: expected {expected} items, found {found}")]
    CountMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("apparatus has no classical {0} register")]
    MissingRegister(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("SDP solver failed with status {status:?} after {iterations} iterations (gap {gap:.3e})")]
    Solver {
        status: SolverStatus,
        iterations: usize,
        gap: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }
}
