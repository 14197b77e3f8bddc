//! Complex dense linear algebra and observable bookkeeping.

pub mod linalg;
mod observable;
mod operator;

pub use linalg::{tensor, ComplexMatrix, ComplexVector};
pub use observable::{default_labels, overlap_matrix, Observable, ONB_TOL};
pub use operator::{
    operator_norm, partial_trace, trace_distance, DensityOperator, Hermitian, HERMITIAN_TOL, PSD_TOL,
    TRACE_TOL,
};
pub mod serial;
