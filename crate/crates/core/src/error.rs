//! Errors shared by the objective-space and trace data model.

use thiserror::Error;

/// Validation and range errors raised by the core data model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("objective vectors have mismatched dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("objective value at index {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("objective vector must have at least one coordinate")]
    EmptyVector,

    #[error(
        "degenerate normalization bounds at coordinate {index}: ideal must be strictly below nadir"
    )]
    DegenerateBounds { index: usize },

    #[error("iteration {t} out of range [1, {t_max}]")]
    IterationOutOfRange { t: usize, t_max: usize },

    #[error("population snapshot must be nonempty")]
    EmptySnapshot,

    #[error("snapshot iteration must be >= 1")]
    ZeroIteration,

    #[error("invalid run metadata: {0}")]
    InvalidMeta(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),
}
