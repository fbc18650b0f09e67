//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by grids, solvers, sensitivity engines and the trainer.
#[derive(Error, Debug)]
pub enum AdjointNetError {
    /// A constructor or operation received an argument that violates its
    /// preconditions (non-positive sizes, shape mismatches, bad ranges).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An observation or field index is outside the grid bounds.
    #[error("index out of range: {0}")]
    IndexError(String),

    /// Newton failed to reduce the residual below tolerance within the
    /// iteration budget. Carries the residual history of the failing step.
    #[error("solver diverged at step {step}: residual history {residuals:?}")]
    SolverDiverged { step: usize, residuals: Vec<f64> },

    /// A field picked up a NaN or Inf during time stepping.
    #[error("numerical instability in {context} at step {step}")]
    Instability { context: String, step: usize },

    /// The transposed Jacobian of a backward sweep was singular.
    #[error("adjoint solve failed: {0}")]
    AdjointFailure(String),

    /// The training loop produced a NaN loss or gradient.
    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    ConfigError(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AdjointNetError>;

impl AdjointNetError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        AdjointNetError::InvalidArgument(msg.into())
    }
}
