//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Errors produced by kernels, GP fitting, acquisition and the experiment loop.
#[derive(Debug, Error)]
pub enum MfcvError {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("input outside the problem domain: {0}")]
    OutOfDomain(String),

    #[error("covariance matrix is singular even after jitter escalation")]
    SingularModel,

    #[error("hyperparameter training failed: {0}")]
    TrainingFailed(String),

    #[error("acquisition optimization failed: {0}")]
    AcquisitionFailed(String),

    #[error("not enough data: need at least {needed}, got {got}")]
    NotEnoughData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MfcvError>;
