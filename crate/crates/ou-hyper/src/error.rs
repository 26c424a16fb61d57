//! Error type shared across the crate.
//!
//! The variants map onto the CLI exit-code contract: configuration problems
//! exit 2, mathematical check failures exit 1, and numeric trouble
//! (non-convergence, inversion range errors) exits 3.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum OuError {
    /// Invalid argument, unknown name, or out-of-range parameter.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A function evaluation produced a non-finite value.
    #[error("non-finite evaluation: {0}")]
    NonFinite(String),

    /// An iterative numeric procedure stopped without reaching its target
    /// tolerance; carries the best value found and its error estimate.
    #[error("non-convergent: {what} (best value {value}, error estimate {error_estimate})")]
    NonConvergent {
        what: String,
        value: f64,
        error_estimate: f64,
    },

    /// A monotone inversion was asked for a value outside the numeric range
    /// reachable under the configured bracket cap.
    #[error("range error: {0}")]
    Range(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("report serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, OuError>;

impl OuError {
    /// Exit code for the CLI contract: 2 config, 3 non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            OuError::InvalidParam(_) | OuError::Io(_) | OuError::Json(_) => 2,
            OuError::NonConvergent { .. } | OuError::Range(_) => 3,
            OuError::NonFinite(_) => 1,
        }
    }
}
