//! Error type shared by every module of the lab.

use thiserror::Error;

/// Errors raised by the lab's numerical kernels and the experiment runner.
#[derive(Debug, Error)]
pub enum LabError {
    /// A request exceeds a configured resource cap.
    #[error("capacity exceeded: {what} (cap {cap})")]
    Capacity { what: String, cap: String },

    /// An argument lies outside the range covered by a precomputed table or scan.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A multiprecision operand does not carry enough bits.
    #[error("insufficient precision: have {have} bits, need {need}")]
    Precision { have: u32, need: u32 },

    /// The evaluation point coincides with a zero or a singularity.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A sequence violates a required ordering.
    #[error("ordering error: {0}")]
    Ordering(String),

    /// Per-scale sample sequences do not line up.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Arguments violate an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A sampler could not be tuned into its admissible regime.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Unknown experiment name or malformed command line.
    #[error("usage error: {0}")]
    Usage(String),

    /// Configuration does not match the experiment schema.
    #[error("schema error in field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    /// Runtime integrity failure (too many flagged samples, corrupt cache, ...).
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub(crate) fn capacity(what: impl Into<String>, cap: impl ToString) -> Self {
        LabError::Capacity {
            what: what.into(),
            cap: cap.to_string(),
        }
    }

    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
