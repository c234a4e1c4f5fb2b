use std::fmt;

use thiserror::Error;

/// Why an elemental subset (or a refitted solution) was not accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// The carrier system has a nullspace of dimension other than one.
    Degenerate,
    /// The solution does not satisfy the model-specific constraints.
    Constraint,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Degenerate => f.write_str("degenerate subset"),
            RejectReason::Constraint => f.write_str("model constraint violated"),
        }
    }
}

#[derive(Debug, Error)]
pub enum MisreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("elemental subset rejected: {0}")]
    Rejected(RejectReason),
    #[error("sampling failed after {attempts} attempts (dominant rejection: {reason})")]
    SamplingFailure { attempts: usize, reason: RejectReason },
    #[error("refinement failed: {0}")]
    RefinementFailure(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MisreError> = std::result::Result<T, E>;
