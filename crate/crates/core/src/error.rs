//! Error type shared by every module in the crate.

use thiserror::Error;

/// Library-wide error enum. Validation failures carry the first violated
/// axiom together with the witnessing elements so a report can print them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("axiom violated ({axiom}): {witness}")]
    Axiom { axiom: String, witness: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elements belong to different groupoids")]
    GroupoidMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty fiber: {0}")]
    EmptyFiber(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("point outside chart domain: {0}")]
    Domain(String),

    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("matching condition violated: {0}")]
    Match(String),

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("lift through submersion failed: {0}")]
    Lift(String),

    #[error("unknown example: {0}")]
    UnknownExample(String),
}

impl Error {
    pub fn axiom(axiom: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Axiom {
            axiom: axiom.into(),
            witness: witness.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
