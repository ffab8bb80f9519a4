use thiserror::Error;

use crate::types::Key;

pub type Result<T, E = LaiError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaiError {
    #[error("invalid range query: low bound {low} exceeds high bound {high}")]
    InvalidQuery { low: Key, high: Key },

    #[error("position range {start}..{end} is out of bounds for a column of {len} keys")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },

    /// A caller broke an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Internal state no longer satisfies a structural invariant. Always a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl LaiError {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        LaiError::Precondition(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        LaiError::Invariant(msg.into())
    }
}
