use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operators that should share an internal dimension do not.
    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols} ({context})")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
        context: String,
    },

    /// The channel violates the completeness relation at one or more nodes.
    #[error("channel is not trace preserving; defects (node, max-norm): {defects:?}")]
    Incomplete { defects: Vec<(usize, f64)> },

    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
