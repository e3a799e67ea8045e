use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Ambient dimension outside the supported range.
    #[error("ambient dimension {n} out of range ({min}..={max})")]
    AmbientOutOfRange { n: usize, min: usize, max: usize },

    /// A sub-dimension (flat, subspace, or subcube dimension) that does not
    /// fit the ambient space it was asked about.
    #[error("dimension {d} invalid for ambient dimension {n}")]
    DimensionOutOfRange { d: usize, n: usize },

    /// Two objects that must live in the same ambient space do not.
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation refused to start because its cost bound was exceeded.
    #[error("work cap exceeded: {0}")]
    CapExceeded(String),

    /// Malformed textual input (hex masks, binary point strings, ...).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
