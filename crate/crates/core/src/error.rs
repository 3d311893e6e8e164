use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The requested object exists only at a finer depth than the one supplied.
    #[error("resolution: {reason} (requires depth {required_depth})")]
    Resolution { reason: String, required_depth: u32 },

    #[error("not in the full group: {0}")]
    NotInFullGroup(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("memory cap of {cap} bytes exceeded")]
    MemoryCap { cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
