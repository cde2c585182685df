use thiserror::Error;

/// Errors raised by the haarlab kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid dyadic interval: {0}")]
    InvalidInterval(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// An exact computation would exceed its configured cap; callers must opt
    /// into an approximate mode explicitly.
    #[error("capacity exceeded: {what} has size {size}, cap is {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
