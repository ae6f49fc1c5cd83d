use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The input violates a mathematical precondition (singular scatter,
    /// an observation sitting on the location, too few rows, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller asked for something unsupported or inconsistent.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A statistic could not be evaluated (vanishing denominator, non-positive variance).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("replicate {index} failed twice: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for errors caused by bad arguments rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
