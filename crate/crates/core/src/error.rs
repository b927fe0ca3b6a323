use thiserror::Error;

/// Errors produced anywhere in the prediction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("probability {0} outside the admissible range")]
    Probability(f64),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("root finder did not converge: {reason} (t2 = {t2}, u2 = {u2})")]
    NonConvergence { reason: String, t2: f64, u2: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("replication {index}: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::Numeric(_) => true,
            Error::Replication { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
