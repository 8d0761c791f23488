use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition does not hold; `indices` lists the offending
    /// variables when the condition is per-variable.
    #[error("precondition violated: {message}{}", fmt_indices(.indices))]
    Precondition { message: String, indices: Vec<usize> },

    /// An exact oracle or enumeration would exceed its fixed capacity.
    #[error("capacity exceeded: {what} is {requested}, limit is {limit}")]
    Capacity {
        what: String,
        requested: u64,
        limit: u64,
    },

    /// A tabulated curve is too coarse for the requested query.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Malformed input; `location` points at the offending element.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A numerical invariant failed. Indicates a bug or an extreme input.
    #[error("internal error: {0}")]
    Internal(String),
}

fn fmt_indices(indices: &[usize]) -> String {
    if indices.is_empty() {
        String::new()
    } else {
        format!(" (indices {indices:?})")
    }
}

impl Error {
    /// Short machine-readable tag, used for CLI exit reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition { .. } => "precondition",
            Error::Capacity { .. } => "capacity",
            Error::Resolution(_) => "resolution",
            Error::Parse { .. } => "parse",
            Error::Internal(_) => "internal",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>, indices: Vec<usize>) -> Self {
        Error::Precondition {
            message: msg.into(),
            indices,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
