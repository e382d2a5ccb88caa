use thiserror::Error;

/// Errors raised by the solvers, constructions and reductions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is outside its domain.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// The requested support is outside what a construction covers.
    #[error("{0}")]
    UnsupportedRange(String),

    /// A linear system that should be nonsingular was not.
    #[error("singular system at sigma = {sigma}: {detail}")]
    Singular { sigma: f64, detail: String },

    /// A certified quantity came out wrong (residual blowup, bad normalization).
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the error stems from user input rather than a failed invariant.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument { .. } | Error::UnsupportedRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
