use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Arguments disagree in shape or violate a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A factorization that should succeed did not.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The estimator produced NaN or infinite state.
    #[error("non-finite state after iteration {iteration} ({what})")]
    NonFinite { iteration: usize, what: &'static str },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
