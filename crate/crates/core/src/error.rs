use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {value:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        lower: f64,
        upper: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("{0} diverges")]
    Divergent(&'static str),

    #[error("argument {value} outside the domain [{lower}, {upper}]")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("non-finite state at step {step}: {detail}")]
    NonFinite { step: u64, detail: String },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
