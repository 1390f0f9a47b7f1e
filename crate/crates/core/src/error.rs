use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} exceeds the enumeration cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("{operation} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        operation: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("effective sample size {ess:.1} is below the required {required}")]
    InsufficientEss { ess: f64, required: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
