use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Intermediate quantity not representable in double precision.
    #[error("range error at order {order:?} for argument {z}: {reason}")]
    Range {
        order: Option<usize>,
        z: Complex64,
        reason: String,
    },

    /// Invalid user-facing configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A quadrature or series did not reach its target accuracy.
    #[error("accuracy error: {what} reached residual {achieved:.3e} > target {target:.3e}")]
    Accuracy {
        what: String,
        achieved: f64,
        target: f64,
    },

    /// Input that makes a derived quantity undefined, such as a zero bandwidth.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Attaches the multipole order to a range error that did not carry one.
    pub(crate) fn at_order(self, n: usize) -> Self {
        match self {
            Error::Range {
                order: None,
                z,
                reason,
            } => Error::Range {
                order: Some(n),
                z,
                reason,
            },
            other => other,
        }
    }
}
