use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A measure or coefficient sequence fails its structural invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// A quadrature or series did not reach the requested accuracy.
    #[error("accuracy error in {what}: residual {residual:e}")]
    Accuracy { what: String, residual: f64 },

    /// An iterative numerical method broke down.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("not a moment sequence: |gamma_{step}| = {modulus}")]
    NotMomentSequence { step: usize, modulus: f64 },

    #[error("singular point at angle {0}")]
    SingularPoint(f64),

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
