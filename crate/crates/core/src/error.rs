use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input failed a structural or physical validity check.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    /// The model produced a value outside its physical domain, e.g. |h| > 1.
    #[error("numerical contract violated: {0}")]
    NumericalContract(String),

    /// Fit preconditions were not met.
    #[error("fit undefined: {0}")]
    Fit(String),

    #[error("step-size underflow at t = {t}: grid spacing {spacing:e} too small")]
    StepUnderflow { t: f64, spacing: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
