use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Arguments outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error("pole of the gamma function at {0}")]
    Pole(f64),

    /// Series summation lost too many digits to cancellation.
    #[error("precision loss: largest term {max_term:e} vs result {value:e}")]
    Precision { max_term: f64, value: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("evaluation budget of {0} exhausted")]
    Budget(usize),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
