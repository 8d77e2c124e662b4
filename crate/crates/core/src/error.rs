use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation is inconsistent with the configuration,
    /// e.g. a magnetic channel on a material without a magnetic slope.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs that leave the problem without a unique answer.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A numerical procedure did not reach its tolerance. `best_estimate`
    /// carries the value it had when it gave up.
    #[error("numerical failure: {message} (best estimate {best_estimate:e})")]
    Numerical { message: String, best_estimate: f64 },
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, best_estimate: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            best_estimate,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
