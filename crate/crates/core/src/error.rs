use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An iterative solver hit its cap. Carries the best value found and its
    /// certified gap so callers can still decide what to do with it.
    #[error("solver failed after {iterations} iterations (best value {value}, gap {gap})")]
    SolverFailure {
        value: f64,
        gap: f64,
        iterations: usize,
    },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Declared multifunction bounds contradicted by evaluation.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
