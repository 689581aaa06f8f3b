use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A quantity is undefined for the given law (degenerate Y, zero normaliser, ...).
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    /// The model is outside the mode an operation is defined for.
    #[error("mode error: {0}")]
    Mode(String),
}

impl Error {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
