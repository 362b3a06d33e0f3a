use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid ruin set: {0}")]
    InvalidRuinSet(String),

    #[error("invalid bid-ask matrix: {0}")]
    InvalidBidAsk(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infinite mean: {0}")]
    InfiniteMean(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
