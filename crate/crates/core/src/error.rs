use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("invalid quadratic form: {0}")]
    InvalidForm(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported estimate: {0}")]
    UnsupportedEstimate(String),
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),
    #[error("system size {n} exceeds the dense cap {cap}")]
    SizeLimit { n: usize, cap: usize },
    #[error("invalid sites: {0}")]
    InvalidSites(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
