use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("integrality condition violated: {0}")]
    Integrality(String),
    #[error("matrix is not isotropic for the given form and level")]
    NotIsotropic,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),
    #[error("point outside the evaluation domain: {0}")]
    Domain(String),
    #[error("summation budget exceeded: {0}")]
    Budget(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
