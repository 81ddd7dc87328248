use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("result overflows f64: {0}")]
    Overflow(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("indefinite leading part: {0}")]
    IndefiniteLeadingPart(String),
    #[error("no root in bracket: {0}")]
    NoRoot(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("series did not terminate after {0} terms")]
    SeriesLimit(usize),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
