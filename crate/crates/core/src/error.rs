use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix that must be positive definite failed Cholesky factorization.
    #[error("{what} is not symmetric positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("{what} is not symmetric")]
    NotSymmetric { what: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A degrees-of-freedom or parameter-range constraint is violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A statistic cannot be evaluated because a matrix is singular.
    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
