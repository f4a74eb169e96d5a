use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertices live under different truncation apexes ({0} vs {1})")]
    MismatchedApex(i64, i64),

    #[error("truncation overflow: need {needed} ancestors above {vertex}, word has {available}")]
    TruncationOverflow {
        vertex: String,
        needed: usize,
        available: usize,
    },

    #[error("integer overflow while counting {0}")]
    Overflow(String),

    #[error("inconsistent kernel query: {0}")]
    InvalidQuery(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e} > tol {tol:e}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        tol: f64,
    },

    #[error("model too large: {vertices} vertices exceeds limit {limit}")]
    TooLarge { vertices: usize, limit: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
