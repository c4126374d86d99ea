use thiserror::Error;

/// Errors raised by the detection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error("region {region} lies outside a grid of shape {shape}")]
    OutOfBounds { region: String, shape: String },

    #[error("region is empty")]
    EmptyRegion,

    #[error("binary search requires a power-of-two length per axis, got {0}")]
    NotPowerOfTwo(String),

    #[error("threshold table was built for N = {table}, grid has N = {grid}")]
    TableMismatch { table: usize, grid: usize },

    #[error("no threshold stored for cardinality {0}")]
    UnknownCardinality(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
