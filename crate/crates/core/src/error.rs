use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix of size {size} exceeds the supported limit of {limit}")]
    Size { size: usize, limit: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular: smallest singular value {0:e}")]
    Singular(f64),
    #[error("matrix is not unitary: defect {0:e}")]
    NotUnitary(f64),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("distinguishability model error: {0}")]
    Model(String),
    #[error("potential diverges: R^2 = {0:e}")]
    Divergence(f64),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Degenerate(_) | Error::Divergence(_) | Error::Singular(_) | Error::NotUnitary(_) => 3,
            _ => 2,
        }
    }
}
