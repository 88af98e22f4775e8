use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({0}, {1}) lies outside the unit square")]
    OutOfDomain(f64, f64),

    #[error("node ({0}, {1}) is not an interior mesh node")]
    NotInterior(usize, usize),

    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        residual: f64,
        iterations: usize,
        best: Vec<f64>,
    },

    #[error("empty restriction set")]
    EmptySet,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
