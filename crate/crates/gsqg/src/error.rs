use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit class.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invalid shape: {0}")]
    ShapeValidity(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("Newton did not converge in {iterations} iterations (residual history {history:?})")]
    NonConvergence {
        iterations: usize,
        history: Vec<f64>,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("time step too large: {0}")]
    TimeStep(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
