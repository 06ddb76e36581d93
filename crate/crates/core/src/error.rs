use thiserror::Error;

/// Errors raised by the solver, operators, oracles and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value {value} at node {node:?}")]
    NonFinite { node: Vec<usize>, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time step {dt} exceeds the stable bound {limit}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("solution blew up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
