use thiserror::Error;

use crate::sinkhorn::DualPotentials;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} below threshold {threshold:e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("grid of {nodes} nodes exceeds the limit of {limit}")]
    GridTooLarge { nodes: u128, limit: u128 },

    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("measure has no uniform cell volume")]
    NonuniformGrid,

    #[error("sinkhorn did not reach tolerance {tol:e} within {max_iter} sweeps (residual {:e})", potentials.residual)]
    MaxIterExceeded {
        tol: f64,
        max_iter: usize,
        potentials: Box<DualPotentials>,
    },

    #[error("index ({i}, {j}) out of range for supports of size ({n}, {m})")]
    IndexOutOfRange { i: usize, j: usize, n: usize, m: usize },

    #[error("compact grid is empty")]
    EmptyGrid,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
