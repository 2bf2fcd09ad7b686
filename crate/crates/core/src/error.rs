use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too coarse: {n_cells} cells, need at least {required}")]
    GridTooCoarse { n_cells: usize, required: usize },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate coefficient: p = {value} at node {node} (must be > 0)")]
    DegenerateCoefficient { node: usize, value: f64 },
    #[error("degenerate iterate at iteration {iteration}: p = {value} at node {node}")]
    DegenerateIterate {
        iteration: usize,
        node: usize,
        value: f64,
    },
    #[error("inadmissible direction: must vanish on the boundary (left = {left}, right = {right})")]
    InadmissibleDirection { left: f64, right: f64 },
    #[error("invalid observation window: {0}")]
    InvalidWindow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
