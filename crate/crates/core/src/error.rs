use crate::grid::GridFunction;
use crate::solvers::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

/// A solve that stopped before meeting its tolerance, with whatever it produced.
#[derive(Debug, Clone)]
pub struct Unconverged {
    pub solution: GridFunction,
    pub report: SolveReport,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid dimensions {nx}x{ny} too small (need at least 3x3)")]
    DimensionTooSmall { nx: usize, ny: usize },

    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),

    #[error("domain has no boundary nodes")]
    EmptyBoundary,

    #[error("non-finite value {value} at node ({i}, {j})")]
    NonFinite { i: usize, j: usize, value: f64 },

    #[error("node ({i}, {j}) is not an interior node")]
    NotInterior { i: usize, j: usize },

    #[error("grid functions live on different domains")]
    DomainMismatch,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("need at least 2 boundary nodes, found {0}")]
    TooFewBoundaryNodes(usize),

    #[error("exponent must exceed 1, got p = {value} at node ({i}, {j})")]
    InvalidExponent { i: usize, j: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("energy overflow: {0}")]
    Overflow(String),

    #[error("solver did not converge: {}", .0.report.summary())]
    NotConverged(Box<Unconverged>),

    #[error("boundary ordering violated by {0:e}")]
    BoundaryOrdering(f64),

    #[error("function is not positive on the required set (min {0:e})")]
    NotPositive(f64),

    #[error("ball of radius {radius} around ({x}, {y}) is not contained in the domain")]
    BallNotContained { x: f64, y: f64, radius: f64 },

    #[error("expression error: {0}")]
    Expression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
