use thiserror::Error;

/// Errors surfaced by graph primitives, generators, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: u32, n: usize },

    #[error("graph sizes differ: {left} vs {right} nodes")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid role assignment: {0}")]
    InvalidAssignment(String),

    #[error("injection failed: {0}")]
    Injection(String),

    #[error("input shape: {0}")]
    InputShape(String),

    #[error("fixation plan is stale: {0}")]
    PlanStale(String),

    #[error("search budget exhausted after {explored} nodes (budget {budget})")]
    BudgetExceeded { explored: u64, budget: u64 },

    #[error("graph too large for exhaustive search: {n} nodes (max {max})")]
    SizeCap { n: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
