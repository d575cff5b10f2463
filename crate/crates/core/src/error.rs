use thiserror::Error;

/// Errors raised across the simulation, optimization and estimation layers.
#[derive(Debug, Error)]
pub enum AmaError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("modularity is undefined on a graph without edges")]
    UndefinedOnEmpty,

    #[error("no feasible design: {0}")]
    Infeasible(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("design matrix is rank deficient (collinear column {column})")]
    Collinear { column: usize },

    #[error("complete separation detected (coefficient norm {norm:.3e})")]
    Separation { norm: f64 },

    #[error("slope is undefined: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AmaError>;
