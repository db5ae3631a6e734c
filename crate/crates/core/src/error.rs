use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "implicit trapezoid step is singular at node {node} (I - h/2 F_ii not invertible); refine the grid"
    )]
    StepTooLarge { node: usize },

    #[error("malformed Green's function: {0}")]
    MalformedGreen(String),

    #[error("numerical singularity: {0}")]
    Singular(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
