use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("position ({x:.3}, {y:.3}) lies outside the map")]
    OutOfBounds { x: f64, y: f64 },

    #[error("degenerate geometry: object and robot positions coincide")]
    DegenerateGeometry,

    #[error("undefined ratio: alpha = 0 with zero class count")]
    UndefinedRatio,

    #[error("network `{0}` contains a cycle")]
    Cycle(String),

    #[error("network `{space}`: node `{node}` has {found} CPT rows, expected {expected}")]
    MissingCpt {
        space: String,
        node: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("evidence has zero probability under the network")]
    ZeroProbabilityEvidence,

    #[error("the grid has no free cells")]
    EmptyStateSpace,

    #[error("the MDP has no goal states")]
    NoGoals,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
