use thiserror::Error;

/// Errors raised by the quantization lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model `{0}` (expected CP1 or CP2_toric)")]
    UnknownModel(String),

    #[error("level k = {k} exceeds quadrature capability {capability}")]
    Capability { k: usize, capability: usize },

    #[error("resolution {resolution} needs ~{needed} bytes, over the {budget}-byte memory budget")]
    MemoryBudget {
        resolution: usize,
        needed: usize,
        budget: usize,
    },

    #[error("positivity failure at node {node}: top-form ratio {value:e}")]
    Positivity { node: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("grid mismatch: field has {got} values, model has {expected} nodes")]
    GridMismatch { expected: usize, got: usize },

    #[error("level mismatch: expected k = {expected}, got k = {got}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("Gram matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("T-iteration lost positivity at iteration {iteration}: {source}")]
    IterationFailure {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("generator is not traceless (sum = {0:e})")]
    NotTraceless(f64),

    #[error("fit needs at least 4 positive points, got {0}")]
    TooFewPoints(usize),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
