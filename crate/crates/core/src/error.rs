use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate witness: WMMD value is zero, normalization undefined")]
    DegenerateWitness,

    #[error("function value {value} outside the unit sup-norm ball")]
    OutsideSupNormBall { value: f64 },

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("gradient descent diverged (non-finite gradient at epoch {epoch}); try a smaller learning rate")]
    Diverged { epoch: usize },

    #[error("problem too large: {0}")]
    ScaleCap(String),

    #[error("replication {rep} (seed {seed}, stream {rep}) failed: {source}")]
    Replication {
        rep: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
