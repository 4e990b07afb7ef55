use thiserror::Error;

/// Errors raised by the spectral solvers and the scenario runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("grid too coarse: axis {axis} has {size} nodes, need at least {required}")]
    GridTooCoarse {
        axis: usize,
        size: usize,
        required: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vector field is not real: coefficient at {index:?} violates c(-p) = conj(c(p))")]
    NonRealField { index: Vec<i64> },

    #[error("operator is not anti-Hermitian (defect {defect:e})")]
    NotAntiHermitian { defect: f64 },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("resource guard: size {size} exceeds limit {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("invalid scheme configuration: {0}")]
    InvalidScheme(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("complex-valued density sample at node {node} (imaginary part {imag:e})")]
    ComplexDensity { node: usize, imag: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bandwidth violation: {0}")]
    BandwidthViolation(String),

    #[error("linear solve did not converge after {iterations} iterations (residual {residual:e})")]
    SolveDiverged { iterations: usize, residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches a stage name to the error arm of a `Result`.
pub trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.into().in_stage(stage))
    }
}
