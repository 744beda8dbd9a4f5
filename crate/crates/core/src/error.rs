use thiserror::Error;

/// Errors raised by the geometric kernels, samplers and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("grade mismatch: {left} vs {right}")]
    Grade { left: usize, right: usize },

    #[error("rank deficient frame: residual {residual:e} below tolerance {tol:e}")]
    RankDeficient { residual: f64, tol: f64 },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("non-finite Monte Carlo sample (batch {batch}, sample {index})")]
    NonFiniteSample { batch: u64, index: u64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid flag: {0}")]
    InvalidFlag(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("direction is not in the normal cone of the face")]
    NotInCone,

    #[error("degenerate normal cone: no accepted direction in {0} draws")]
    DegenerateCone(usize),

    #[error(
        "bodies are not in general relative position: {k}-face #{face_k} and {l}-face #{face_l} \
         have intersecting tangent spaces (smallest singular value {sigma:e})"
    )]
    NotGeneralPosition {
        k: usize,
        l: usize,
        face_k: usize,
        face_l: usize,
        sigma: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
