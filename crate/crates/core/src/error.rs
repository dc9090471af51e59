use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("vector is not unit length: |v| = {0}")]
    NotUnit(f64),
    #[error("singular matrix (det = {0:e})")]
    SingularMatrix(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate triangle {index}: area {area:e}")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unsupported polynomial degree {0} (max 3)")]
    UnsupportedDegree(usize),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("grid mismatch")]
    GridMismatch,
    #[error("field violates compact support: {0}")]
    SupportViolation(String),
    #[error("inadmissible input: {constraint} violated at cell ({i}, {j}), value {value:e}")]
    Inadmissible { constraint: String, i: usize, j: usize, value: f64 },
    #[error("normalization did not converge after {iterations} iterations (det {det})")]
    NotConverged { iterations: usize, det: f64, rows: [[f64; 3]; 3] },
    #[error("step cap of {0} exceeded while tracing a curve")]
    StepCap(usize),
    #[error("factorization failed at ({x}, {y}): {reason}")]
    Factorization { x: f64, y: f64, reason: String },
    #[error("stream function path residual {residual:e} exceeds {limit:e}")]
    PathResidual { residual: f64, limit: f64 },
    #[error("flow lines cross: {0}")]
    FlowCrossing(String),
    #[error("nonpositive flux {0:e} across a region side")]
    NonPositiveFlux(f64),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
