use thiserror::Error;

/// Errors surfaced by the library. Numerical routines return these instead of
/// panicking so the CLI can map failures to diagnostics and exit codes.
#[derive(Error, Debug)]
pub enum FioError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported parameter range: {0}")]
    UnsupportedRange(String),

    #[error("statement void: {0}")]
    StatementVoid(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error("frame coverage error: {0}")]
    FrameCoverage(String),

    #[error("ellipticity violation: {0}")]
    Ellipticity(String),

    #[error("shift too small: {0}")]
    ShiftTooSmall(String),

    #[error("flow integration failed: {0}")]
    Flow(String),

    #[error("quadrature budget exceeded: {0}")]
    Quadrature(String),

    #[error("truncation tolerance unachievable: {0}")]
    Truncation(String),

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FioError>;
