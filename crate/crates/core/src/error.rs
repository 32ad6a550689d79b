use thiserror::Error;

/// Errors raised by the geometric kernels and pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid has {0} points, at least {1} are required")]
    GridTooSmall(usize, usize),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("quotient by an action with b = 0 degenerates; use the product path")]
    ZeroB,
    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("curvature blowup: max |K| = {max_k:.3e} at t = {time:.6}")]
    CurvatureBlowup { max_k: f64, time: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("origin is not essential (|Rm| = 0)")]
    NotEssential,
    #[error("curvature history is identically flat")]
    FlatHistory,
    #[error("rescaling window [{lo:.6}, {hi:.6}] leaves the recorded history [{t0:.6}, {t1:.6}]")]
    WindowOutOfRange { lo: f64, hi: f64, t0: f64, t1: f64 },
    #[error("sampling window is empty")]
    WindowEmpty,
    #[error("space with {0} points is too large for exhaustive search (max {1})")]
    TooLarge(usize, usize),
    #[error("distance distribution supports only {0} usable scales")]
    DegenerateScales(usize),
    #[error("windows do not overlap: best residual {0:.3e}")]
    NoOverlap(f64),
    #[error("seam mismatch {residual:.3e} between windows {left} and {right}")]
    SeamMismatch { left: usize, right: usize, residual: f64 },
    #[error("both ends of the glued profile close up")]
    TwoClosedEnds,
    #[error("tip closure ratio f'/phi = {0:.6} matches neither 1 nor any 1/p")]
    ClosureFailure(f64),
    #[error("inconsistent local-model input: {0}")]
    InconsistentInput(String),
    #[error("curvature is not positive in the trusted window (min K = {0:.3e})")]
    NotPositive(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("pipeline stage `{stage}` failed: {message}")]
    Pipeline { stage: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
