use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("spectral point excluded: {0}")]
    ExcludedFrequency(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("step size underflow at u = {u}")]
    StepUnderflow { u: f64 },

    #[error("numerical breakdown: {0}")]
    Breakdown(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("data support reaches the grid boundary: {0}")]
    SupportAtBoundary(String),

    #[error("CFL condition violated: dt = {dt}, limit = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("wave reached the grid boundary at t = {t} (relative amplitude {amplitude:e})")]
    BoundaryTouch { t: f64, amplitude: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
