use thiserror::Error;

/// Errors raised by the operator, field and flow layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pencil error: {0}")]
    Pencil(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("phase singularity: phase {phase} is within the guard band of 0 or pi")]
    PhaseSingularity { phase: f64 },

    #[error("degenerate field at grid point {point}{}: {reason}", path_t.map(|t| format!(" (path t = {t})")).unwrap_or_default())]
    DegenerateField {
        point: usize,
        path_t: Option<f64>,
        reason: String,
    },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("schedule infeasible at index {index}: p = {p}, subtorus {axes:?}, margin {margin}")]
    Schedule {
        index: usize,
        p: usize,
        axes: Vec<usize>,
        margin: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
