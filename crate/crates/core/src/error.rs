use thiserror::Error;

/// Errors raised by the solver, the analysis harness and the problem-file reader.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "monotone inversion failed for target {target}: bracket [{lo}, {hi}] after {iterations} iterations"
    )]
    Inversion {
        target: f64,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("time step {dt} exceeds the positivity limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("support reached the boundary collar at t={t} (cell {cell}, value {value})")]
    BoundaryContact { t: f64, cell: usize, value: f64 },

    #[error("invalid problem: {0}")]
    Invalid(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("analysis: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Domain(_) | Error::Invalid(_) | Error::Analysis(_) => 3,
            Error::Inversion { .. } | Error::Cfl { .. } | Error::BoundaryContact { .. } => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
