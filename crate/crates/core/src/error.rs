use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{function} diverges at x = {x:e} (below cutoff {cutoff:e})")]
    Divergent {
        function: &'static str,
        x: f64,
        cutoff: f64,
    },

    #[error(
        "no convergence after {iterations} iterations: estimate {estimate}, residual {residual:e}"
    )]
    NonConvergence {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical integrity check failed: {0}")]
    NumericalIntegrity(String),

    #[error("grid resolution too coarse: {0}")]
    Resolution(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("retention undefined: reference population {0:e} is below 1e-12")]
    UndefinedRetention(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalIntegrity(_) | Error::NonConvergence { .. } => 3,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
