use thiserror::Error;

/// Errors raised across estimation, testing and asymptotics.
#[derive(Debug, Clone, Error)]
pub enum LqError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("scale collapse: all observations are identical")]
    ScaleCollapse,

    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        trace: Vec<f64>,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("bootstrap failed: {redraws} of {requested} resamples had to be redrawn")]
    BootstrapFailure { redraws: usize, requested: usize },

    #[error("q selection failed: estimation failed at every grid point")]
    SelectionFailed,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = LqError> = std::result::Result<T, E>;
