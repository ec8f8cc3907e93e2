use thiserror::Error;

/// Errors raised by the homogenization engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix inversion failed: {0}")]
    Inversion(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e}){context}")]
    Solver {
        iterations: usize,
        residual: f64,
        context: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a context label to a solver failure; other variants pass through.
    pub fn with_solver_context(self, label: &str) -> Self {
        match self {
            Error::Solver {
                iterations,
                residual,
                context,
            } => Error::Solver {
                iterations,
                residual,
                context: format!("{context} [{label}]"),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
