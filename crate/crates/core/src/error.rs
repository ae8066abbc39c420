use thiserror::Error;

/// Errors raised by the cross-dimensional algebra and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OmegaError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A numerical routine failed (non-convergence, overflow, NaN state).
    #[error("numeric failure in {operation}: {detail}{}", time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    NumericFailure {
        operation: &'static str,
        detail: String,
        time: Option<f64>,
    },
}

impl OmegaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        OmegaError::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(operation: &'static str, detail: impl Into<String>) -> Self {
        OmegaError::NumericFailure {
            operation,
            detail: detail.into(),
            time: None,
        }
    }

    /// Attaches a simulation time stamp to a numeric failure.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            OmegaError::NumericFailure {
                operation, detail, ..
            } => OmegaError::NumericFailure {
                operation,
                detail,
                time: Some(t),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, OmegaError>;
