use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{message}")]
    Validation { field: &'static str, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero pivot at row {row}")]
    Pivot { row: i64 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("step size underflow at xi = {xi}")]
    Stiffness { xi: f64 },

    #[error("no eigenvalue with {k} nodes in [{lo}, {hi}]; node counts found: {found:?}")]
    NotFound { k: i64, lo: f64, hi: f64, found: Vec<i64> },

    #[error("no sign change in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("method disagreement: {0}")]
    Disagreement(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::Domain(_) => "domain",
            Error::Pivot { .. } => "pivot",
            Error::Degenerate(_) => "degenerate",
            Error::Numerical(_) => "numerical",
            Error::Stiffness { .. } => "stiffness",
            Error::NotFound { .. } => "not_found",
            Error::NoBracket { .. } => "no_bracket",
            Error::NotConverged(_) => "not_converged",
            Error::Disagreement(_) => "disagreement",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
