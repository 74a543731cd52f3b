use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlockError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The state left the representable range between `t_lo` and `t_hi`.
    #[error("blow-up detected in [{t_lo}, {t_hi}]")]
    BlowUp { t_lo: f64, t_hi: f64 },

    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },

    #[error("rate fit rejected: {0}")]
    Fit(String),

    #[error("{0}")]
    Unsupported(String),
}

impl FlockError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        FlockError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        FlockError::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FlockError>;
