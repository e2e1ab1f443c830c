use thiserror::Error;

pub type Result<T, E = FbpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FbpError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("instability at step {step} (t = {t}): value {value} left [-1e-6, 1 + 1e-6] at grid index {index}")]
    Instability {
        step: usize,
        t: f64,
        index: usize,
        value: f64,
    },

    #[error("window error: {0}")]
    Window(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precision error: {message} (achieved estimate {estimate}, error {error})")]
    Precision {
        message: String,
        estimate: f64,
        error: f64,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("regime error: {0}")]
    Regime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FbpError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FbpError::Domain(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        FbpError::Parameter(msg.into())
    }

    pub(crate) fn window(msg: impl Into<String>) -> Self {
        FbpError::Window(msg.into())
    }
}
