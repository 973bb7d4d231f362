use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A stability guard refused the requested step size.
    #[error("numerical refusal: {reason} (suggested dt <= {suggested_dt:.6e})")]
    Unstable { reason: String, suggested_dt: f64 },

    #[error(
        "phase unwrapping failed: node {node} (x = {x:.6}) has amplitude {amplitude:.3e} inside the tracked support"
    )]
    PhaseUnwrap { node: usize, x: f64, amplitude: f64 },

    #[error("singular least-squares system: {0}")]
    SingularFit(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed bath file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
