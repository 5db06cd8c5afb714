use thiserror::Error;

pub type Result<T, E = NudgingError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NudgingError {
    #[error("malformed field: {0}")]
    MalformedField(String),

    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("{system} diverged: non-finite state at step {step}")]
    Divergence { system: &'static str, step: usize },

    /// Returned by single-step routines; run loops attach the step index.
    #[error("non-finite values produced")]
    NonFinite,

    #[error(
        "resolution criterion violated: reference spectrum at the dealias cutoff is {margin:e} \
         relative to its peak (limit {limit:e}); increase N"
    )]
    Resolution { margin: f64, limit: f64 },

    #[error("undefined decay fit: {0}")]
    UndefinedFit(String),

    #[error("unknown catalog entry `{name}`; valid names: {}", valid.join(", "))]
    UnknownEntry { name: String, valid: Vec<String> },

    #[error("config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NudgingError {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        NudgingError::Validation { key: key.into(), message: message.into() }
    }

    /// Attaches a step index to a bare [`NudgingError::NonFinite`].
    pub fn at_step(self, system: &'static str, step: usize) -> Self {
        match self {
            NudgingError::NonFinite => NudgingError::Divergence { system, step },
            other => other,
        }
    }
}
