use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("malformed file at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("unsupported {format} version `{found}` (this build reads version {expected})")]
    Version {
        format: &'static str,
        found: String,
        expected: u32,
    },

    #[error("controller returned action {id}, but only {n_actions} actions exist")]
    ActionOutOfRange { id: usize, n_actions: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(offset: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }
}
