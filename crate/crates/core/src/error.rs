use thiserror::Error;

use crate::pdmp::TrajectoryEvent;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trajectory failed after {} events: {cause}", prefix.len())]
    Trajectory {
        cause: Box<Error>,
        prefix: Vec<TrajectoryEvent>,
    },
    #[error("individual {label}: {cause}")]
    Lineage { label: String, cause: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Unsupported(_) => 2,
            Error::Lineage { cause, .. } => cause.exit_code(),
            _ => 3,
        }
    }
}
