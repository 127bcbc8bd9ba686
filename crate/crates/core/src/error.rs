use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("point outside the chart domain: {0}")]
    Domain(String),

    #[error("point outside the tubular zone (R = {r}, limit {limit})")]
    Range { r: f64, limit: f64 },

    #[error("integration failed at node {node}: {reason}")]
    Integration { node: usize, reason: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Domain(_) | Error::Range { .. } | Error::Unsupported(_) => 2,
            Error::Integration { .. } | Error::Numeric(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
