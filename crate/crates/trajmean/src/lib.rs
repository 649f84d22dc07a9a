//! File formats, the distributed-fusion simulation and report writers built
//! on [`trajmean_core`].

use std::path::{Path, PathBuf};

pub mod format;
pub mod report;
pub mod sim;

pub use trajmean_core as core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] trajmean_core::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// 1 for I/O and syntax failures, 2 for semantic or parameter errors
    /// (including well-formed JSON of the wrong shape).
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Json(e) if e.is_data() => 2,
            Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 1,
            Error::Invalid(_) | Error::Core(_) => 2,
        }
    }
}
