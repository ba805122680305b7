use std::io;
use std::path::PathBuf;

use tapemouse_core::{CalibrationError, EngineError, ImageError, SegmentationError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ImageError,
    },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("malformed calibration file: {0}")]
    CalibrationFile(String),
    #[error("event log line {line}: {message}")]
    EventLog { line: usize, message: String },
    #[error("{what} needs at least {needed} frames, got {got}")]
    TooFewFrames { what: &'static str, needed: usize, got: usize },
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
