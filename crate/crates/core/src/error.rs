use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("calibration failed for device {device}: {reason}")]
    Calibration { device: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("FFT precision: {0}")]
    Precision(String),

    #[error("insufficient input: need {needed} bits, have {available}")]
    InsufficientBits { needed: u64, available: u64 },

    #[error("input too short to produce any output ({0})")]
    EmptyOutput(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 for I/O and file-format problems,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Format(_) | Error::Json(_) | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}
