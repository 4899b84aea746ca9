use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid audio block: {0}")]
    InvalidAudio(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scene specification: {0}")]
    InvalidScene(String),

    #[error("failed to read WAV file {path}: {reason}")]
    WavRead { path: PathBuf, reason: String },

    #[error("failed to write WAV file {path}: {reason}")]
    WavWrite { path: PathBuf, reason: String },

    #[error("input has {got} channels but the channel map needs {needed}")]
    ChannelCount { got: usize, needed: usize },

    #[error("failed to parse CSV file {path}: {reason}")]
    CsvParse { path: PathBuf, reason: String },

    #[error("no overlapping active frames between trajectory and ground truth")]
    NoOverlap,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
