use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: dimensions {got_h}x{got_w} do not match expected {want_h}x{want_w}")]
    DimMismatch {
        context: &'static str,
        want_h: usize,
        want_w: usize,
        got_h: usize,
        got_w: usize,
    },

    #[error("invalid class index {0}, expected 0..=5")]
    InvalidClass(u8),

    #[error("unknown color ({r},{g},{b}) at pixel ({x},{y}): not in the class palette")]
    UnknownColor { r: u8, g: u8, b: u8, x: usize, y: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unpaired samples under {root}: {description}")]
    OrphanSamples { root: PathBuf, description: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("non-finite {quantity} at {stage}: training diverged")]
    NonFinite { quantity: &'static str, stage: String },

    #[error("no road pixels detected: hazard index is undefined for this frame")]
    NoRoad,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("image decode error for {path}: {message}")]
    ImageDecode { path: PathBuf, message: String },

    #[error("png error: {0}")]
    Png(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
