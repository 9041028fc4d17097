use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no qualifying mask: every candidate is empty or background")]
    NoQualifyingMask,

    #[error("mask is empty after refinement")]
    EmptyAfterRefinement,

    #[error("mask is empty")]
    EmptyMask,

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("degenerate result: transform produced a {width}x{height} raster")]
    Degenerate { width: u32, height: u32 },

    #[error("canvas too small: object of {object:?} does not fit on canvas {canvas:?}")]
    CanvasTooSmall {
        object: (u32, u32),
        canvas: (u32, u32),
    },

    #[error("need at least {needed} background images, got {got}")]
    NotEnoughBackgrounds { needed: usize, got: usize },

    #[error("object bank is empty")]
    EmptyBank,

    #[error("class label {0:?} is not in the class index")]
    UnknownClass(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed label line {line} in {path}: {reason}")]
    LabelParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
