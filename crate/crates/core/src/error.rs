use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid room template `{name}`: {reason}")]
    InvalidTemplate { name: String, reason: String },

    #[error("unknown room template `{0}`")]
    UnknownTemplate(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("direction lies outside the view frustum")]
    OutOfFrustum,

    #[error("ray at elevation {elevation_deg}° never meets the floor")]
    NoFloorIntersection { elevation_deg: f64 },

    #[error("view contains no floor boundary")]
    EmptyCloud,

    #[error("view alignment is under-constrained: {0}")]
    UnderConstrained(String),

    #[error("degenerate layout: {0}")]
    DegenerateLayout(String),

    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("library too small: {available} entries, {requested} requested")]
    LibraryTooSmall { available: usize, requested: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("instance too large for enumeration: {0} labelings")]
    InstanceTooLarge(f64),

    #[error("every pixel is masked")]
    DegenerateMask,

    #[error("resolution mismatch: observed {observed:?}, rendered {rendered:?}")]
    ResolutionMismatch { observed: (usize, usize), rendered: (usize, usize) },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }
}
