use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed PNG {}: {reason}", path.display())]
    MalformedPng { path: PathBuf, reason: String },

    #[error("unsupported bit depth {depth} in {} (only 8-bit is accepted)", path.display())]
    UnsupportedDepth { path: PathBuf, depth: u8 },

    #[error("expected a {expected} image, got {found}")]
    ColorSpace {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("mask is empty, no object in frame")]
    NoObject,

    #[error("placement failed: {0}")]
    Placement(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("class {class_name} (id {class_id}) produced no usable crops")]
    EmptyClass { class_id: u32, class_name: String },

    #[error("JSON error in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// True for failures that originate in the filesystem or file decoding.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::NotFound(_)
                | Error::Io { .. }
                | Error::MalformedPng { .. }
                | Error::UnsupportedDepth { .. }
                | Error::Json { .. }
        )
    }
}
