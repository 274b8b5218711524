use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = IqaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IqaError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: cannot decode image: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("{}: unsupported image format: {message}", path.display())]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("{}: images with an alpha channel are not supported", path.display())]
    AlphaChannel { path: PathBuf },

    #[error("image has a zero dimension ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("image {width}x{height} is smaller than the required {min_width}x{min_height}")]
    TooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("crop {x0},{y0},{w},{h} does not fit a {width}x{height} image")]
    CropOutOfBounds {
        x0: usize,
        y0: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    #[error("wrong dynamic range: {0}")]
    DynamicRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("entry {image_id}: {source}")]
    Entry {
        image_id: String,
        #[source]
        source: Box<IqaError>,
    },
}

impl IqaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IqaError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        IqaError::InvalidParameter(message.into())
    }

    pub(crate) fn stats(message: impl Into<String>) -> Self {
        IqaError::Statistics(message.into())
    }

    pub(crate) fn mismatch(left: (usize, usize), right: (usize, usize)) -> Self {
        IqaError::DimensionMismatch {
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }

    pub(crate) fn in_entry(image_id: &str, source: IqaError) -> Self {
        IqaError::Entry {
            image_id: image_id.to_string(),
            source: Box::new(source),
        }
    }

    /// Process exit code used by the `iqa` binary.
    ///
    /// 2 is I/O (including unreadable or malformed input files), 3 is a shape
    /// problem, 4 is a bad parameter and 5 is anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            IqaError::Io { .. }
            | IqaError::Decode { .. }
            | IqaError::UnsupportedFormat { .. }
            | IqaError::AlphaChannel { .. }
            | IqaError::Manifest { .. }
            | IqaError::Format { .. } => 2,
            IqaError::ZeroDimension { .. }
            | IqaError::DimensionMismatch { .. }
            | IqaError::TooSmall { .. }
            | IqaError::CropOutOfBounds { .. } => 3,
            IqaError::DynamicRange(_) | IqaError::InvalidParameter(_) => 4,
            IqaError::Statistics(_) => 5,
            IqaError::Entry { source, .. } => source.exit_code(),
        }
    }
}
