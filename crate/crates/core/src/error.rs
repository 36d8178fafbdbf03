use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("PLY parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("PLY vertex element is missing required property `{0}`")]
    Schema(String),

    #[error("invalid camera `{id}`: {message}")]
    Camera { id: String, message: String },

    #[error("invalid camera JSON")]
    CameraJson(#[from] serde_json::Error),

    #[error("mask format error: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("image is smaller than the {window}x{window} window ({width}x{height})")]
    Size {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("non-finite value in {0}")]
    Numeric(&'static str),

    #[error("label {0} is outside [0, 255]")]
    Label(i64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scene is empty")]
    EmptyScene,

    #[error("no Gaussian covers pixel ({x}, {y})")]
    NoHit { x: u32, y: u32 },

    #[error("pixel ({x}, {y}) is outside the {width}x{height} image")]
    PixelOutOfBounds { x: u32, y: u32, width: u32, height: u32 },

    #[error("no segmentation has been computed")]
    NotSegmented,

    #[error("no cameras and masks loaded for reassignment")]
    NoViews,

    #[error("nothing to undo")]
    NothingToUndo,

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
