use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("voxel index {index:?} out of bounds for grid shape {shape:?}")]
    IndexOutOfBounds { index: [usize; 3], shape: [usize; 3] },

    #[error("grid mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("grid needs {voxels} voxels, above the budget of {budget} (force to override)")]
    BudgetExceeded { voxels: u64, budget: u64 },

    #[error("bad magic {found:?}, not a voxel grid file")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported grid file version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("unknown grid encoding {0}")]
    UnknownEncoding(u8),

    #[error("unsupported label width {0}, expected 1")]
    LabelWidth(u8),

    #[error("truncated grid file: {0}")]
    Truncated(String),

    #[error("grid dims imply {expected} voxels but the payload decodes to {found}")]
    PayloadMismatch { expected: u64, found: u64 },

    #[error("invalid label code {0} in grid payload")]
    BadLabel(u8),

    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
