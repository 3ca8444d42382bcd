use std::path::PathBuf;

/// Errors produced by every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bit depth {0} is outside the supported range 1..=32")]
    BitDepth(u32),

    #[error("plane width k={k} does not divide bit depth n={n}")]
    PlaneBits { k: u32, n: u32 },

    #[error("value {0} is not finite")]
    NonFinite(f64),

    #[error("sample {value} at index {index} exceeds {bits}-bit range")]
    SampleRange { index: usize, value: u32, bits: u32 },

    #[error("plane {plane} holds value {value} which does not fit in {bits} bits")]
    PlaneRange { plane: usize, value: u32, bits: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("non-finite gradient in parameter block {block}")]
    NonFiniteGradient { block: usize },

    #[error("training diverged at iteration {iteration}: loss = {loss}")]
    Diverged { iteration: usize, loss: f64 },

    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },

    #[error("unsupported {format} feature: {reason}")]
    Unsupported { format: &'static str, reason: String },

    #[error("model file version {found} is not supported (expected {expected})")]
    Version { found: u8, expected: u8 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }

    pub(crate) fn unsupported(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Unsupported {
            format,
            reason: reason.into(),
        }
    }
}
