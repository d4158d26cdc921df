use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing file")]
    MissingFile { path: PathBuf },

    #[error("{path}: bad magic {found:02x?}, expected \"CNMF\"")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("{path}: unsupported format version {version}")]
    UnsupportedVersion { path: PathBuf, version: u16 },

    #[error("{path}: unsupported dtype code {code}")]
    UnsupportedDtype { path: PathBuf, code: u8 },

    #[error("{path}: truncated payload, expected {expected} bytes, found {actual}")]
    TruncatedPayload {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("matrix has an empty dimension ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("{file}: shape mismatch, expected {expected}, got {actual}")]
    ShapeMismatch {
        file: String,
        expected: String,
        actual: String,
    },

    #[error("{file}: negative entry {value} at ({row}, {col})")]
    NegativeEntry {
        file: String,
        row: usize,
        col: usize,
        value: f32,
    },

    #[error("{file}: non-finite entry at ({row}, {col})")]
    NonFiniteEntry {
        file: String,
        row: usize,
        col: usize,
    },

    #[error("value {value} at index {index} outside [0, {max_value}]")]
    OutOfRange {
        index: usize,
        value: f32,
        max_value: f32,
    },

    #[error("{path}: labels: {detail}")]
    Labels { path: PathBuf, detail: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mode violation: {0}")]
    ModeViolation(String),

    #[error("non-finite factor entry in {factor} after sweep {sweep}")]
    NonFinite { factor: String, sweep: usize },

    #[error("class labels required but the bundle has none")]
    LabelsRequired,

    #[error("model has no pixel factors (activations-only)")]
    NoPixelFactors,

    #[error("query example {query} has an all-zero latent column")]
    DegenerateQuery { query: usize },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("{path}: refusing to overwrite existing model (use --force)")]
    OutputExists { path: PathBuf },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile { path }
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn shape(
        file: impl Into<String>,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        Error::ShapeMismatch {
            file: file.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
