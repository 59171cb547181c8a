//! Crate-wide error type.

use std::path::PathBuf;

use crate::tissue::Tissue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("corrupt header in {path}: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("label value {value} at pixel ({x}, {y}) is not a tissue code (0-4)")]
    OutOfRangeLabel { value: u8, x: usize, y: usize },

    #[error("duplicate dataset id `{0}`")]
    DuplicateId(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dataset is empty or too small: {0}")]
    EmptyDataset(String),

    #[error("tissue {tissue} has {available} pixels, {requested} requested")]
    InsufficientPixels {
        tissue: Tissue,
        available: usize,
        requested: usize,
    },

    #[error("no training samples for class {0}")]
    EmptyClass(Tissue),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown or untrained class: {0}")]
    UnknownClass(String),

    #[error("invalid k={k} for {points} training points")]
    InvalidK { k: usize, points: usize },

    #[error("cannot load model: {0}")]
    ModelLoad(String),

    #[error("missing score cell: {0}")]
    MissingCell(String),

    #[error("entry `{id}`: {source}")]
    Entry {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pixel ({x}, {y}): {source}")]
    Pixel {
        x: usize,
        y: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code, printed by the command-line front end.
    /// Wrapped errors report the code of their innermost cause.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "MissingFile",
            Error::UnsupportedFormat { .. } => "UnsupportedFormat",
            Error::CorruptHeader { .. } => "CorruptHeader",
            Error::OutOfRangeLabel { .. } => "OutOfRangeLabel",
            Error::DuplicateId(_) => "DuplicateId",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyDataset(_) => "EmptyDataset",
            Error::InsufficientPixels { .. } => "InsufficientPixels",
            Error::EmptyClass(_) => "EmptyClass",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::UnknownClass(_) => "UnknownClass",
            Error::InvalidK { .. } => "InvalidK",
            Error::ModelLoad(_) => "ModelLoadError",
            Error::MissingCell(_) => "MissingCell",
            Error::Entry { source, .. }
            | Error::Fold { source, .. }
            | Error::Pixel { source, .. } => source.code(),
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn in_entry(self, id: &str) -> Self {
        Error::Entry {
            id: id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
