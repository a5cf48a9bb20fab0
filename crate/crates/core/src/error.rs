// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: u64, message: String },

    #[error("ragged CSV: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: u64,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric cell at ({row},{col}): {cell:?}")]
    NonNumeric { row: u64, col: usize, cell: String },

    #[error("invalid grid header at column {col}: {cell:?}")]
    GridHeader { col: usize, cell: String },

    #[error("invalid functional series: {0}")]
    InvalidSeries(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate covariance: no principal direction")]
    DegenerateCovariance,

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
