// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

/// Errors produced by the segmentation engine and its tooling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate point at origin")]
    DegeneratePoint,

    #[error("zero baseline between points")]
    ZeroBaseline,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("negative growth: d0 * M ({0}) exceeds r_max - r0 ({1})")]
    NegativeGrowth(f64, f64),

    #[error("unsupported cell ({0}, {1}): node height undefined")]
    UnsupportedCell(usize, usize),

    #[error("empty scan")]
    EmptyScan,

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("no evaluable points")]
    NoEvaluablePoints,

    #[error("{path}: truncated record at byte offset {offset}")]
    Truncated { path: PathBuf, offset: u64 },

    #[error("{path}: non-finite coordinates at point indices {indices:?}")]
    NonFinite { path: PathBuf, indices: Vec<usize> },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("empty parameter grid")]
    EmptyGrid,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
