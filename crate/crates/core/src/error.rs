// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation diverged: non-finite value at index {index}")]
    SimulationDiverged { index: usize },

    #[error("no sample point within one bandwidth of the query point (kernel weight sum is zero)")]
    EmptyWindow,

    #[error("non-finite estimator output at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate sample: variance normalizer c_hat is zero")]
    DegenerateSample,

    #[error("null table {path}: {reason}")]
    TableLoad { path: PathBuf, reason: String },

    #[error("{path}, row {row}: {reason}")]
    Data { path: String, row: usize, reason: String },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
