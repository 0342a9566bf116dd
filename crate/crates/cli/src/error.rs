// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Message starts with the JSON path of the offending field.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Too many trajectories diverged; artifacts are still written.
    #[error("run invalid: {0}")]
    InvalidRun(String),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    Threshold(String),

    #[error(transparent)]
    Engine(#[from] trimer_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Data(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::InvalidRun(_) => 3,
            CliError::GridMismatch(_) => 4,
            CliError::Threshold(_) => 5,
            CliError::Engine(_) | CliError::Io { .. } | CliError::Data(_) => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json: {e}"))
    }
}
