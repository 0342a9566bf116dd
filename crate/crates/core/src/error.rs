// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or numerical parameter is outside its allowed domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Non-finite values reached a computation that requires finite input.
    #[error("non-finite value in {0}")]
    NumericDomain(&'static str),

    #[error("well index {index} out of range for {n_wells} wells")]
    IndexOutOfRange { index: usize, n_wells: usize },

    #[error("indices must be distinct, got {0:?}")]
    RepeatedIndex(Vec<usize>),

    /// An inferred-variance criterion divided by a vanishing variance.
    #[error("degenerate conditioning variance {0:e}")]
    DegenerateConditioning(f64),

    #[error("time {0} is not on the sample grid")]
    OffGrid(f64),

    #[error("trajectory diverged at t = {t} (|alpha| = {magnitude:e})")]
    Divergence { t: f64, magnitude: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("trace drifted by {drift:e} at t = {t}; reduce the step size")]
    TraceDrift { t: f64, drift: f64 },

    #[error("incomplete report: {0}")]
    IncompleteReport(String),
}
