// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line driver: config parsing, run orchestration and artifact
//! writers for the `trimer` binary.

pub mod compare;
pub mod config;
pub mod error;
pub mod meanfield;
pub mod oracle_cmd;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
