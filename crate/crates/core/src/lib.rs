// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Wigner simulation of pumped and damped Bose-Hubbard networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: system definition (coupling graph, pump, loss, nonlinearity)
//!   and the Itô drift/diffusion of the truncated Wigner equations.
//! - [`dynamics`]: single-trajectory integration and the noiseless
//!   mean-field solver.
//! - [`ensemble`]: trajectory ensembles, mergeable moment accumulators and
//!   replica error bars.
//! - [`correlations`]: quadrature statistics and the squeezing, entanglement
//!   and steering criteria evaluated on Gaussian moment sets.
//! - [`analytic`]: closed-form non-interacting steady states.
//! - [`oracle`]: an exact truncated-Fock Lindblad integrator producing the
//!   same moment interface, used for cross-validation.

pub mod analytic;
pub mod correlations;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
