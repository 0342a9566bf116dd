// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form non-interacting (χ = 0) steady states of the trimer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub alpha: Vec<Complex64>,
    /// Classical populations `|α_i|²`.
    pub populations: Vec<f64>,
}

fn check_rates(j: f64, gamma: f64) -> Result<()> {
    if !(j > 0.0) || !(gamma > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "J = {j} and gamma = {gamma} must both be positive"
        )));
    }
    Ok(())
}

/// Fixed point with pump and loss on the same well:
/// `α₁ = −iε/(2J − iγ)`, `α₂ = α₃ = iε/(2J − iγ)`.
pub fn steady_loss_at_pumped(j: f64, gamma: f64, epsilon: Complex64) -> Result<SteadyState> {
    check_rates(j, gamma)?;
    let base = Complex64::i() * epsilon / Complex64::new(2.0 * j, -gamma);
    let alpha = vec![-base, base, base];
    let populations = alpha.iter().map(|a| a.norm_sqr()).collect();
    Ok(SteadyState { alpha, populations })
}

/// Populations of the formal fixed point with loss on an unpumped well:
/// `N₁ = N₂ = |ε|²/(γ² + 4J²)` and `N₃ = |ε|²(γ² + J²)/(J²(γ² + 4J²))`.
///
/// Only the damped well actually relaxes to its value; the other two keep
/// oscillating in the mean-field dynamics.
pub fn steady_numbers_loss_at_second(j: f64, gamma: f64, epsilon: Complex64) -> Result<[f64; 3]> {
    if j == 0.0 {
        return Err(Error::ParameterDomain(
            "J = 0 makes the third-well population singular".into(),
        ));
    }
    check_rates(j, gamma)?;
    let e2 = epsilon.norm_sqr();
    let denom = gamma * gamma + 4.0 * j * j;
    let n12 = e2 / denom;
    let n3 = e2 * (gamma * gamma + j * j) / (j * j * denom);
    Ok([n12, n12, n3])
}
