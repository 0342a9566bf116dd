// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Open Bose-Hubbard networks: topology, pumping, damping and nonlinearity.
//!
//! Units: ħ = 1, rates in units of the reference loss rate, time is the
//! dimensionless `γt`. In the truncated Wigner representation each well
//! obeys the Itô equation
//!
//! ```text
//! dα_i = [ε_i − γ_i α_i − 2iχ|α_i|²α_i + i Σ_j J_ij α_j] dt + √γ_i dW_i
//! ```
//!
//! with complex Wiener increments normalised as `E[dW_i* dW_i] = dt`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Immutable description of a pumped, damped Bose-Hubbard network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemSpecRepr", into = "SystemSpecRepr")]
pub struct SystemSpec {
    n_wells: usize,
    /// Row-major `n × n`, symmetric with zero diagonal.
    coupling: Vec<f64>,
    chi: f64,
    pump: Vec<Complex64>,
    loss: Vec<f64>,
}

/// Wire form of [`SystemSpec`]; the coupling is a nested array.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpecRepr {
    n_wells: usize,
    coupling: Vec<Vec<f64>>,
    chi: f64,
    pump: Vec<Complex64>,
    loss: Vec<f64>,
}

impl TryFrom<SystemSpecRepr> for SystemSpec {
    type Error = Error;

    fn try_from(raw: SystemSpecRepr) -> Result<Self> {
        let n = raw.n_wells;
        if raw.coupling.len() != n || raw.coupling.iter().any(|row| row.len() != n) {
            return Err(Error::Config(format!("coupling must be a {n}x{n} matrix")));
        }
        let flat = raw.coupling.into_iter().flatten().collect();
        SystemSpec::new(n, flat, raw.chi, raw.pump, raw.loss)
    }
}

impl From<SystemSpec> for SystemSpecRepr {
    fn from(spec: SystemSpec) -> Self {
        let n = spec.n_wells;
        let coupling = spec.coupling.chunks(n).map(<[f64]>::to_vec).collect();
        SystemSpecRepr {
            n_wells: n,
            coupling,
            chi: spec.chi,
            pump: spec.pump,
            loss: spec.loss,
        }
    }
}

/// Which well of the triangle is damped. The pump always sits at the first
/// well; damping either of the two unpumped wells gives the same system up
/// to relabeling, so the second well stands in for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimerConfig {
    PumpedWell,
    OtherWell,
}

impl TrimerConfig {
    /// Zero-based index of the damped well.
    pub fn damped_index(self) -> usize {
        match self {
            TrimerConfig::PumpedWell => 0,
            TrimerConfig::OtherWell => 1,
        }
    }
}

impl SystemSpec {
    /// Builds a validated system. `coupling` is row-major `n × n`.
    pub fn new(
        n_wells: usize,
        coupling: Vec<f64>,
        chi: f64,
        pump: Vec<Complex64>,
        loss: Vec<f64>,
    ) -> Result<Self> {
        if n_wells == 0 {
            return Err(Error::ParameterDomain("n_wells must be positive".into()));
        }
        if coupling.len() != n_wells * n_wells {
            return Err(Error::Config(format!(
                "coupling has {} entries, expected {}",
                coupling.len(),
                n_wells * n_wells
            )));
        }
        if pump.len() != n_wells || loss.len() != n_wells {
            return Err(Error::Config(format!(
                "pump and loss must have {n_wells} entries (got {} and {})",
                pump.len(),
                loss.len()
            )));
        }
        let all_finite = chi.is_finite()
            && coupling.iter().all(|v| v.is_finite())
            && loss.iter().all(|v| v.is_finite())
            && pump.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !all_finite {
            return Err(Error::NumericDomain("system parameters"));
        }
        if chi < 0.0 {
            return Err(Error::ParameterDomain(format!("chi = {chi} must be >= 0")));
        }
        if let Some(g) = loss.iter().find(|&&g| g < 0.0) {
            return Err(Error::ParameterDomain(format!("loss rate {g} must be >= 0")));
        }
        for i in 0..n_wells {
            if coupling[i * n_wells + i] != 0.0 {
                return Err(Error::ParameterDomain(format!(
                    "coupling diagonal entry {i} must be zero"
                )));
            }
            for j in 0..n_wells {
                let jij = coupling[i * n_wells + j];
                if jij < 0.0 {
                    return Err(Error::ParameterDomain(format!(
                        "coupling J[{i}][{j}] = {jij} must be >= 0"
                    )));
                }
                if jij != coupling[j * n_wells + i] {
                    return Err(Error::ParameterDomain(format!(
                        "coupling is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            n_wells,
            coupling,
            chi,
            pump,
            loss,
        })
    }

    pub fn n_wells(&self) -> usize {
        self.n_wells
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n_wells + j]
    }

    pub fn pump(&self) -> &[Complex64] {
        &self.pump
    }

    pub fn loss(&self) -> &[f64] {
        &self.loss
    }

    /// True when at least one well couples to the bath.
    pub fn is_dissipative(&self) -> bool {
        self.loss.iter().any(|&g| g > 0.0)
    }

    /// Fails unless a steady state can exist (some well is damped).
    pub fn require_dissipation(&self) -> Result<()> {
        if self.is_dissipative() {
            Ok(())
        } else {
            Err(Error::ParameterDomain(
                "steady state requested but no well is damped".into(),
            ))
        }
    }

    /// Checked drift evaluation.
    pub fn drift(&self, alpha: &[Complex64]) -> Result<Vec<Complex64>> {
        if alpha.len() != self.n_wells {
            return Err(Error::Config(format!(
                "state has {} amplitudes for {} wells",
                alpha.len(),
                self.n_wells
            )));
        }
        if !alpha.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NumericDomain("drift input"));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_wells];
        self.drift_into(alpha, &mut out);
        Ok(out)
    }

    /// Deterministic part of `dα/dt`, written into `out`. No validation; this
    /// is the integrator's inner loop.
    #[inline]
    pub fn drift_into(&self, alpha: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_wells;
        for i in 0..n {
            let a = alpha[i];
            let row = &self.coupling[i * n..(i + 1) * n];
            let mut hop = Complex64::new(0.0, 0.0);
            for (jij, aj) in row.iter().zip(alpha) {
                hop += aj * *jij;
            }
            out[i] = self.pump[i] - a * self.loss[i] - I * (2.0 * self.chi * a.norm_sqr()) * a
                + I * hop;
        }
    }

    /// Per-well noise amplitude `√γ_i`; undamped wells carry no noise.
    pub fn noise_amplitudes(&self) -> Vec<f64> {
        self.loss.iter().map(|g| g.sqrt()).collect()
    }
}

/// Triangle with all-to-all tunneling `j`, pump at the first well and loss
/// `gamma` at the well selected by `config`.
pub fn make_trimer(
    j: f64,
    chi: f64,
    epsilon: Complex64,
    gamma: f64,
    config: TrimerConfig,
) -> Result<SystemSpec> {
    if !(j > 0.0) {
        return Err(Error::ParameterDomain(format!("J = {j} must be > 0")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::ParameterDomain(format!("gamma = {gamma} must be >= 0")));
    }
    if !(chi >= 0.0) {
        return Err(Error::ParameterDomain(format!("chi = {chi} must be >= 0")));
    }
    let coupling = (0..9)
        .map(|k| if k / 3 == k % 3 { 0.0 } else { j })
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut loss = vec![0.0; 3];
    loss[config.damped_index()] = gamma;
    SystemSpec::new(3, coupling, chi, vec![epsilon, zero, zero], loss)
}
