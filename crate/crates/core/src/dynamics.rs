// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-realization integration of the truncated Wigner equations.
//!
//! The noise is additive (its amplitude does not depend on the state), so the
//! Itô and Stratonovich readings coincide and a Heun predictor-corrector on
//! the drift with the Wiener increment added once per step is consistent.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemSpec;

/// Default step size in units of `1/γ`.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default spacing of recorded samples.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.1;
/// Trajectories whose amplitude exceeds this are treated as divergent.
pub const DEFAULT_DIVERGENCE_GUARD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Heun on the drift, full additive increment once per step.
    #[default]
    HeunAdditive,
    EulerMaruyama,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub alpha: Vec<Complex64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_guard")]
    pub divergence_guard: f64,
}

fn default_guard() -> f64 {
    DEFAULT_DIVERGENCE_GUARD
}

impl IntegratorConfig {
    /// Config whose samples are `sample_interval` apart. The interval must be
    /// an integer number of steps and must tile `t_final` exactly.
    pub fn new(dt: f64, t_final: f64, sample_interval: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("dt = {dt} must be positive")));
        }
        let ratio = sample_interval / dt;
        let sample_every = ratio.round();
        if sample_every < 1.0 || (ratio - sample_every).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "sample interval {sample_interval} is not a whole number of steps of {dt}"
            )));
        }
        let cfg = Self {
            dt,
            t_final,
            sample_every: sample_every as usize,
            scheme: Scheme::default(),
            divergence_guard: DEFAULT_DIVERGENCE_GUARD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::Config("divergence_guard must be positive".into()));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::Config(format!(
                "t_final = {} is not a whole number of steps of {}",
                self.t_final, self.dt
            )));
        }
        if (steps.round() as usize) % self.sample_every != 0 {
            return Err(Error::Config(format!(
                "sample interval {} does not divide t_final = {}",
                self.sample_interval(),
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }

    /// Number of recorded samples, including `t = 0`.
    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_every + 1
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.n_samples())
            .map(|k| (k * self.sample_every) as f64 * self.dt)
            .collect()
    }
}

/// Draws one Wigner vacuum sample: each `α_i = (u + iv)/2` with `u, v`
/// independent standard normals.
pub fn sample_vacuum<R: Rng + ?Sized>(n_wells: usize, rng: &mut R) -> TrajectoryState {
    let alpha = (0..n_wells).map(|_| complex_normal(rng) * 0.5).collect();
    TrajectoryState { alpha, t: 0.0 }
}

/// `u + iv` with `u, v` standard normal, so `E|z|² = 2`.
#[inline]
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u: f64 = rng.sample(StandardNormal);
    let v: f64 = rng.sample(StandardNormal);
    Complex64::new(u, v)
}

/// Reusable integrator for one system. Holds scratch buffers so the step loop
/// does not allocate.
pub struct Stepper<'a> {
    spec: &'a SystemSpec,
    scheme: Scheme,
    guard_sqr: f64,
    /// `(well, √γ)` for every damped well.
    noisy: Vec<(usize, f64)>,
    f0: Vec<Complex64>,
    f1: Vec<Complex64>,
    pred: Vec<Complex64>,
    dw: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(spec: &'a SystemSpec, scheme: Scheme, divergence_guard: f64) -> Self {
        let n = spec.n_wells();
        let zero = Complex64::new(0.0, 0.0);
        let noisy = spec
            .noise_amplitudes()
            .into_iter()
            .enumerate()
            .filter(|&(_, s)| s > 0.0)
            .collect();
        Self {
            spec,
            scheme,
            guard_sqr: divergence_guard * divergence_guard,
            noisy,
            f0: vec![zero; n],
            f1: vec![zero; n],
            pred: vec![zero; n],
            dw: vec![zero; n],
        }
    }

    pub fn from_config(spec: &'a SystemSpec, cfg: &IntegratorConfig) -> Self {
        Self::new(spec, cfg.scheme, cfg.divergence_guard)
    }

    /// Advances `state` by `dt` with a freshly drawn Wiener increment.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        state: &mut TrajectoryState,
        dt: f64,
        rng: &mut R,
    ) -> Result<()> {
        let scale = (0.5 * dt).sqrt();
        for &(i, amp) in &self.noisy {
            self.dw[i] = complex_normal(rng) * (amp * scale);
        }
        self.advance(state, dt, true)
    }

    /// Advances `state` by `dt` along the drift only.
    pub fn step_noiseless(&mut self, state: &mut TrajectoryState, dt: f64) -> Result<()> {
        self.advance(state, dt, false)
    }

    fn advance(&mut self, state: &mut TrajectoryState, dt: f64, noisy: bool) -> Result<()> {
        let alpha = &mut state.alpha;
        self.spec.drift_into(alpha, &mut self.f0);
        match self.scheme {
            Scheme::EulerMaruyama => {
                for (a, f) in alpha.iter_mut().zip(&self.f0) {
                    *a += f * dt;
                }
            }
            Scheme::HeunAdditive => {
                for ((p, a), f) in self.pred.iter_mut().zip(alpha.iter()).zip(&self.f0) {
                    *p = a + f * dt;
                }
                if noisy {
                    for &(i, _) in &self.noisy {
                        self.pred[i] += self.dw[i];
                    }
                }
                self.spec.drift_into(&self.pred, &mut self.f1);
                let half = 0.5 * dt;
                for ((a, f0), f1) in alpha.iter_mut().zip(&self.f0).zip(&self.f1) {
                    *a += (f0 + f1) * half;
                }
            }
        }
        if noisy {
            for &(i, _) in &self.noisy {
                alpha[i] += self.dw[i];
            }
        }
        state.t += dt;
        let worst = alpha.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        // NaN fails the comparison and is caught here as well.
        if !(worst <= self.guard_sqr) {
            return Err(Error::Divergence {
                t: state.t,
                magnitude: worst.sqrt(),
            });
        }
        Ok(())
    }
}

/// Advances a copy of `state` by one step of `scheme`.
pub fn step<R: Rng + ?Sized>(
    state: &TrajectoryState,
    spec: &SystemSpec,
    dt: f64,
    scheme: Scheme,
    rng: &mut R,
) -> Result<TrajectoryState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt = {dt} must be positive")));
    }
    let mut next = state.clone();
    Stepper::new(spec, scheme, DEFAULT_DIVERGENCE_GUARD).step(&mut next, dt, rng)?;
    Ok(next)
}

/// Integrates one stochastic trajectory from a vacuum sample, calling
/// `on_sample(k, alpha)` at every grid point `k` (including `t = 0`).
pub fn run_trajectory<R, F>(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
    mut on_sample: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &[Complex64]),
{
    let mut state = sample_vacuum(spec.n_wells(), rng);
    let mut stepper = Stepper::from_config(spec, cfg);
    on_sample(0, &state.alpha);
    for k in 1..cfg.n_samples() {
        for _ in 0..cfg.sample_every {
            stepper.step(&mut state, cfg.dt, rng)?;
        }
        state.t = (k * cfg.sample_every) as f64 * cfg.dt;
        on_sample(k, &state.alpha);
    }
    Ok(())
}

/// Noiseless time series on the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSeries {
    pub times: Vec<f64>,
    pub alpha: Vec<Vec<Complex64>>,
}

impl MeanFieldSeries {
    /// Classical populations `|α_i|²` at sample `k`. No vacuum correction.
    pub fn populations(&self, k: usize) -> Vec<f64> {
        self.alpha[k].iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn total(&self, k: usize) -> f64 {
        self.populations(k).iter().sum()
    }
}

/// Integrates the drift alone from `init`.
pub fn run_meanfield(
    spec: &SystemSpec,
    init: &[Complex64],
    cfg: &IntegratorConfig,
) -> Result<MeanFieldSeries> {
    cfg.validate()?;
    if init.len() != spec.n_wells() {
        return Err(Error::Config(format!(
            "initial state has {} amplitudes for {} wells",
            init.len(),
            spec.n_wells()
        )));
    }
    if !init.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NumericDomain("mean-field initial condition"));
    }
    let mut state = TrajectoryState {
        alpha: init.to_vec(),
        t: 0.0,
    };
    let mut stepper = Stepper::from_config(spec, cfg);
    let times = cfg.sample_times();
    let mut alpha = Vec::with_capacity(times.len());
    alpha.push(state.alpha.clone());
    for &t in &times[1..] {
        for _ in 0..cfg.sample_every {
            stepper.step_noiseless(&mut state, cfg.dt)?;
        }
        state.t = t;
        alpha.push(state.alpha.clone());
    }
    Ok(MeanFieldSeries { times, alpha })
}
