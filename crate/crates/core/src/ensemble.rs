// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Trajectory ensembles and their first and second phase-space moments.
//!
//! Every trajectory `k` draws from its own ChaCha stream `(seed, k)` and
//! belongs to replica `k mod R`. Trajectories are grouped into fixed work
//! units that are merged in a canonical order, so results are bit-identical
//! for any worker count.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_trajectory, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::SystemSpec;

/// Trajectories per work unit within one replica.
const UNIT_SIZE: u64 = 256;

/// Divergent fraction above which a run carries a warning.
pub const DIVERGENCE_WARN_FRACTION: f64 = 1e-3;
/// Divergent fraction above which a run is invalid.
pub const DIVERGENCE_INVALID_FRACTION: f64 = 5e-2;

/// Packed index of `(i, j)`, `i <= j`, in an upper triangle of order `n`.
#[inline]
fn tri(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

/// Running sums of `α_i`, `α_iα_j` and `conj(α_i)α_j` per sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    n_wells: usize,
    times: Vec<f64>,
    count: u64,
    divergent_count: u64,
    sum_alpha: Vec<Complex64>,
    sum_sym: Vec<Complex64>,
    sum_herm: Vec<Complex64>,
}

impl MomentAccumulator {
    pub fn new(n_wells: usize, times: Vec<f64>) -> Self {
        let n_tri = n_wells * (n_wells + 1) / 2;
        let zero = Complex64::new(0.0, 0.0);
        Self {
            n_wells,
            count: 0,
            divergent_count: 0,
            sum_alpha: vec![zero; times.len() * n_wells],
            sum_sym: vec![zero; times.len() * n_tri],
            sum_herm: vec![zero; times.len() * n_tri],
            times,
        }
    }

    pub fn n_wells(&self) -> usize {
        self.n_wells
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn divergent_count(&self) -> u64 {
        self.divergent_count
    }

    fn n_tri(&self) -> usize {
        self.n_wells * (self.n_wells + 1) / 2
    }

    /// Adds one complete trajectory; `samples` holds `n_wells` amplitudes per
    /// sample time, time-major.
    pub fn add_trajectory(&mut self, samples: &[Complex64]) {
        let n = self.n_wells;
        let n_tri = self.n_tri();
        assert_eq!(samples.len(), self.times.len() * n, "trajectory length");
        for (k, alpha) in samples.chunks_exact(n).enumerate() {
            let lin = &mut self.sum_alpha[k * n..(k + 1) * n];
            for (s, a) in lin.iter_mut().zip(alpha) {
                *s += a;
            }
            let sym = &mut self.sum_sym[k * n_tri..(k + 1) * n_tri];
            let herm = &mut self.sum_herm[k * n_tri..(k + 1) * n_tri];
            let mut p = 0;
            for i in 0..n {
                let ai = alpha[i];
                let ai_conj = ai.conj();
                for aj in &alpha[i..] {
                    sym[p] += ai * aj;
                    herm[p] += ai_conj * aj;
                    p += 1;
                }
            }
        }
        self.count += 1;
    }

    pub fn record_divergence(&mut self) {
        self.divergent_count += 1;
    }

    /// Folds `other` into `self`. Both must share a sample grid.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if self.n_wells != other.n_wells || self.times != other.times {
            return Err(Error::Config(
                "cannot merge accumulators with different wells or sample grids".into(),
            ));
        }
        for (a, b) in self.sum_alpha.iter_mut().zip(&other.sum_alpha) {
            *a += b;
        }
        for (a, b) in self.sum_sym.iter_mut().zip(&other.sum_sym) {
            *a += b;
        }
        for (a, b) in self.sum_herm.iter_mut().zip(&other.sum_herm) {
            *a += b;
        }
        self.count += other.count;
        self.divergent_count += other.divergent_count;
        Ok(())
    }

    /// Index of `t` on the sample grid.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(Error::OffGrid(t))
    }

    pub fn moments_at(&self, t: f64) -> Result<GaussianMoments> {
        self.moments_at_index(self.time_index(t)?)
    }

    /// Centered moments at grid index `k`.
    pub fn moments_at_index(&self, k: usize) -> Result<GaussianMoments> {
        if k >= self.times.len() {
            return Err(Error::OffGrid(k as f64));
        }
        if self.count == 0 {
            return Err(Error::Config("no trajectories accumulated".into()));
        }
        let n = self.n_wells;
        let n_tri = self.n_tri();
        let inv = 1.0 / self.count as f64;
        let m: Vec<Complex64> = self.sum_alpha[k * n..(k + 1) * n]
            .iter()
            .map(|s| s * inv)
            .collect();
        let sym = &self.sum_sym[k * n_tri..(k + 1) * n_tri];
        let herm = &self.sum_herm[k * n_tri..(k + 1) * n_tri];
        let mut s = vec![Complex64::new(0.0, 0.0); n * n];
        let mut c = s.clone();
        for i in 0..n {
            for j in i..n {
                let p = tri(n, i, j);
                let sij = sym[p] * inv - m[i] * m[j];
                let cij = herm[p] * inv - m[i].conj() * m[j];
                s[i * n + j] = sij;
                s[j * n + i] = sij;
                c[i * n + j] = cij;
                c[j * n + i] = cij.conj();
            }
            // Diagonal of a Hermitian block is real by construction.
            c[i * n + i].im = 0.0;
        }
        Ok(GaussianMoments {
            n_wells: n,
            t: self.times[k],
            n_samples: self.count,
            m,
            s,
            c,
        })
    }
}

/// Centered first and second moments at one time. With `δα = α − m`:
/// `S_ij = E[δα_i δα_j]` and `C_ij = E[conj(δα_i) δα_j]`, both symmetric
/// ordered (vacuum has `C = I/2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub n_wells: usize,
    pub t: f64,
    pub n_samples: u64,
    pub m: Vec<Complex64>,
    /// Row-major, symmetric.
    pub s: Vec<Complex64>,
    /// Row-major, Hermitian.
    pub c: Vec<Complex64>,
}

impl GaussianMoments {
    /// Exact vacuum of `n_wells` modes.
    pub fn vacuum(n_wells: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut c = vec![zero; n_wells * n_wells];
        for i in 0..n_wells {
            c[i * n_wells + i] = Complex64::new(0.5, 0.0);
        }
        Self {
            n_wells,
            t: 0.0,
            n_samples: 0,
            m: vec![zero; n_wells],
            s: vec![zero; n_wells * n_wells],
            c,
        }
    }

    #[inline]
    pub fn s(&self, i: usize, j: usize) -> Complex64 {
        self.s[i * self.n_wells + j]
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> Complex64 {
        self.c[i * self.n_wells + j]
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n_wells {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n_wells: self.n_wells,
            })
        }
    }

    /// `N_i = E|α_i|² − 1/2`.
    pub fn population(&self, i: usize) -> f64 {
        self.c(i, i).re + self.m[i].norm_sqr() - 0.5
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_wells).map(|i| self.population(i)).collect()
    }
}

/// `N_i` of a moment set.
pub fn population(g: &GaussianMoments, i: usize) -> f64 {
    g.population(i)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_traj: u64,
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
    /// Replica sub-ensembles used for error bars.
    pub replicas: usize,
}

impl EnsembleConfig {
    pub fn new(n_traj: u64, seed: u64) -> Self {
        Self {
            n_traj,
            seed,
            workers: 1,
            replicas: 10,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::Config("n_traj must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.replicas < 2 {
            return Err(Error::Config("replicas must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// More than 0.1% of trajectories diverged.
    Warning,
    /// More than 5% of trajectories diverged.
    Invalid,
}

impl RunStatus {
    fn from_counts(divergent: u64, total: u64) -> Self {
        let fraction = divergent as f64 / total.max(1) as f64;
        if fraction > DIVERGENCE_INVALID_FRACTION {
            RunStatus::Invalid
        } else if fraction > DIVERGENCE_WARN_FRACTION {
            RunStatus::Warning
        } else {
            RunStatus::Ok
        }
    }
}

/// Value of a derived quantity with its replica standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Evaluated on the full ensemble.
    pub value: f64,
    /// Standard deviation of the replica values over `√R`.
    pub std_err: f64,
}

/// Replica standard errors of every moment entry. Real and imaginary parts
/// of each complex entry carry the errors of the corresponding components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub t: f64,
    pub m: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub c: Vec<Complex64>,
}

/// Completed ensemble: the merged accumulator and its replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub total: MomentAccumulator,
    pub replicas: Vec<MomentAccumulator>,
    pub status: RunStatus,
}

fn std_err(values: &[f64]) -> f64 {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (var / r).sqrt()
}

impl Ensemble {
    /// Builds an ensemble view from replica accumulators merged in order.
    pub fn from_replicas(replicas: Vec<MomentAccumulator>) -> Result<Self> {
        let first = replicas
            .first()
            .ok_or_else(|| Error::Config("no replicas".into()))?;
        let mut total = MomentAccumulator::new(first.n_wells, first.times.clone());
        for r in &replicas {
            total.merge(r)?;
        }
        let status = RunStatus::from_counts(
            total.divergent_count,
            total.count + total.divergent_count,
        );
        Ok(Self {
            total,
            replicas,
            status,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.total.times()
    }

    pub fn moments_at(&self, t: f64) -> Result<GaussianMoments> {
        self.total.moments_at(t)
    }

    pub fn moments_at_index(&self, k: usize) -> Result<GaussianMoments> {
        self.total.moments_at_index(k)
    }

    pub fn divergent_fraction(&self) -> f64 {
        let d = self.total.divergent_count as f64;
        d / (d + self.total.count as f64).max(1.0)
    }

    /// Evaluates `f` on the full ensemble and on every replica.
    pub fn estimate<F>(&self, k: usize, f: F) -> Result<Estimate>
    where
        F: Fn(&GaussianMoments) -> Result<f64>,
    {
        let value = f(&self.total.moments_at_index(k)?)?;
        let per_replica = self
            .replicas
            .iter()
            .map(|r| r.moments_at_index(k).and_then(|g| f(&g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Estimate {
            value,
            std_err: std_err(&per_replica),
        })
    }

    pub fn moment_errors(&self, k: usize) -> Result<ErrorEstimate> {
        let per: Vec<GaussianMoments> = self
            .replicas
            .iter()
            .map(|r| r.moments_at_index(k))
            .collect::<Result<_>>()?;
        let errs = |get: &dyn Fn(&GaussianMoments) -> &[Complex64]| -> Vec<Complex64> {
            let len = get(&per[0]).len();
            (0..len)
                .map(|p| {
                    let re: Vec<f64> = per.iter().map(|g| get(g)[p].re).collect();
                    let im: Vec<f64> = per.iter().map(|g| get(g)[p].im).collect();
                    Complex64::new(std_err(&re), std_err(&im))
                })
                .collect()
        };
        Ok(ErrorEstimate {
            t: self.total.times[k],
            m: errs(&|g| &g.m),
            s: errs(&|g| &g.s),
            c: errs(&|g| &g.c),
        })
    }
}

/// ChaCha stream of trajectory `k` under `seed`.
pub fn trajectory_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// One work unit: trajectories `replica + R·(unit·UNIT_SIZE + m)`.
fn run_unit(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    ens: &EnsembleConfig,
    replica: u64,
    unit: u64,
) -> MomentAccumulator {
    let n = spec.n_wells();
    let r = ens.replicas as u64;
    let mut acc = MomentAccumulator::new(n, cfg.sample_times());
    let mut buffer = vec![Complex64::new(0.0, 0.0); cfg.n_samples() * n];
    for m in 0..UNIT_SIZE {
        let k = replica + r * (unit * UNIT_SIZE + m);
        if k >= ens.n_traj {
            break;
        }
        let mut rng = trajectory_rng(ens.seed, k);
        let outcome = run_trajectory(spec, cfg, &mut rng, |s, alpha| {
            buffer[s * n..(s + 1) * n].copy_from_slice(alpha);
        });
        match outcome {
            Ok(()) => acc.add_trajectory(&buffer),
            Err(Error::Divergence { t, magnitude }) => {
                log::debug!("trajectory {k} diverged at t = {t} (|alpha| = {magnitude:e})");
                acc.record_divergence();
            }
            Err(e) => unreachable!("trajectory integration failed: {e}"),
        }
    }
    acc
}

/// Runs `ens.n_traj` trajectories and accumulates their moments on the
/// sample grid of `cfg`.
pub fn run_ensemble(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    ens: &EnsembleConfig,
) -> Result<Ensemble> {
    cfg.validate()?;
    ens.validate()?;
    let r = ens.replicas as u64;
    let per_replica = ens.n_traj.div_ceil(r);
    let units_per_replica = per_replica.div_ceil(UNIT_SIZE).max(1);
    let work: Vec<(u64, u64)> = (0..r)
        .flat_map(|rep| (0..units_per_replica).map(move |u| (rep, u)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ens.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let times = cfg.sample_times();
    let mut replicas: Vec<MomentAccumulator> = (0..r)
        .map(|_| MomentAccumulator::new(spec.n_wells(), times.clone()))
        .collect();
    // Bounded window keeps memory flat; merging stays in (replica, unit) order.
    let window = (4 * ens.workers).max(8);
    for chunk in work.chunks(window) {
        let done: Vec<MomentAccumulator> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(rep, unit)| run_unit(spec, cfg, ens, rep, unit))
                .collect()
        });
        for (&(rep, _), acc) in chunk.iter().zip(&done) {
            replicas[rep as usize].merge(acc)?;
        }
    }
    let ensemble = Ensemble::from_replicas(replicas)?;
    let divergent = ensemble.total.divergent_count;
    match ensemble.status {
        RunStatus::Ok if divergent > 0 => {
            log::info!("{divergent} divergent trajectories excluded");
        }
        RunStatus::Warning => log::warn!(
            "{divergent} of {} trajectories diverged and were excluded",
            ens.n_traj
        ),
        RunStatus::Invalid => log::error!(
            "{divergent} of {} trajectories diverged; run is invalid",
            ens.n_traj
        ),
        _ => {}
    }
    Ok(ensemble)
}
