// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! The `run` command: ensemble integration and all analysis artifacts.

use std::path::{Path, PathBuf};

use trimer_core::correlations::{classify, classify_with_margin, CorrelationReport};
use trimer_core::ensemble::{run_ensemble, Ensemble, GaussianMoments, RunStatus};

use crate::config::{Format, Resolved, RunConfig, SystemChoice};
use crate::error::CliError;
use crate::output::{self, ClassificationEntry, Manifest, MANIFEST_VERSION};

/// Command-line values that replace fields of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub n_traj: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.preset {
            cfg.system = SystemChoice::Preset(p.clone());
        }
        if let Some(n) = self.n_traj {
            cfg.ensemble.n_traj = n;
        }
        if let Some(s) = self.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.ensemble.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
    }
}

/// Loads `path` (or starts from the preset alone) and applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match (path, &overrides.preset) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(id)) => RunConfig::preset(id),
        (None, None) => {
            return Err(CliError::Config(
                "either --config or --preset is required".into(),
            ))
        }
    };
    overrides.apply(&mut cfg);
    Ok(cfg)
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Moments plus optional replica errors, on a common time grid.
pub(crate) struct Series<'a> {
    pub moments: Vec<GaussianMoments>,
    pub ensemble: Option<&'a Ensemble>,
}

impl Series<'_> {
    fn index(&self, t: f64) -> Result<usize, CliError> {
        self.moments
            .iter()
            .position(|g| (g.t - t).abs() < 1e-9)
            .ok_or_else(|| CliError::Data(format!("no sample at t = {t}")))
    }

    fn report(&self, r: &Resolved, t: f64) -> Result<CorrelationReport, CliError> {
        let k = self.index(t)?;
        Ok(match self.ensemble {
            Some(ens) => CorrelationReport::from_ensemble(ens, k, &r.criteria)?,
            None => CorrelationReport::evaluate(&self.moments[k], &r.criteria)?,
        })
    }
}

/// Writes the requested artifacts and returns their file names.
pub(crate) fn write_artifacts(r: &Resolved, series: &Series, title: &str) -> Result<Vec<String>, CliError> {
    let dir = r.out_dir();
    let mut files = Vec::new();
    let times: Vec<f64> = series.moments.iter().map(|g| g.t).collect();

    if r.wants(Format::Populations) {
        let n = r.spec.n_wells();
        let mut pops = Vec::new();
        let mut errs = Vec::new();
        for (k, g) in series.moments.iter().enumerate() {
            pops.push(g.populations());
            errs.push(match series.ensemble {
                Some(ens) => (0..n)
                    .map(|i| Ok(ens.estimate(k, |g| Ok(g.population(i)))?.std_err))
                    .collect::<Result<Vec<_>, CliError>>()?,
                None => vec![0.0; n],
            });
        }
        let (h, rows) = output::populations_table(&times, &pops, &errs);
        output::write_csv(&dir.join("populations.csv"), &h, &rows)?;
        files.push("populations.csv".into());
    }

    if r.wants(Format::Moments) {
        let errors = match series.ensemble {
            Some(ens) => Some(output::moment_errors(ens)?),
            None => None,
        };
        let (h, rows) = output::moments_table(&series.moments, errors.as_deref());
        output::write_csv(&dir.join("moments.csv"), &h, &rows)?;
        files.push("moments.csv".into());
    }

    let needs_reports = [Format::Criteria, Format::Tables, Format::Classification]
        .iter()
        .any(|f| r.wants(*f));
    if !needs_reports {
        return Ok(files);
    }
    let reports = r
        .report_times
        .iter()
        .map(|&t| series.report(r, t))
        .collect::<Result<Vec<_>, _>>()?;

    if r.wants(Format::Criteria) {
        let (h, rows) = output::criteria_table(&reports, r.config.analysis.scan_step_deg);
        output::write_csv(&dir.join("criteria.csv"), &h, &rows)?;
        files.push("criteria.csv".into());
    }
    if r.wants(Format::Tables) {
        let md = output::tables_markdown(title, &r.times, r.config.analysis.band, &reports);
        output::write_text(&dir.join("tables.md"), &md)?;
        files.push("tables.md".into());
    }
    if r.wants(Format::Classification) {
        let z = r.config.analysis.significance;
        let mut entries = Vec::new();
        for &t in &r.times {
            let Some(rep) = reports.iter().find(|x| (x.t - t).abs() < 1e-9) else {
                continue;
            };
            match (classify(rep), classify_with_margin(rep, z)) {
                (Ok(flags), Ok(significant)) => entries.push(ClassificationEntry {
                    t,
                    flags,
                    z,
                    significant,
                }),
                (Err(e), _) | (_, Err(e)) => {
                    log::warn!("classification skipped at t = {t}: {e}");
                }
            }
        }
        output::write_json(&dir.join("classification.json"), &entries)?;
        files.push("classification.json".into());
    }
    Ok(files)
}

pub(crate) fn manifest(
    command: &str,
    r: &Resolved,
    ens: Option<&Ensemble>,
    mut files: Vec<String>,
) -> Manifest {
    files.push("manifest.json".into());
    let (divergent, status) = match ens {
        Some(e) => (e.total.divergent_count(), e.status),
        None => (0, RunStatus::Ok),
    };
    Manifest {
        manifest_version: MANIFEST_VERSION,
        command: command.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        preset: r.preset.clone(),
        config: r.config.clone(),
        seed: r.ensemble.seed,
        n_traj: r.ensemble.n_traj,
        divergent_count: divergent,
        divergent_fraction: ens.map_or(0.0, Ensemble::divergent_fraction),
        status,
        files,
    }
}

fn title(r: &Resolved) -> String {
    match &r.preset {
        Some(p) => format!("Correlations for preset {p}"),
        None => "Correlations for custom system".into(),
    }
}

/// Runs the ensemble and writes every artifact. A run whose divergence
/// fraction marks it invalid still writes its outputs before failing.
pub fn run(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let r = cfg.resolve()?;
    create_dir(r.out_dir())?;
    log::info!(
        "running {} trajectories to t = {} (dt = {}) into {}",
        r.ensemble.n_traj,
        r.integrator.t_final,
        r.integrator.dt,
        r.out_dir().display()
    );
    let ens = run_ensemble(&r.spec, &r.integrator, &r.ensemble)?;
    let written = (0..ens.times().len())
        .map(|k| ens.moments_at_index(k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
        .and_then(|moments| {
            let series = Series {
                moments,
                ensemble: Some(&ens),
            };
            write_artifacts(&r, &series, &title(&r))
        });
    let files = match (written, ens.status) {
        (Ok(files), _) => files,
        // Too few surviving trajectories to analyse; the manifest still
        // records the failure.
        (Err(e), RunStatus::Invalid) => {
            log::warn!("artifacts not written: {e}");
            Vec::new()
        }
        (Err(e), _) => return Err(e),
    };
    let m = manifest("run", &r, Some(&ens), files);
    output::write_json(&r.out_dir().join("manifest.json"), &m)?;
    match ens.status {
        RunStatus::Invalid => Err(CliError::InvalidRun(format!(
            "{} of {} trajectories diverged ({:.2}%)",
            m.divergent_count,
            m.n_traj,
            100.0 * m.divergent_fraction
        ))),
        RunStatus::Warning => {
            log::warn!(
                "{} trajectories diverged ({:.3}%)",
                m.divergent_count,
                100.0 * m.divergent_fraction
            );
            Ok(m)
        }
        RunStatus::Ok => Ok(m),
    }
}
