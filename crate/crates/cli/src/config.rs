// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: JSON schema, named presets and resolution into
//! engine types.
//!
//! Every section is optional and falls back to its defaults, so
//! `{"system": {"preset": "loss_at_1_chi3"}}` is a complete config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trimer_core::correlations::{standard_criteria, Criterion};
use trimer_core::dynamics::{IntegratorConfig, Scheme, DEFAULT_DT, DEFAULT_SAMPLE_INTERVAL};
use trimer_core::ensemble::EnsembleConfig;
use trimer_core::model::{make_trimer, SystemSpec, TrimerConfig};
use trimer_core::oracle::{FockConfig, DEFAULT_DIM_CAP};
use trimer_core::Complex64;

use crate::error::CliError;

/// Pump, loss and tunnelling shared by all presets.
pub const PRESET_EPSILON: f64 = 10.0;
pub const PRESET_GAMMA: f64 = 1.0;
pub const PRESET_J: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub chi: f64,
    pub config: TrimerConfig,
    /// Default evaluation time for correlation tables.
    pub eval_time: f64,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        id: "loss_at_2_chi2",
        chi: 1e-2,
        config: TrimerConfig::OtherWell,
        eval_time: 100.0,
    },
    Preset {
        id: "loss_at_2_chi3",
        chi: 1e-3,
        config: TrimerConfig::OtherWell,
        eval_time: 100.0,
    },
    Preset {
        id: "loss_at_1_chi2",
        chi: 1e-2,
        config: TrimerConfig::PumpedWell,
        eval_time: 40.0,
    },
    Preset {
        id: "loss_at_1_chi3",
        chi: 1e-3,
        config: TrimerConfig::PumpedWell,
        eval_time: 60.0,
    },
];

impl Preset {
    pub fn find(id: &str) -> Option<Preset> {
        PRESETS.iter().copied().find(|p| p.id == id)
    }

    pub fn spec(&self) -> SystemSpec {
        make_trimer(
            PRESET_J,
            self.chi,
            Complex64::new(PRESET_EPSILON, 0.0),
            PRESET_GAMMA,
            self.config,
        )
        .expect("preset parameters are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemChoice {
    Preset(String),
    Spec(SystemSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    /// Defaults to the latest evaluation time.
    pub t_final: Option<f64>,
    pub sample_interval: f64,
    pub scheme: Scheme,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: None,
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            scheme: Scheme::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_traj: u64,
    pub seed: u64,
    pub workers: usize,
    pub replicas: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_traj: 100_000,
            seed: 1,
            workers: 1,
            replicas: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Times at which criteria are evaluated. Defaults to the preset's
    /// table time, or `t_final` for custom systems.
    pub times: Option<Vec<f64>>,
    /// Criteria are also evaluated at `t ± band` when on the grid.
    pub band: f64,
    /// Criterion labels such as `DS12` or `OBR312`; all by default.
    pub criteria: Option<Vec<String>>,
    /// Spacing in whole degrees of angle-scan rows in `criteria.csv`;
    /// none are written when absent.
    pub scan_step_deg: Option<u32>,
    /// Standard errors of margin used by the significance-aware flags.
    pub significance: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            times: None,
            band: 1.0,
            criteria: None,
            scan_step_deg: None,
            significance: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Populations,
    Moments,
    Criteria,
    Tables,
    Classification,
}

pub const ALL_FORMATS: [Format; 5] = [
    Format::Populations,
    Format::Moments,
    Format::Criteria,
    Format::Tables,
    Format::Classification,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: ALL_FORMATS.to_vec(),
        }
    }
}

/// Settings of the exact master-equation engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n_max: usize,
    pub dt: f64,
    pub dim_cap: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            n_max: 5,
            dt: 0.01,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemChoice,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

impl RunConfig {
    pub fn preset(id: &str) -> Self {
        Self {
            system: SystemChoice::Preset(id.to_string()),
            integrator: IntegratorSection::default(),
            ensemble: EnsembleSection::default(),
            analysis: AnalysisSection::default(),
            output: OutputSection::default(),
            oracle: OracleSection::default(),
        }
    }

    /// Parses a config, or the `config` member of a run manifest.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        let preset = value.get("preset").and_then(|p| p.as_str()).map(String::from);
        let (value, prefix) = match value.get("config") {
            Some(inner) if value.get("manifest_version").is_some() => (inner.clone(), "config."),
            _ => (value, ""),
        };
        let mut cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            CliError::Config(format!("{prefix}{path}: {}", e.inner()))
        })?;
        // A manifest stores the expanded spec; keep the preset name when it
        // still describes the same system.
        if let (Some(id), SystemChoice::Spec(spec)) = (preset, &cfg.system) {
            if Preset::find(&id).is_some_and(|p| p.spec() == *spec) {
                cfg.system = SystemChoice::Preset(id);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// A validated config with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    /// Fully explicit config; the system is inlined.
    pub config: RunConfig,
    pub preset: Option<String>,
    pub spec: SystemSpec,
    pub integrator: IntegratorConfig,
    pub ensemble: EnsembleConfig,
    pub times: Vec<f64>,
    /// `times` plus on-grid band neighbours, sorted.
    pub report_times: Vec<f64>,
    pub criteria: Vec<Criterion>,
}

fn config_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    let msg = msg.to_string();
    let msg = msg.strip_prefix("invalid configuration: ").unwrap_or(&msg);
    CliError::Config(format!("{path}: {msg}"))
}

fn on_grid(t: f64, interval: f64) -> bool {
    let r = t / interval;
    (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let (spec, preset) = match &self.system {
            SystemChoice::Preset(id) => {
                let p = Preset::find(id).ok_or_else(|| {
                    let known: Vec<&str> = PRESETS.iter().map(|p| p.id).collect();
                    config_err("system.preset", format!("unknown preset {id:?}; known: {known:?}"))
                })?;
                (p.spec(), Some(p))
            }
            SystemChoice::Spec(spec) => (spec.clone(), None),
        };
        spec.require_dissipation()
            .map_err(|e| config_err("system", e))?;

        let a = &self.analysis;
        let times = match &a.times {
            Some(t) if t.is_empty() => return Err(config_err("analysis.times", "must not be empty")),
            Some(t) => t.clone(),
            None => match (preset, self.integrator.t_final) {
                (Some(p), _) => vec![p.eval_time],
                (None, Some(tf)) => vec![tf],
                (None, None) => {
                    return Err(config_err(
                        "integrator.t_final",
                        "required for custom systems without analysis.times",
                    ))
                }
            },
        };
        for (i, t) in times.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(config_err(&format!("analysis.times[{i}]"), format!("{t} must be a non-negative time")));
            }
        }
        let latest = times.iter().copied().fold(0.0, f64::max);
        let t_final = self.integrator.t_final.unwrap_or(latest);

        let i = &self.integrator;
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            return Err(config_err("integrator.dt", format!("{} must be positive", i.dt)));
        }
        if !(i.sample_interval > 0.0 && i.sample_interval.is_finite()) {
            return Err(config_err(
                "integrator.sample_interval",
                format!("{} must be positive", i.sample_interval),
            ));
        }
        if !(t_final > 0.0) {
            return Err(config_err("integrator.t_final", format!("{t_final} must be positive")));
        }
        for (k, &t) in times.iter().enumerate() {
            if !on_grid(t, i.sample_interval) {
                return Err(config_err(
                    &format!("analysis.times[{k}]"),
                    format!("{t} is not a multiple of the sample interval {}", i.sample_interval),
                ));
            }
        }
        let integrator = IntegratorConfig::new(i.dt, t_final, i.sample_interval)
            .map(|c| c.with_scheme(i.scheme))
            .map_err(|e| config_err("integrator", e))?;

        let interval = integrator.sample_interval();
        for (k, &t) in times.iter().enumerate() {
            if t > t_final + 1e-9 || !on_grid(t, interval) {
                return Err(config_err(
                    &format!("analysis.times[{k}]"),
                    format!("{t} is not on the sample grid (interval {interval}, t_final {t_final})"),
                ));
            }
        }
        if !(a.band >= 0.0 && a.band.is_finite()) || !on_grid(a.band, interval) {
            return Err(config_err(
                "analysis.band",
                format!("{} must be a non-negative multiple of the sample interval {interval}", a.band),
            ));
        }
        if !(a.significance >= 0.0 && a.significance.is_finite()) {
            return Err(config_err("analysis.significance", "must be non-negative"));
        }
        if let Some(step) = a.scan_step_deg {
            if step == 0 || 180 % step != 0 {
                return Err(config_err("analysis.scan_step_deg", format!("{step} must divide 180")));
            }
        }
        let mut report_times = Vec::new();
        for &t in &times {
            for cand in [t - a.band, t, t + a.band] {
                if cand >= -1e-9
                    && cand <= t_final + 1e-9
                    && !report_times.iter().any(|x: &f64| (x - cand).abs() < 1e-9)
                {
                    report_times.push(cand.max(0.0));
                }
            }
        }
        report_times.sort_by(f64::total_cmp);

        let standard = standard_criteria(spec.n_wells());
        let criteria = match &a.criteria {
            None => standard,
            Some(labels) => labels
                .iter()
                .enumerate()
                .map(|(k, label)| {
                    standard.iter().copied().find(|c| c.label() == *label).ok_or_else(|| {
                        config_err(&format!("analysis.criteria[{k}]"), format!("unknown criterion {label:?}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };

        let e = &self.ensemble;
        let ensemble = EnsembleConfig::new(e.n_traj, e.seed)
            .with_workers(e.workers)
            .with_replicas(e.replicas);
        ensemble.validate().map_err(|err| config_err("ensemble", err))?;

        let mut config = self.clone();
        config.system = SystemChoice::Spec(spec.clone());
        config.integrator.t_final = Some(t_final);
        config.analysis.times = Some(times.clone());
        config.analysis.criteria = Some(criteria.iter().map(Criterion::label).collect());

        Ok(Resolved {
            config,
            preset: preset.map(|p| p.id.to_string()),
            spec,
            integrator,
            ensemble,
            times,
            report_times,
            criteria,
        })
    }
}

impl Resolved {
    pub fn out_dir(&self) -> &Path {
        &self.config.output.dir
    }

    pub fn wants(&self, f: Format) -> bool {
        self.config.output.formats.contains(&f)
    }

    pub fn fock_config(&self) -> Result<FockConfig, CliError> {
        let o = &self.config.oracle;
        FockConfig::new(o.n_max, o.dt, self.integrator.t_final, self.integrator.sample_interval())
            .map(|c| c.with_dim_cap(o.dim_cap))
            .map_err(|e| config_err("oracle", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_use_shared_parameters() {
        for p in PRESETS {
            let s = p.spec();
            assert_eq!(s.pump()[0], Complex64::new(10.0, 0.0));
            assert_eq!(s.coupling(0, 1), 1.0);
            assert_eq!(s.loss()[p.config.damped_index()], 1.0);
            assert_eq!(s.chi(), p.chi);
        }
        assert!(Preset::find("loss_at_3").is_none());
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = RunConfig::from_json(r#"{"system": {"preset": "loss_at_1_chi3"}}"#).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.times, vec![60.0]);
        assert_eq!(r.report_times, vec![59.0, 60.0]);
        assert_eq!(r.integrator.t_final, 60.0);
        assert_eq!(r.integrator.dt, DEFAULT_DT);
        assert_eq!(r.ensemble.n_traj, 100_000);
        assert_eq!(r.preset.as_deref(), Some("loss_at_1_chi3"));
        assert_eq!(r.criteria.len(), standard_criteria(3).len());
    }

    #[test]
    fn resolved_config_round_trips() {
        let r = RunConfig::preset("loss_at_2_chi2").resolve().unwrap();
        let json = serde_json::to_string(&r.config).unwrap();
        let again = RunConfig::from_json(&json).unwrap().resolve().unwrap();
        assert_eq!(again.config, r.config);
        assert_eq!(again.spec, r.spec);
    }

    #[test]
    fn errors_name_the_offending_path() {
        let bad = RunConfig::from_json(r#"{"system": {"preset": "x"}, "ensemble": {"n_trajs": 5}}"#);
        let msg = bad.unwrap_err().to_string();
        assert!(msg.contains("ensemble"), "{msg}");
        let bad = RunConfig::from_json(r#"{"system": {"preset": "x"}, "integrator": {"dt": "small"}}"#);
        assert!(bad.unwrap_err().to_string().contains("integrator.dt"));
        let unknown = RunConfig::preset("nope").resolve().unwrap_err().to_string();
        assert!(unknown.contains("system.preset"), "{unknown}");
        let mut off = RunConfig::preset("loss_at_1_chi2");
        off.analysis.times = Some(vec![40.05]);
        off.integrator.t_final = Some(50.0);
        assert!(off.resolve().unwrap_err().to_string().contains("analysis.times[0]"));
        let mut crit = RunConfig::preset("loss_at_1_chi2");
        crit.analysis.criteria = Some(vec!["DS12".into(), "DS99".into()]);
        assert!(crit.resolve().unwrap_err().to_string().contains("analysis.criteria[1]"));
    }

    #[test]
    fn undamped_systems_are_rejected() {
        let json = r#"{"system": {"spec": {"n_wells": 1, "coupling": [[0.0]], "chi": 0.0,
            "pump": [[1.0, 0.0]], "loss": [0.0]}}, "integrator": {"t_final": 1.0}}"#;
        let err = RunConfig::from_json(json).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("system: "), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
