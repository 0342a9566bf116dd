// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! The `meanfield` command: figure-ready population series.
//!
//! Both CSVs are in long format (`t, series, value, …, line_style`) so a
//! plotting tool can facet on `series` directly.

use trimer_core::analytic::{steady_loss_at_pumped, steady_numbers_loss_at_second};
use trimer_core::dynamics::run_meanfield;
use trimer_core::ensemble::run_ensemble;
use trimer_core::model::SystemSpec;
use trimer_core::Complex64;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, num, Manifest};
use crate::run::{create_dir, manifest};

const WELL_STYLES: [&str; 3] = ["solid", "dashed", "dotted"];

fn well_style(i: usize) -> &'static str {
    WELL_STYLES.get(i).copied().unwrap_or("solid")
}

/// Non-interacting steady-state total of a pumped, singly damped triangle
/// with equal tunnelling, or `None` for any other geometry.
pub fn analytic_total(spec: &SystemSpec) -> Option<f64> {
    if spec.n_wells() != 3 {
        return None;
    }
    let j = spec.coupling(0, 1);
    let equal = [(0, 2), (1, 2)].iter().all(|&(a, b)| spec.coupling(a, b) == j);
    let pump = spec.pump();
    if !equal || pump[1] != Complex64::default() || pump[2] != Complex64::default() {
        return None;
    }
    let damped: Vec<usize> = (0..3).filter(|&i| spec.loss()[i] > 0.0).collect();
    let &[w] = damped.as_slice() else { return None };
    let gamma = spec.loss()[w];
    if w == 0 {
        steady_loss_at_pumped(j, gamma, pump[0])
            .ok()
            .map(|s| s.populations.iter().sum())
    } else {
        steady_numbers_loss_at_second(j, gamma, pump[0])
            .ok()
            .map(|n| n.iter().sum())
    }
}

/// Writes `fig_classical.csv` (zero-field mean-field populations, their
/// total and the analytic reference) and, unless `classical_only`,
/// `fig_populations.csv` from a truncated Wigner ensemble.
pub fn meanfield(cfg: &RunConfig, classical_only: bool) -> Result<Manifest, CliError> {
    let r = cfg.resolve()?;
    let dir = r.out_dir();
    create_dir(dir)?;
    let n = r.spec.n_wells();
    let mut files = Vec::new();

    let zero = vec![Complex64::default(); n];
    let series = run_meanfield(&r.spec, &zero, &r.integrator)?;
    let reference = analytic_total(&r.spec);
    let header = ["t", "series", "value", "line_style"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (k, &t) in series.times.iter().enumerate() {
        let pops = series.populations(k);
        for (i, p) in pops.iter().enumerate() {
            rows.push(vec![num(t), format!("N{}", i + 1), num(*p), well_style(i).into()]);
        }
        rows.push(vec![num(t), "total".into(), num(series.total(k)), "solid".into()]);
        if let Some(v) = reference {
            rows.push(vec![num(t), "analytic_total".into(), num(v), "dashed".into()]);
        }
    }
    output::write_csv(&dir.join("fig_classical.csv"), &header, &rows)?;
    files.push("fig_classical.csv".into());

    let ens = if classical_only {
        None
    } else {
        let ens = run_ensemble(&r.spec, &r.integrator, &r.ensemble)?;
        let header = ["t", "series", "value", "std_err", "line_style"].map(String::from).to_vec();
        let mut rows = Vec::new();
        for (k, &t) in ens.times().iter().enumerate() {
            for i in 0..n {
                let e = ens.estimate(k, |g| Ok(g.population(i)))?;
                rows.push(vec![
                    num(t),
                    format!("N{}", i + 1),
                    num(e.value),
                    num(e.std_err),
                    well_style(i).into(),
                ]);
            }
        }
        output::write_csv(&dir.join("fig_populations.csv"), &header, &rows)?;
        files.push("fig_populations.csv".into());
        Some(ens)
    };

    let m = manifest("meanfield", &r, ens.as_ref(), files);
    output::write_json(&dir.join("manifest.json"), &m)?;
    Ok(m)
}
