// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Artifact writers. Numbers are written as shortest round-trip decimals.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trimer_core::correlations::{Classification, CorrelationReport, Criterion, CriterionResult, Detail};
use trimer_core::ensemble::{Ensemble, GaussianMoments};
use trimer_core::Complex64;

use crate::error::CliError;

pub const MANIFEST_VERSION: u32 = 1;

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Column names of one moment set: `m1_re, m1_im, s11_re, …, c33_im`.
/// Only `i ≤ j` entries of `S` and `C` are listed.
pub fn moment_columns(n: usize) -> Vec<String> {
    let mut cols = Vec::new();
    for i in 1..=n {
        cols.push(format!("m{i}_re"));
        cols.push(format!("m{i}_im"));
    }
    for block in ["s", "c"] {
        for i in 1..=n {
            for j in i..=n {
                cols.push(format!("{block}{i}{j}_re"));
                cols.push(format!("{block}{i}{j}_im"));
            }
        }
    }
    cols
}

fn moment_values(n: usize, m: &[Complex64], s: &[Complex64], c: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::new();
    for z in m {
        out.push(z.re);
        out.push(z.im);
    }
    for block in [s, c] {
        for i in 0..n {
            for j in i..n {
                out.push(block[i * n + j].re);
                out.push(block[i * n + j].im);
            }
        }
    }
    out
}

/// One row per sample: `t, n_samples`, then each moment column followed by
/// its `se_` column. `errors` is `None` for exact (oracle) moments.
pub fn moments_table(
    moments: &[GaussianMoments],
    errors: Option<&[Vec<f64>]>,
) -> (Vec<String>, Vec<Vec<String>>) {
    let n = moments.first().map_or(0, |g| g.n_wells);
    let cols = moment_columns(n);
    let mut header = vec!["t".to_string(), "n_samples".to_string()];
    for c in &cols {
        header.push(c.clone());
        header.push(format!("se_{c}"));
    }
    let rows = moments
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let vals = moment_values(n, &g.m, &g.s, &g.c);
            let mut row = vec![num(g.t), g.n_samples.to_string()];
            for (p, v) in vals.iter().enumerate() {
                row.push(num(*v));
                row.push(num(errors.map_or(0.0, |e| e[k][p])));
            }
            row
        })
        .collect();
    (header, rows)
}

/// Replica standard errors in [`moment_columns`] order, per sample.
pub fn moment_errors(ens: &Ensemble) -> Result<Vec<Vec<f64>>, CliError> {
    (0..ens.times().len())
        .map(|k| {
            let e = ens.moment_errors(k)?;
            let n = e.m.len();
            Ok(moment_values(n, &e.m, &e.s, &e.c))
        })
        .collect()
}

/// `t, N1…Nn, se_N1…se_Nn`.
pub fn populations_table(
    times: &[f64],
    pops: &[Vec<f64>],
    errors: &[Vec<f64>],
) -> (Vec<String>, Vec<Vec<String>>) {
    let n = pops.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("N{i}")));
    header.extend((1..=n).map(|i| format!("se_N{i}")));
    let rows = times
        .iter()
        .zip(pops.iter().zip(errors))
        .map(|(t, (p, e))| {
            let mut row = vec![num(*t)];
            row.extend(p.iter().map(|v| num(*v)));
            row.extend(e.iter().map(|v| num(*v)));
            row
        })
        .collect();
    (header, rows)
}

fn detail_text(d: &Detail) -> String {
    match d {
        Detail::None => String::new(),
        Detail::Gain(g) => format!("gain={}", num(*g)),
        Detail::Signs(s) => format!("signs={:+}{:+}", s.x, s.y),
    }
}

fn indices_text(c: &Criterion) -> String {
    c.indices()
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Long format: one `optimum` row per criterion and time, plus `scan` rows
/// every `scan_step` degrees when requested.
pub fn criteria_table(reports: &[CorrelationReport], scan_step: Option<u32>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["t", "theta_deg", "criterion", "family", "indices", "value", "std_err", "kind", "detail"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for rep in reports {
        for r in &rep.results {
            rows.push(vec![
                num(rep.t),
                num(r.optimum.theta_deg),
                r.label.clone(),
                r.criterion.family().to_string(),
                indices_text(&r.criterion),
                num(r.optimum.value),
                r.std_err.map(num).unwrap_or_default(),
                "optimum".into(),
                detail_text(&r.optimum.detail),
            ]);
            if let Some(step) = scan_step {
                for (deg, v) in r.scan.iter().enumerate().step_by(step as usize) {
                    rows.push(vec![
                        num(rep.t),
                        num(deg as f64),
                        r.label.clone(),
                        r.criterion.family().to_string(),
                        indices_text(&r.criterion),
                        num(*v),
                        String::new(),
                        "scan".into(),
                        String::new(),
                    ]);
                }
            }
        }
    }
    (header, rows)
}

fn subscript(s: &str) -> String {
    s.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) => char::from_u32(0x2080 + d).unwrap_or(c),
            None => c,
        })
        .collect()
}

/// Column heading such as `V(X₂)`, `DS₁₂` or `OBR₃₁₂`.
pub fn heading(label: &str) -> String {
    if let Some(i) = label.strip_prefix("VX") {
        return format!("V(X{})", subscript(i));
    }
    if let Some(i) = label.strip_prefix("VY") {
        return format!("V(Y{})", subscript(i));
    }
    let split = label.find(|c: char| c.is_ascii_digit()).unwrap_or(label.len());
    format!("{}{}", &label[..split], subscript(&label[split..]))
}

/// `value@angle°` with two decimals, as in the printed tables.
pub fn cell(r: &CriterionResult) -> String {
    format!("{:.2}@{:.0}°", r.optimum.value, r.optimum.theta_deg)
}

pub const TABLE_LAYOUTS: [(&str, &[&str]); 5] = [
    ("Bipartite correlations", &["VX1", "VX2", "VX3", "DS12", "DS13", "DS23"]),
    ("Bipartite EPR-steering", &["EPR12", "EPR21", "EPR23", "EPR32", "EPR13", "EPR31"]),
    ("Tripartite entanglement", &["V12", "V13", "V23", "V123", "V231", "V312"]),
    ("Tripartite EPR-steering", &["OBR123", "OBR231", "OBR312"]),
    ("Pair-inequality sum", &["VSUM"]),
];

fn md_table(out: &mut String, title: &str, headers: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(out, "| | {} |", headers.join(" | "));
    let _ = writeln!(out, "|---|{}|", vec!["---"; headers.len()].join("|"));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

/// Markdown tables for each evaluation time. `reports` must contain every
/// time in `times`; neighbours within `band` fill the last table.
pub fn tables_markdown(title: &str, times: &[f64], band: f64, reports: &[CorrelationReport]) -> String {
    let mut out = format!("# {title}\n\n");
    let at = |t: f64| reports.iter().find(|r| (r.t - t).abs() < 1e-9);
    for &t in times {
        let Some(rep) = at(t) else { continue };
        let _ = writeln!(out, "## γt = {}\n", num(t));
        let mut band_rows = Vec::new();
        let neighbours: Vec<&CorrelationReport> = reports
            .iter()
            .filter(|r| (r.t - t).abs() <= band + 1e-9)
            .collect();
        for (name, labels) in TABLE_LAYOUTS {
            let present: Vec<&CriterionResult> =
                labels.iter().filter_map(|l| rep.by_label(l)).collect();
            if present.is_empty() {
                continue;
            }
            let headers: Vec<String> = present.iter().map(|r| heading(&r.label)).collect();
            let values: Vec<String> = present.iter().map(|r| cell(r)).collect();
            let errors: Vec<String> = present
                .iter()
                .map(|r| r.std_err.map_or("n/a".into(), |e| format!("{e:.3}")))
                .collect();
            md_table(
                &mut out,
                name,
                &headers,
                &[
                    [vec![format!("γt={}", num(t))], values].concat(),
                    [vec!["±σ".to_string()], errors].concat(),
                ],
            );
            for r in present {
                let vals: Vec<f64> = neighbours
                    .iter()
                    .filter_map(|n| n.by_label(&r.label))
                    .map(|x| x.optimum.value)
                    .collect();
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                band_rows.push(vec![heading(&r.label), format!("{lo:.3}"), format!("{hi:.3}")]);
            }
        }
        if !band_rows.is_empty() {
            let _ = writeln!(out, "### Range over γt = {} ± {}\n", num(t), num(band));
            let _ = writeln!(out, "| criterion | min | max |");
            let _ = writeln!(out, "|---|---|---|");
            for r in band_rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
            out.push('\n');
        }
        mean_amplitudes(&mut out, &rep.moments);
    }
    out
}

/// Coherent amplitudes and their phases relative to the first well.
fn mean_amplitudes(out: &mut String, g: &GaussianMoments) {
    let _ = writeln!(out, "### Mean amplitudes\n");
    let _ = writeln!(out, "| well | abs(⟨a⟩)² | arg ⟨a⟩ | phase relative to well 1 |");
    let _ = writeln!(out, "|---|---|---|---|");
    let reference = g.m.first().copied().unwrap_or_default();
    for (i, m) in g.m.iter().enumerate() {
        let rel = if reference.norm() > 0.0 && m.norm() > 0.0 {
            format!("{:.1}°", (m / reference).arg().to_degrees())
        } else {
            "n/a".into()
        };
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.1}° | {rel} |",
            i + 1,
            m.norm_sqr(),
            m.arg().to_degrees()
        );
    }
    out.push('\n');
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub t: f64,
    pub flags: Classification,
    /// Standard errors of margin used for `significant`.
    pub z: f64,
    pub significant: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    /// `run`, `meanfield` or `oracle`.
    pub command: String,
    pub code_version: String,
    pub preset: Option<String>,
    pub config: crate::config::RunConfig,
    pub seed: u64,
    pub n_traj: u64,
    pub divergent_count: u64,
    pub divergent_fraction: f64,
    pub status: trimer_core::ensemble::RunStatus,
    pub files: Vec<String>,
}
