// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! The `compare` command: differences between two output directories in
//! units of their combined standard error.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::output::{num, Manifest};

const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Difference {
    pub file: String,
    pub t: f64,
    pub quantity: String,
    pub a: f64,
    pub b: f64,
    pub se_a: f64,
    pub se_b: f64,
    /// `(a − b)/√(se_a² + se_b²)`; zero when both values and errors vanish,
    /// infinite when only the errors do.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub differences: Vec<Difference>,
    pub files: Vec<String>,
    /// Files present in only one directory.
    pub skipped: Vec<String>,
}

impl Comparison {
    pub fn max_abs_z(&self) -> f64 {
        self.differences.iter().map(|d| d.z.abs()).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&Difference> {
        self.differences
            .iter()
            .max_by(|x, y| x.z.abs().total_cmp(&y.z.abs()))
    }

    pub fn exceeding(&self, threshold: f64) -> usize {
        self.differences.iter().filter(|d| d.z.abs() > threshold).count()
    }
}

pub fn z_score(a: f64, b: f64, se_a: f64, se_b: f64) -> f64 {
    let se = se_a.hypot(se_b);
    if se > 0.0 {
        (a - b) / se
    } else if a == b {
        0.0
    } else {
        f64::INFINITY.copysign(a - b)
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok(Table { header, rows })
}

fn parse(s: &str, what: &str) -> Result<f64, CliError> {
    if s.is_empty() {
        return Ok(0.0);
    }
    s.parse()
        .map_err(|_| CliError::Data(format!("{what}: cannot parse {s:?} as a number")))
}

fn read_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Wide tables with a leading `t` column and `se_<name>` error columns.
fn compare_wide(name: &str, a: &Table, b: &Table, out: &mut Vec<Difference>) -> Result<(), CliError> {
    if a.header != b.header {
        return Err(CliError::GridMismatch(format!("{name}: column headers differ")));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::GridMismatch(format!(
            "{name}: {} rows vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let col = |c: &str| a.header.iter().position(|h| h == c);
    let pairs: Vec<(usize, usize)> = a
        .header
        .iter()
        .enumerate()
        .filter(|(_, h)| *h != "t" && !h.starts_with("se_"))
        .filter_map(|(i, h)| col(&format!("se_{h}")).map(|s| (i, s)))
        .collect();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let ta = parse(&ra[0], name)?;
        let tb = parse(&rb[0], name)?;
        if (ta - tb).abs() > TIME_TOLERANCE {
            return Err(CliError::GridMismatch(format!("{name}: t = {ta} vs t = {tb}")));
        }
        for &(v, s) in &pairs {
            let (va, vb) = (parse(&ra[v], name)?, parse(&rb[v], name)?);
            let (sa, sb) = (parse(&ra[s], name)?, parse(&rb[s], name)?);
            out.push(Difference {
                file: name.into(),
                t: ta,
                quantity: a.header[v].clone(),
                a: va,
                b: vb,
                se_a: sa,
                se_b: sb,
                z: z_score(va, vb, sa, sb),
            });
        }
    }
    Ok(())
}

type Optima = BTreeMap<(String, String), (f64, f64, f64)>;

fn criteria_optima(name: &str, t: &Table) -> Result<Optima, CliError> {
    let col = |c: &str| {
        t.header
            .iter()
            .position(|h| h == c)
            .ok_or_else(|| CliError::Data(format!("{name}: missing column {c}")))
    };
    let (ct, cc, cv, cs, ck) = (col("t")?, col("criterion")?, col("value")?, col("std_err")?, col("kind")?);
    let mut out = BTreeMap::new();
    for row in t.rows.iter().filter(|r| r[ck] == "optimum") {
        let time = parse(&row[ct], name)?;
        // Keyed by the rounded time so formatting differences do not matter.
        let key = (num((time * 1e6).round() / 1e6), row[cc].clone());
        out.insert(key, (time, parse(&row[cv], name)?, parse(&row[cs], name)?));
    }
    Ok(out)
}

fn compare_criteria(a: &Table, b: &Table, out: &mut Vec<Difference>) -> Result<(), CliError> {
    let name = "criteria.csv";
    let oa = criteria_optima(name, a)?;
    let ob = criteria_optima(name, b)?;
    if oa.keys().ne(ob.keys()) {
        return Err(CliError::GridMismatch(format!(
            "{name}: criteria or evaluation times differ"
        )));
    }
    for ((_, label), &(t, va, sa)) in &oa {
        let (_, vb, sb) = ob[&(num((t * 1e6).round() / 1e6), label.clone())];
        out.push(Difference {
            file: name.into(),
            t,
            quantity: label.clone(),
            a: va,
            b: vb,
            se_a: sa,
            se_b: sb,
            z: z_score(va, vb, sa, sb),
        });
    }
    Ok(())
}

/// Compares the CSV artifacts present in both run directories.
pub fn compare(a: &Path, b: &Path) -> Result<Comparison, CliError> {
    let ma = read_manifest(a)?;
    let mb = read_manifest(b)?;
    let mut differences = Vec::new();
    let mut files = Vec::new();
    let mut skipped = Vec::new();
    for name in ["populations.csv", "moments.csv", "criteria.csv"] {
        let (ia, ib) = (ma.files.iter().any(|f| f == name), mb.files.iter().any(|f| f == name));
        if !(ia && ib) {
            if ia || ib {
                skipped.push(name.to_string());
            }
            continue;
        }
        let ta = read_table(&a.join(name))?;
        let tb = read_table(&b.join(name))?;
        if name == "criteria.csv" {
            compare_criteria(&ta, &tb, &mut differences)?;
        } else {
            compare_wide(name, &ta, &tb, &mut differences)?;
        }
        files.push(name.to_string());
    }
    if files.is_empty() {
        return Err(CliError::GridMismatch("no common CSV artifacts".into()));
    }
    Ok(Comparison {
        differences,
        files,
        skipped,
    })
}

/// `file, t, quantity, a, b, se_a, se_b, z`.
pub fn write_report(path: &Path, c: &Comparison) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for d in &c.differences {
        w.serialize(d)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
