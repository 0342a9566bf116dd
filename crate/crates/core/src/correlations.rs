// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature statistics and continuous-variable correlation criteria.
//!
//! Quadratures are `X_j(θ) = a_j e^{−iθ} + a_j† e^{iθ}` and
//! `Y_j(θ) = X_j(θ + π/2)`, normalised so the vacuum variance is 1. Every
//! multi-mode criterion uses one shared angle for all modes. All values are
//! functions of the centered moments `(m, S, C)` alone and are π-periodic
//! in θ.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, GaussianMoments};
use crate::error::{Error, Result};

/// Smallest conditioning variance an inference may divide by.
const MIN_CONDITIONING_VARIANCE: f64 = 1e-12;

/// Means and covariance matrices of the X and Y quadratures at one angle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadStats {
    n: usize,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    /// Row-major `Cov(X_i, X_j)`.
    pub xx: Vec<f64>,
    /// Row-major `Cov(Y_i, Y_j)`.
    pub yy: Vec<f64>,
}

impl QuadStats {
    #[inline]
    pub fn cov_x(&self, i: usize, j: usize) -> f64 {
        self.xx[i * self.n + j]
    }

    #[inline]
    pub fn cov_y(&self, i: usize, j: usize) -> f64 {
        self.yy[i * self.n + j]
    }

    pub fn var_x(&self, i: usize) -> f64 {
        self.cov_x(i, i)
    }

    pub fn var_y(&self, i: usize) -> f64 {
        self.cov_y(i, i)
    }
}

/// Quadrature means and covariances at angle `theta` (radians).
///
/// `⟨X_i⟩ = 2Re(m_i e^{−iθ})`,
/// `Cov(X_i, X_j) = 2Re(S_ij e^{−2iθ}) + 2Re(C_ij)` and
/// `Cov(Y_i, Y_j) = −2Re(S_ij e^{−2iθ}) + 2Re(C_ij)`.
pub fn quad_stats(g: &GaussianMoments, theta: f64) -> QuadStats {
    let n = g.n_wells;
    let rot = Complex64::from_polar(1.0, -theta);
    let rot2 = rot * rot;
    let mean_x = g.m.iter().map(|m| 2.0 * (m * rot).re).collect();
    let mean_y = g.m.iter().map(|m| 2.0 * (m * rot).im).collect();
    let mut xx = vec![0.0; n * n];
    let mut yy = vec![0.0; n * n];
    for p in 0..n * n {
        let phase = 2.0 * (g.s[p] * rot2).re;
        let herm = 2.0 * g.c[p].re;
        xx[p] = herm + phase;
        yy[p] = herm - phase;
    }
    QuadStats {
        n,
        mean_x,
        mean_y,
        xx,
        yy,
    }
}

fn check_distinct(g: &GaussianMoments, idx: &[usize]) -> Result<()> {
    for &i in idx {
        g.check_index(i)?;
    }
    for (a, &i) in idx.iter().enumerate() {
        if idx[a + 1..].contains(&i) {
            return Err(Error::RepeatedIndex(idx.to_vec()));
        }
    }
    Ok(())
}

fn condition(v: f64) -> Result<f64> {
    if v > MIN_CONDITIONING_VARIANCE {
        Ok(v)
    } else {
        Err(Error::DegenerateConditioning(v))
    }
}

/// Minimum single-mode variance over all angles and its angle in degrees,
/// from the closed form `V_min = 2C_ii − 2|S_ii|` at
/// `θ = arg(S_ii)/2 + π/2`. With `S_ii = 0` every angle is optimal and 0 is
/// reported.
pub fn squeezing(g: &GaussianMoments, i: usize) -> Result<(f64, f64)> {
    g.check_index(i)?;
    let s = g.s(i, i);
    let v_min = 2.0 * g.c(i, i).re - 2.0 * s.norm();
    let theta = if s.norm() <= 1e-15 {
        0.0
    } else {
        wrap_degrees((s.arg() / 2.0 + PI / 2.0).to_degrees())
    };
    Ok((v_min, theta))
}

/// `V(X_j + X_k) + V(Y_j − Y_k)`; below 4 witnesses inseparability.
pub fn duan_simon(g: &GaussianMoments, j: usize, k: usize, theta: f64) -> Result<f64> {
    check_distinct(g, &[j, k])?;
    let q = quad_stats(g, theta);
    Ok(q.var_x(j) + q.var_x(k) + 2.0 * q.cov_x(j, k) + q.var_y(j) + q.var_y(k)
        - 2.0 * q.cov_y(j, k))
}

/// Product of the variances of mode `i` inferred from mode `j`; below 1
/// means `i` can be steered by `j`.
pub fn reid_epr(g: &GaussianMoments, i: usize, j: usize, theta: f64) -> Result<f64> {
    check_distinct(g, &[i, j])?;
    let q = quad_stats(g, theta);
    let inf_x = q.var_x(i) - q.cov_x(i, j).powi(2) / condition(q.var_x(j))?;
    let inf_y = q.var_y(i) - q.cov_y(i, j).powi(2) / condition(q.var_y(j))?;
    Ok(inf_x * inf_y)
}

/// `V(X_i − X_j) + V(Y_i + Y_j + g_k Y_k)` at a caller-chosen gain.
pub fn vlf_pair_with_gain(
    g: &GaussianMoments,
    i: usize,
    j: usize,
    k: usize,
    theta: f64,
    gain: f64,
) -> Result<f64> {
    check_distinct(g, &[i, j, k])?;
    let q = quad_stats(g, theta);
    Ok(vlf_pair_value(&q, i, j, k, gain))
}

fn vlf_pair_value(q: &QuadStats, i: usize, j: usize, k: usize, gain: f64) -> f64 {
    let vx = q.var_x(i) + q.var_x(j) - 2.0 * q.cov_x(i, j);
    let vy = q.var_y(i)
        + q.var_y(j)
        + 2.0 * q.cov_y(i, j)
        + gain * gain * q.var_y(k)
        + 2.0 * gain * (q.cov_y(i, k) + q.cov_y(j, k));
    vx + vy
}

/// Two-mode van Loock-Furusawa combination with the variance-minimising gain
/// `g_k = −(V(Y_k, Y_i) + V(Y_k, Y_j)) / V(Y_k)`. Returns `(value, g_k)`.
pub fn vlf_pair(
    g: &GaussianMoments,
    i: usize,
    j: usize,
    k: usize,
    theta: f64,
) -> Result<(f64, f64)> {
    check_distinct(g, &[i, j, k])?;
    let q = quad_stats(g, theta);
    let gain = -(q.cov_y(k, i) + q.cov_y(k, j)) / condition(q.var_y(k))?;
    Ok((vlf_pair_value(&q, i, j, k, gain), gain))
}

/// `V(X_i − (X_j + X_k)/√2) + V(Y_i + (Y_j + Y_k)/√2)`.
pub fn vlf_triple(g: &GaussianMoments, i: usize, j: usize, k: usize, theta: f64) -> Result<f64> {
    check_distinct(g, &[i, j, k])?;
    let q = quad_stats(g, theta);
    let vx = q.var_x(i) + 0.5 * (q.var_x(j) + q.var_x(k) + 2.0 * q.cov_x(j, k))
        - SQRT_2 * (q.cov_x(i, j) + q.cov_x(i, k));
    let vy = q.var_y(i) + 0.5 * (q.var_y(j) + q.var_y(k) + 2.0 * q.cov_y(j, k))
        + SQRT_2 * (q.cov_y(i, j) + q.cov_y(i, k));
    Ok(vx + vy)
}

/// Sign choices of the joint observables `X_j ± X_k` and `Y_j ± Y_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObrSigns {
    pub x: i8,
    pub y: i8,
}

/// Variance of mode `i` inferred from `j ± k`, minimised over the sign.
fn joint_inference(var_i: f64, cov: impl Fn(usize, usize) -> f64, i: usize, j: usize, k: usize) -> Result<(f64, i8)> {
    let mut best: Option<(f64, i8)> = None;
    for sign in [1i8, -1] {
        let s = f64::from(sign);
        let cond = condition(cov(j, j) + cov(k, k) + 2.0 * s * cov(j, k))?;
        let inferred = var_i - (cov(i, j) + s * cov(i, k)).powi(2) / cond;
        if best.is_none_or(|(v, _)| inferred < v) {
            best = Some((inferred, sign));
        }
    }
    Ok(best.expect("two signs evaluated"))
}

/// Product of the variances of mode `i` inferred from joint measurements on
/// `j` and `k`; below 1 means `(j, k)` jointly steer `i`. The signs of the
/// joint X and Y observables are chosen independently to minimise the
/// product.
pub fn obr(
    g: &GaussianMoments,
    i: usize,
    j: usize,
    k: usize,
    theta: f64,
) -> Result<(f64, ObrSigns)> {
    check_distinct(g, &[i, j, k])?;
    let q = quad_stats(g, theta);
    let (inf_x, sx) = joint_inference(q.var_x(i), |a, b| q.cov_x(a, b), i, j, k)?;
    let (inf_y, sy) = joint_inference(q.var_y(i), |a, b| q.cov_y(a, b), i, j, k)?;
    Ok((inf_x * inf_y, ObrSigns { x: sx, y: sy }))
}

/// Product `V(X_i)V(Y_i)`; the uncertainty principle bounds it below by 1.
pub fn uncertainty_product(g: &GaussianMoments, i: usize, theta: f64) -> Result<f64> {
    g.check_index(i)?;
    let q = quad_stats(g, theta);
    Ok(q.var_x(i) * q.var_y(i))
}

/// Identifies one criterion and its (zero-based) mode indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    VarX { i: usize },
    VarY { i: usize },
    DuanSimon { j: usize, k: usize },
    /// Mode `i` inferred from mode `j`.
    Epr { i: usize, j: usize },
    /// Gain on mode `k`.
    VlfPair { i: usize, j: usize, k: usize },
    VlfTriple { i: usize, j: usize, k: usize },
    /// Mode `i` inferred from `(j, k)`.
    Obr { i: usize, j: usize, k: usize },
    /// Sum of the three pair inequalities of a trimer at one angle.
    VlfSum,
}

/// Auxiliary output of a criterion evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detail {
    None,
    Gain(f64),
    Signs(ObrSigns),
}

impl Criterion {
    /// Short label with one-based indices, e.g. `DS12`, `EPR23`, `OBR312`.
    pub fn label(&self) -> String {
        match *self {
            Criterion::VarX { i } => format!("VX{}", i + 1),
            Criterion::VarY { i } => format!("VY{}", i + 1),
            Criterion::DuanSimon { j, k } => format!("DS{}{}", j + 1, k + 1),
            Criterion::Epr { i, j } => format!("EPR{}{}", i + 1, j + 1),
            Criterion::VlfPair { i, j, .. } => format!("V{}{}", i + 1, j + 1),
            Criterion::VlfTriple { i, j, k } => format!("V{}{}{}", i + 1, j + 1, k + 1),
            Criterion::Obr { i, j, k } => format!("OBR{}{}{}", i + 1, j + 1, k + 1),
            Criterion::VlfSum => "VSUM".to_string(),
        }
    }

    /// Criterion family name as used in CSV output.
    pub fn family(&self) -> &'static str {
        match self {
            Criterion::VarX { .. } => "var_x",
            Criterion::VarY { .. } => "var_y",
            Criterion::DuanSimon { .. } => "duan_simon",
            Criterion::Epr { .. } => "epr",
            Criterion::VlfPair { .. } => "vlf_pair",
            Criterion::VlfTriple { .. } => "vlf_triple",
            Criterion::Obr { .. } => "obr",
            Criterion::VlfSum => "vlf_sum",
        }
    }

    /// Zero-based mode indices in criterion order.
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Criterion::VarX { i } | Criterion::VarY { i } => vec![i],
            Criterion::DuanSimon { j, k } => vec![j, k],
            Criterion::Epr { i, j } => vec![i, j],
            Criterion::VlfPair { i, j, k }
            | Criterion::VlfTriple { i, j, k }
            | Criterion::Obr { i, j, k } => vec![i, j, k],
            Criterion::VlfSum => vec![0, 1, 2],
        }
    }

    /// Value at `theta` (radians) and any auxiliary output.
    pub fn evaluate(&self, g: &GaussianMoments, theta: f64) -> Result<(f64, Detail)> {
        match *self {
            Criterion::VarX { i } => {
                g.check_index(i)?;
                Ok((quad_stats(g, theta).var_x(i), Detail::None))
            }
            Criterion::VarY { i } => {
                g.check_index(i)?;
                Ok((quad_stats(g, theta).var_y(i), Detail::None))
            }
            Criterion::DuanSimon { j, k } => Ok((duan_simon(g, j, k, theta)?, Detail::None)),
            Criterion::Epr { i, j } => Ok((reid_epr(g, i, j, theta)?, Detail::None)),
            Criterion::VlfPair { i, j, k } => {
                let (v, gain) = vlf_pair(g, i, j, k, theta)?;
                Ok((v, Detail::Gain(gain)))
            }
            Criterion::VlfTriple { i, j, k } => Ok((vlf_triple(g, i, j, k, theta)?, Detail::None)),
            Criterion::Obr { i, j, k } => {
                let (v, signs) = obr(g, i, j, k, theta)?;
                Ok((v, Detail::Signs(signs)))
            }
            Criterion::VlfSum => {
                let mut sum = 0.0;
                for (i, j, k) in TRIMER_PAIRS {
                    sum += vlf_pair(g, i, j, k, theta)?.0;
                }
                Ok((sum, Detail::None))
            }
        }
    }

    pub fn value(&self, g: &GaussianMoments, theta: f64) -> Result<f64> {
        self.evaluate(g, theta).map(|(v, _)| v)
    }

    /// Value of the criterion for which no correlation is present (vacuum).
    pub fn boundary(&self) -> f64 {
        match self {
            Criterion::VarX { .. } | Criterion::VarY { .. } => 1.0,
            Criterion::DuanSimon { .. } | Criterion::VlfPair { .. } | Criterion::VlfTriple { .. } => 4.0,
            Criterion::Epr { .. } | Criterion::Obr { .. } => 1.0,
            Criterion::VlfSum => 12.0,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `(i, j, k)` of the three pair inequalities: `V12`, `V13`, `V23`.
pub const TRIMER_PAIRS: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
/// Cyclic orderings used for the triple and joint-steering criteria.
pub const TRIMER_CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// The full criterion set for `n` modes: single-mode variances, every
/// pair's Duan-Simon and both Reid directions, and for three modes the
/// tripartite family.
pub fn standard_criteria(n: usize) -> Vec<Criterion> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(Criterion::VarX { i });
    }
    for i in 0..n {
        out.push(Criterion::VarY { i });
    }
    for j in 0..n {
        for k in j + 1..n {
            out.push(Criterion::DuanSimon { j, k });
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            out.push(Criterion::Epr { i: j, j: k });
            out.push(Criterion::Epr { i: k, j });
        }
    }
    if n == 3 {
        for (i, j, k) in TRIMER_PAIRS {
            out.push(Criterion::VlfPair { i, j, k });
        }
        out.push(Criterion::VlfSum);
        for (i, j, k) in TRIMER_CYCLIC {
            out.push(Criterion::VlfTriple { i, j, k });
        }
        for (i, j, k) in TRIMER_CYCLIC {
            out.push(Criterion::Obr { i, j, k });
        }
    }
    out
}

/// Wraps an angle into `[0, 180)` degrees.
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = deg.rem_euclid(180.0);
    // rem_euclid can round up to exactly 180 for tiny negative inputs.
    if w >= 180.0 {
        0.0
    } else {
        w
    }
}

/// Minimising angle of a criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOptimum {
    pub theta_deg: f64,
    pub value: f64,
    pub detail: Detail,
}

/// Scans `[0°, 180°)` on a 1° grid, then refines on a 0.1° grid within ±1°
/// of the coarse optimum. Ties keep the earliest angle.
pub fn optimize_angle(g: &GaussianMoments, criterion: &Criterion) -> Result<AngleOptimum> {
    let eval = |deg: f64| criterion.evaluate(g, deg.to_radians());
    let mut best_deg = 0.0;
    let (mut best_val, mut best_detail) = eval(0.0)?;
    for d in 1..180 {
        let deg = f64::from(d);
        let (v, detail) = eval(deg)?;
        if v < best_val {
            (best_deg, best_val, best_detail) = (deg, v, detail);
        }
    }
    let centre = best_deg;
    for step in -10i32..=10 {
        if step == 0 {
            continue;
        }
        let deg = wrap_degrees(centre + 0.1 * f64::from(step));
        let (v, detail) = eval(deg)?;
        if v < best_val {
            (best_deg, best_val, best_detail) = (deg, v, detail);
        }
    }
    Ok(AngleOptimum {
        theta_deg: best_deg,
        value: best_val,
        detail: best_detail,
    })
}

/// One criterion's optimum plus its scan over integer degrees `0..180`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub label: String,
    pub optimum: AngleOptimum,
    /// Replica standard error of the optimum value, when known.
    pub std_err: Option<f64>,
    /// Values at 0°, 1°, …, 179°.
    pub scan: Vec<f64>,
}

/// All criteria evaluated on one moment set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub t: f64,
    pub moments: GaussianMoments,
    pub results: Vec<CriterionResult>,
}

impl CorrelationReport {
    pub fn evaluate(g: &GaussianMoments, criteria: &[Criterion]) -> Result<Self> {
        let results = criteria
            .iter()
            .map(|criterion| {
                let optimum = optimize_angle(g, criterion)?;
                let scan = (0..180)
                    .map(|d| criterion.value(g, f64::from(d).to_radians()))
                    .collect::<Result<_>>()?;
                Ok(CriterionResult {
                    criterion: *criterion,
                    label: criterion.label(),
                    optimum,
                    std_err: None,
                    scan,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            t: g.t,
            moments: g.clone(),
            results,
        })
    }

    /// Report over [`standard_criteria`].
    pub fn standard(g: &GaussianMoments) -> Result<Self> {
        Self::evaluate(g, &standard_criteria(g.n_wells))
    }

    /// Report on the full ensemble at sample `k`, with each optimum's
    /// standard error taken from the replicas' own optima.
    pub fn from_ensemble(ens: &Ensemble, k: usize, criteria: &[Criterion]) -> Result<Self> {
        let mut report = Self::evaluate(&ens.moments_at_index(k)?, criteria)?;
        for r in &mut report.results {
            let c = r.criterion;
            let e = ens.estimate(k, |g| Ok(optimize_angle(g, &c)?.value))?;
            r.std_err = Some(e.std_err);
        }
        Ok(report)
    }

    pub fn get(&self, criterion: &Criterion) -> Option<&CriterionResult> {
        self.results.iter().find(|r| &r.criterion == criterion)
    }

    pub fn by_label(&self, label: &str) -> Option<&CriterionResult> {
        self.results.iter().find(|r| r.label == label)
    }

    fn require(&self, criterion: &Criterion) -> Result<&CriterionResult> {
        self.get(criterion)
            .ok_or_else(|| Error::IncompleteReport(format!("missing {}", criterion.label())))
    }
}

/// Steering relations within one pair of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFlags {
    pub pair: (usize, usize),
    /// Duan-Simon optimum below 4.
    pub inseparable: bool,
    /// `EPR_ij < 1`: the first mode is steered by the second.
    pub first_steered: bool,
    /// `EPR_ji < 1`.
    pub second_steered: bool,
    /// One optimised product is below 1 and the other is not.
    pub asymmetric: bool,
    /// Some angle has both directions below 1 simultaneously.
    pub mutual_at_common_angle: bool,
    /// At every angle on the grid at most one direction is below 1 while
    /// steering occurs somewhere.
    pub one_way_at_every_angle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleFlags {
    pub label: String,
    /// Below 4.
    pub inseparable: bool,
    /// Below 2.
    pub genuine_entanglement: bool,
    /// Below 1.
    pub genuine_steering: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub squeezed: Vec<bool>,
    pub pairs: Vec<PairFlags>,
    /// Per `V12`, `V13`, `V23`: optimum below 4.
    pub vlf_pair_violated: Vec<bool>,
    /// At least two of the pair inequalities violated.
    pub vlf_inseparable: bool,
    pub vlf_sum: Option<f64>,
    /// Pair sum below 8.
    pub sum_entangled: bool,
    /// Pair sum below 4.
    pub sum_steering: bool,
    pub triples: Vec<TripleFlags>,
    /// Per `OBR123`, `OBR231`, `OBR312`: optimum below 1.
    pub obr_steered: Vec<bool>,
    pub bipartite_entangled: bool,
    pub tripartite_entangled: bool,
    /// Both bipartite and tripartite entanglement witnessed.
    pub w_type: bool,
}

/// Derives classification flags from a report holding the standard criteria.
pub fn classify(report: &CorrelationReport) -> Result<Classification> {
    classify_with_margin(report, 0.0)
}

/// As [`classify`], but a value only counts as below a threshold when
/// `value + z·σ` is, and as above it when `value − z·σ` is not below.
/// Results without a standard error use `σ = 0`.
pub fn classify_with_margin(report: &CorrelationReport, z: f64) -> Result<Classification> {
    let n = report.moments.n_wells;
    let below = |r: &CriterionResult, thr: f64| r.optimum.value + z * r.std_err.unwrap_or(0.0) < thr;
    let above = |r: &CriterionResult, thr: f64| r.optimum.value - z * r.std_err.unwrap_or(0.0) >= thr;
    let squeezed = (0..n)
        .map(|i| Ok(below(report.require(&Criterion::VarX { i })?, 1.0)))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let ds = report.require(&Criterion::DuanSimon { j, k })?;
            let ejk = report.require(&Criterion::Epr { i: j, j: k })?;
            let ekj = report.require(&Criterion::Epr { i: k, j })?;
            let first_steered = below(ejk, 1.0);
            let second_steered = below(ekj, 1.0);
            // Scan values share the standard error of their optimum.
            let (mjk, mkj) = (z * ejk.std_err.unwrap_or(0.0), z * ekj.std_err.unwrap_or(0.0));
            let both = ejk.scan.iter().zip(&ekj.scan).any(|(a, b)| a + mjk < 1.0 && b + mkj < 1.0);
            let any = ejk.scan.iter().any(|v| v + mjk < 1.0) || ekj.scan.iter().any(|v| v + mkj < 1.0);
            pairs.push(PairFlags {
                pair: (j, k),
                inseparable: below(ds, 4.0),
                first_steered,
                second_steered,
                asymmetric: (first_steered && above(ekj, 1.0))
                    || (second_steered && above(ejk, 1.0)),
                mutual_at_common_angle: both,
                one_way_at_every_angle: any && !both,
            });
        }
    }

    let mut c = Classification {
        squeezed,
        pairs,
        vlf_pair_violated: vec![],
        vlf_inseparable: false,
        vlf_sum: None,
        sum_entangled: false,
        sum_steering: false,
        triples: vec![],
        obr_steered: vec![],
        bipartite_entangled: false,
        tripartite_entangled: false,
        w_type: false,
    };
    c.bipartite_entangled = c
        .pairs
        .iter()
        .any(|p| p.inseparable || p.first_steered || p.second_steered);

    if n == 3 {
        for (i, j, k) in TRIMER_PAIRS {
            let r = report.require(&Criterion::VlfPair { i, j, k })?;
            c.vlf_pair_violated.push(below(r, 4.0));
        }
        c.vlf_inseparable = c.vlf_pair_violated.iter().filter(|v| **v).count() >= 2;
        let sum = report.require(&Criterion::VlfSum)?;
        c.vlf_sum = Some(sum.optimum.value);
        c.sum_entangled = below(sum, 8.0);
        c.sum_steering = below(sum, 4.0);
        for (i, j, k) in TRIMER_CYCLIC {
            let r = report.require(&Criterion::VlfTriple { i, j, k })?;
            c.triples.push(TripleFlags {
                label: r.label.clone(),
                inseparable: below(r, 4.0),
                genuine_entanglement: below(r, 2.0),
                genuine_steering: below(r, 1.0),
            });
            let o = report.require(&Criterion::Obr { i, j, k })?;
            c.obr_steered.push(below(o, 1.0));
        }
        c.tripartite_entangled = c.vlf_inseparable
            || c.sum_entangled
            || c.triples.iter().any(|t| t.genuine_entanglement)
            || c.obr_steered.iter().any(|s| *s);
    }
    c.w_type = c.bipartite_entangled && c.tripartite_entangled;
    Ok(c)
}

/// Builds a moment set from a real covariance of `(Re α, Im α)`. The layout
/// of `cov` is `2n × 2n` row-major with the real parts first.
pub fn moments_from_real_covariance(mean: &[Complex64], cov: &[f64]) -> GaussianMoments {
    let n = mean.len();
    let d = 2 * n;
    assert_eq!(cov.len(), d * d);
    let at = |a: usize, b: usize| cov[a * d + b];
    let mut s = vec![Complex64::new(0.0, 0.0); n * n];
    let mut c = s.clone();
    for i in 0..n {
        for j in 0..n {
            let (xi, yi, xj, yj) = (i, n + i, j, n + j);
            s[i * n + j] = Complex64::new(
                at(xi, xj) - at(yi, yj),
                at(xi, yj) + at(yi, xj),
            );
            c[i * n + j] = Complex64::new(
                at(xi, xj) + at(yi, yj),
                at(xi, yj) - at(yi, xj),
            );
        }
    }
    GaussianMoments {
        n_wells: n,
        t: 0.0,
        n_samples: 0,
        m: mean.to_vec(),
        s,
        c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(s: Complex64, cc: f64) -> GaussianMoments {
        GaussianMoments {
            n_wells: 1,
            t: 0.0,
            n_samples: 0,
            m: vec![c(0.0, 0.0)],
            s: vec![s],
            c: vec![c(cc, 0.0)],
        }
    }

    /// Random physical-looking moments: covariance `A Aᵀ + I/4` of the real
    /// and imaginary parts, so the state is at least as noisy as the vacuum.
    fn random_moments(seed: u64, n: usize) -> GaussianMoments {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 2 * n;
        let a: Vec<f64> = (0..d * d).map(|_| 0.6 * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut cov = vec![0.0; d * d];
        for r in 0..d {
            for col in 0..d {
                let mut acc = if r == col { 0.25 } else { 0.0 };
                for p in 0..d {
                    acc += a[r * d + p] * a[col * d + p];
                }
                cov[r * d + col] = acc;
            }
        }
        let mean: Vec<Complex64> = (0..n)
            .map(|_| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        moments_from_real_covariance(&mean, &cov)
    }

    #[test]
    fn vacuum_boundary_values() {
        let g = GaussianMoments::vacuum(3);
        for deg in [0.0, 17.0, 90.0, 133.3] {
            let th = f64::to_radians(deg);
            let q = quad_stats(&g, th);
            for i in 0..3 {
                assert!((q.var_x(i) - 1.0).abs() < 1e-15);
                assert!((q.var_y(i) - 1.0).abs() < 1e-15);
                for j in 0..3 {
                    if i != j {
                        assert_eq!(q.cov_x(i, j), 0.0);
                        assert_eq!(q.cov_y(i, j), 0.0);
                    }
                }
            }
            assert_eq!(duan_simon(&g, 0, 1, th).unwrap(), 4.0);
            assert_eq!(reid_epr(&g, 0, 1, th).unwrap(), 1.0);
            assert_eq!(vlf_pair(&g, 0, 1, 2, th).unwrap().0, 4.0);
            assert_eq!(vlf_pair(&g, 0, 1, 2, th).unwrap().1, 0.0);
            assert!((vlf_triple(&g, 0, 1, 2, th).unwrap() - 4.0).abs() < 1e-14);
            assert_eq!(obr(&g, 0, 1, 2, th).unwrap().0, 1.0);
        }
        assert_eq!(squeezing(&g, 1).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn unphysical_moments_break_uncertainty_bound() {
        let g = single(c(0.25, 0.0), 0.5);
        let q = quad_stats(&g, 0.0);
        assert!((q.var_x(0) - 1.5).abs() < 1e-15);
        assert!((q.var_y(0) - 0.5).abs() < 1e-15);
        assert!(uncertainty_product(&g, 0, 0.0).unwrap() < 1.0);
    }

    #[test]
    fn squeezing_closed_form_matches_grid() {
        for (s, cc) in [(c(0.3, 0.2), 0.9), (c(-0.1, -0.4), 1.2), (c(0.5, 0.0), 0.8)] {
            let g = single(s, cc);
            let (v, theta) = squeezing(&g, 0).unwrap();
            let opt = optimize_angle(&g, &Criterion::VarX { i: 0 }).unwrap();
            assert!((opt.value - v).abs() < 1e-4, "{} vs {v}", opt.value);
            let diff = (opt.theta_deg - theta).abs();
            assert!(diff.min(180.0 - diff) <= 0.1 + 1e-9, "{} vs {theta}", opt.theta_deg);
            let exact = quad_stats(&g, theta.to_radians()).var_x(0);
            assert!((exact - v).abs() < 1e-12);
        }
    }

    #[test]
    fn index_errors() {
        let g = GaussianMoments::vacuum(3);
        assert!(matches!(duan_simon(&g, 1, 1, 0.0), Err(Error::RepeatedIndex(_))));
        assert!(matches!(reid_epr(&g, 0, 3, 0.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(obr(&g, 0, 1, 1, 0.0), Err(Error::RepeatedIndex(_))));
    }

    #[test]
    fn degenerate_conditioning_is_an_error() {
        let mut g = GaussianMoments::vacuum(3);
        g.c[4] = c(0.0, 0.0); // mode 1 noiseless
        assert!(matches!(reid_epr(&g, 0, 1, 0.3), Err(Error::DegenerateConditioning(_))));
        assert!(matches!(vlf_pair(&g, 0, 2, 1, 0.3), Err(Error::DegenerateConditioning(_))));
        assert!(reid_epr(&g, 1, 0, 0.3).is_ok());
    }

    #[test]
    fn incomplete_report_is_rejected() {
        let g = GaussianMoments::vacuum(3);
        let report = CorrelationReport::evaluate(&g, &[Criterion::VarX { i: 0 }]).unwrap();
        assert!(matches!(classify(&report), Err(Error::IncompleteReport(_))));
    }

    #[test]
    fn vacuum_report_sets_no_flags() {
        let report = CorrelationReport::standard(&GaussianMoments::vacuum(3)).unwrap();
        let flags = classify(&report).unwrap();
        assert_eq!(flags.squeezed, vec![false; 3]);
        for p in &flags.pairs {
            assert!(!p.inseparable && !p.first_steered && !p.second_steered && !p.asymmetric);
            assert!(!p.mutual_at_common_angle && !p.one_way_at_every_angle);
        }
        assert!(!flags.vlf_inseparable && !flags.sum_entangled && !flags.sum_steering);
        assert_eq!(flags.vlf_sum, Some(12.0));
        assert!(flags.triples.iter().all(|t| !t.inseparable));
        assert_eq!(flags.obr_steered, vec![false; 3]);
        assert!(!flags.bipartite_entangled && !flags.tripartite_entangled && !flags.w_type);
    }

    #[test]
    fn margin_hides_insignificant_steering() {
        let mut report = CorrelationReport::standard(&GaussianMoments::vacuum(3)).unwrap();
        for r in &mut report.results {
            r.std_err = Some(0.01);
            if r.label == "EPR12" {
                r.optimum.value = 0.99;
            }
        }
        let plain = classify(&report).unwrap();
        assert!(plain.pairs[0].first_steered && plain.pairs[0].asymmetric);
        let strict = classify_with_margin(&report, 3.0).unwrap();
        assert!(!strict.pairs[0].first_steered && !strict.pairs[0].asymmetric);
        // Clearly below, but the other direction is indistinguishable from 1.
        report.results.iter_mut().find(|r| r.label == "EPR12").unwrap().optimum.value = 0.9;
        let strict = classify_with_margin(&report, 3.0).unwrap();
        assert!(strict.pairs[0].first_steered && !strict.pairs[0].asymmetric);
        report.results.iter_mut().find(|r| r.label == "EPR21").unwrap().optimum.value = 1.05;
        assert!(classify_with_margin(&report, 3.0).unwrap().pairs[0].asymmetric);
    }

    #[test]
    fn labels_are_one_based() {
        let labels: Vec<String> = standard_criteria(3).iter().map(Criterion::label).collect();
        for want in ["VX1", "DS23", "EPR32", "V13", "V231", "OBR312", "VSUM"] {
            assert!(labels.contains(&want.to_string()), "{want}");
        }
        assert_eq!(Criterion::VlfPair { i: 0, j: 2, k: 1 }.label(), "V13");
    }

    /// Draws samples with the given moments and evaluates every criterion
    /// from sample quadratures directly.
    #[test]
    fn criteria_agree_with_sampled_quadratures() {
        let n = 3;
        let d = 2 * n;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a: Vec<f64> = (0..d * d).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut cov = vec![0.0; d * d];
        for r in 0..d {
            for col in 0..d {
                cov[r * d + col] = (0..d).map(|p| a[r * d + p] * a[col * d + p]).sum::<f64>()
                    + if r == col { 0.25 } else { 0.0 };
            }
        }
        let mean = vec![c(1.0, -2.0), c(0.5, 0.5), c(-3.0, 0.0)];
        let g = moments_from_real_covariance(&mean, &cov);

        let samples = 400_000;
        let theta = 0.7f64;
        let rot = Complex64::from_polar(1.0, -theta);
        let mut xs = vec![vec![0.0; samples]; n];
        let mut ys = vec![vec![0.0; samples]; n];
        for s in 0..samples {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            for i in 0..n {
                let re = mean[i].re + (0..d).map(|p| a[i * d + p] * z[p]).sum::<f64>();
                let im = mean[i].im + (0..d).map(|p| a[(n + i) * d + p] * z[p]).sum::<f64>();
                // Isotropic vacuum-width part: independent draws.
                let u: f64 = StandardNormal.sample(&mut rng);
                let v: f64 = StandardNormal.sample(&mut rng);
                let alpha = c(re + 0.5 * u, im + 0.5 * v);
                xs[i][s] = 2.0 * (alpha * rot).re;
                ys[i][s] = 2.0 * (alpha * rot).im;
            }
        }
        let cov_of = |u: &[f64], v: &[f64]| {
            let mu = u.iter().sum::<f64>() / samples as f64;
            let mv = v.iter().sum::<f64>() / samples as f64;
            u.iter().zip(v).map(|(a, b)| (a - mu) * (b - mv)).sum::<f64>() / samples as f64
        };
        let lin = |coef: &[f64], q: &[Vec<f64>]| -> Vec<f64> {
            (0..samples).map(|s| coef.iter().zip(q).map(|(c, col)| c * col[s]).sum()).collect()
        };
        let var_of = |u: &[f64]| cov_of(u, u);

        let q = quad_stats(&g, theta);
        for i in 0..n {
            let mx = xs[i].iter().sum::<f64>() / samples as f64;
            assert!((mx - q.mean_x[i]).abs() < 0.02);
            for j in 0..n {
                assert!((cov_of(&xs[i], &xs[j]) - q.cov_x(i, j)).abs() < 0.03 * (1.0 + q.cov_x(i, i)));
                assert!((cov_of(&ys[i], &ys[j]) - q.cov_y(i, j)).abs() < 0.03 * (1.0 + q.cov_y(i, i)));
            }
        }
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);

        let ds = var_of(&lin(&[1.0, 1.0, 0.0], &xs)) + var_of(&lin(&[1.0, -1.0, 0.0], &ys));
        assert!(rel(ds, duan_simon(&g, 0, 1, theta).unwrap()) < 0.02);

        let inf = |u: &[f64], v: &[f64]| var_of(u) - cov_of(u, v).powi(2) / var_of(v);
        let epr = inf(&xs[1], &xs[2]) * inf(&ys[1], &ys[2]);
        assert!(rel(epr, reid_epr(&g, 1, 2, theta).unwrap()) < 0.03);

        let (vp, gain) = vlf_pair(&g, 0, 2, 1, theta).unwrap();
        let v_direct = var_of(&lin(&[1.0, 0.0, -1.0], &xs)) + var_of(&lin(&[1.0, gain, 1.0], &ys));
        assert!(rel(v_direct, vp) < 0.02);

        let w = std::f64::consts::FRAC_1_SQRT_2;
        let vt = var_of(&lin(&[-w, -w, 1.0], &xs)) + var_of(&lin(&[w, w, 1.0], &ys));
        assert!(rel(vt, vlf_triple(&g, 2, 0, 1, theta).unwrap()) < 0.02);

        let (ob, signs) = obr(&g, 0, 1, 2, theta).unwrap();
        let jx = lin(&[0.0, 1.0, f64::from(signs.x)], &xs);
        let jy = lin(&[0.0, 1.0, f64::from(signs.y)], &ys);
        let ob_direct = inf(&xs[0], &jx) * inf(&ys[0], &jy);
        assert!(rel(ob_direct, ob) < 0.03);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn criteria_are_pi_periodic(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            for crit in standard_criteria(3) {
                let a = crit.value(&g, theta).unwrap();
                let b = crit.value(&g, theta + PI).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{}", crit);
            }
        }

        #[test]
        fn y_is_x_rotated(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            let here = quad_stats(&g, theta);
            let rotated = quad_stats(&g, theta + PI / 2.0);
            for p in 0..9 {
                prop_assert!((rotated.xx[p] - here.yy[p]).abs() < 1e-9);
            }
            for i in 0..3 {
                prop_assert!((rotated.mean_x[i] - here.mean_y[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn physical_moments_respect_uncertainty(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            for i in 0..3 {
                prop_assert!(uncertainty_product(&g, i, theta).unwrap() >= 1.0 - 1e-9);
            }
        }

        #[test]
        fn inference_never_increases_variance(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let epr = reid_epr(&g, i, j, theta).unwrap();
                        let bound = uncertainty_product(&g, i, theta).unwrap();
                        prop_assert!(epr <= bound * (1.0 + 1e-12));
                    }
                }
            }
        }

        #[test]
        fn duan_simon_is_symmetric(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            let a = duan_simon(&g, 0, 2, theta).unwrap();
            let b = duan_simon(&g, 2, 0, theta).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }

        #[test]
        fn optimal_gain_beats_any_gain(seed in 0u64..10_000, theta in 0.0..PI) {
            let g = random_moments(seed, 3);
            let (opt, gain) = vlf_pair(&g, 0, 1, 2, theta).unwrap();
            let zero = vlf_pair_with_gain(&g, 0, 1, 2, theta, 0.0).unwrap();
            prop_assert!(opt <= zero + 1e-12);
            let scan_min = (-400..=400)
                .map(|s| vlf_pair_with_gain(&g, 0, 1, 2, theta, f64::from(s) * 0.01).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(opt <= scan_min + 1e-12);
            let at_gain = vlf_pair_with_gain(&g, 0, 1, 2, theta, gain).unwrap();
            prop_assert!((at_gain - opt).abs() < 1e-12 * opt.max(1.0));
        }

        #[test]
        fn optimum_beats_every_grid_angle(seed in 0u64..10_000) {
            let g = random_moments(seed, 3);
            for crit in [Criterion::DuanSimon { j: 0, k: 1 }, Criterion::Obr { i: 2, j: 0, k: 1 }] {
                let opt = optimize_angle(&g, &crit).unwrap();
                prop_assert!((0.0..180.0).contains(&opt.theta_deg));
                for d in 0..180 {
                    let v = crit.value(&g, f64::from(d).to_radians()).unwrap();
                    prop_assert!(opt.value <= v);
                }
            }
        }
    }
}
