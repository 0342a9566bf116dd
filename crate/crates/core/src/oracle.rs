// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact Lindblad integration in a truncated product Fock basis.
//!
//! Only practical for weak pumping, where a handful of Fock levels per mode
//! suffice. Produces [`GaussianMoments`] so its output can be compared with
//! the stochastic engine directly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::GaussianMoments;
use crate::error::{Error, Result};
use crate::model::SystemSpec;

pub const DEFAULT_DIM_CAP: usize = 10_000;
/// Largest tolerated `|tr ρ − 1|`.
pub const TRACE_TOLERANCE: f64 = 1e-6;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockConfig {
    /// Highest occupation kept per mode.
    pub n_max: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between stored states.
    pub sample_every: usize,
    #[serde(default = "default_cap")]
    pub dim_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}

impl FockConfig {
    pub fn new(n_max: usize, dt: f64, t_final: f64, sample_interval: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("oracle dt = {dt} must be positive")));
        }
        if !(sample_interval > 0.0) || !sample_interval.is_finite() {
            return Err(Error::Config(format!(
                "oracle sample interval {sample_interval} must be positive"
            )));
        }
        let ratio = sample_interval / dt;
        let sample_every = ratio.round();
        if sample_every < 1.0 || (ratio - sample_every).abs() > 1e-9 * ratio {
            return Err(Error::Config(format!(
                "oracle sample interval {sample_interval} is not a multiple of dt = {dt}"
            )));
        }
        let cfg = Self {
            n_max,
            dt,
            t_final,
            sample_every: sample_every as usize,
            dim_cap: DEFAULT_DIM_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Config("oracle n_max must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("oracle dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!(
                "oracle t_final = {} must be non-negative",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("oracle sample_every must be positive".into()));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "oracle t_final = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.n_steps() % self.sample_every != 0 {
            return Err(Error::Config(
                "oracle t_final is not a multiple of the sample interval".into(),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.n_steps() / self.sample_every;
        (0..=n)
            .map(|k| (k * self.sample_every) as f64 * self.dt)
            .collect()
    }

    /// `(n_max + 1)^n_wells`, checked against the cap.
    pub fn dimension(&self, n_wells: usize) -> Result<usize> {
        let overflow = Error::DimensionCap {
            dim: usize::MAX,
            cap: self.dim_cap,
        };
        let mut dim = 1usize;
        for _ in 0..n_wells {
            dim = dim.checked_mul(self.n_max + 1).ok_or(overflow.clone())?;
            if dim > self.dim_cap {
                return Err(Error::DimensionCap {
                    dim,
                    cap: self.dim_cap,
                });
            }
        }
        Ok(dim)
    }
}

/// Product Fock basis, last mode fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n_wells: usize,
    pub n_max: usize,
    pub dim: usize,
}

impl FockBasis {
    fn stride(&self, mode: usize) -> usize {
        (self.n_max + 1).pow((self.n_wells - 1 - mode) as u32)
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.n_max + 1)
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter()
            .enumerate()
            .map(|(m, &n)| n * self.stride(m))
            .sum()
    }
}

/// Sparse matrix stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, C)>>,
}

impl SparseOp {
    fn zero(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    fn annihilation(basis: &FockBasis, mode: usize) -> Self {
        let mut op = Self::zero(basis.dim);
        let stride = basis.stride(mode);
        for col in 0..basis.dim {
            let n = basis.occupation(col, mode);
            if n > 0 {
                op.rows[col - stride].push((col, C::new((n as f64).sqrt(), 0.0)));
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        self.rows[r]
            .iter()
            .filter(|(cc, _)| *cc == c)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out.rows[c].push((r, v.conj()));
            }
        }
        out.compact();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    out.rows[r].push((c, a * b));
                }
            }
        }
        out.compact();
        out
    }

    fn add_scaled(&mut self, other: &Self, s: C) {
        for (r, row) in other.rows.iter().enumerate() {
            self.rows[r].extend(row.iter().map(|&(c, v)| (c, v * s)));
        }
        self.compact();
    }

    fn compact(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != ZERO);
            *row = merged;
        }
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `tr(self · rho)`.
    pub fn expect(&self, rho: &DMatrix<C>) -> C {
        let mut acc = ZERO;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                acc += v * rho[(c, r)];
            }
        }
        acc
    }
}

/// Hamiltonian, annihilators and loss rates on a truncated basis.
#[derive(Debug, Clone)]
pub struct Generators {
    pub basis: FockBasis,
    pub hamiltonian: SparseOp,
    pub annihilators: Vec<SparseOp>,
    pub loss: Vec<f64>,
    /// `H − i Σ γ_i a_i†a_i`.
    h_eff: Diagonals,
    /// Per mode: basis stride and `a_i[r, r + stride]`.
    jumps: Vec<(usize, Vec<f64>)>,
}

/// Diagonal storage. Every ladder-operator product has a fixed index offset,
/// so a handful of contiguous diagonals hold the whole generator.
#[derive(Debug, Clone)]
struct Diagonals {
    dim: usize,
    /// `(offset, values)` with `values[r] = op[r, r + offset]`.
    diags: Vec<(isize, Vec<C>)>,
}

impl From<&SparseOp> for Diagonals {
    fn from(op: &SparseOp) -> Self {
        let d = op.dim;
        let mut diags: Vec<(isize, Vec<C>)> = Vec::new();
        for (r, row) in op.rows.iter().enumerate() {
            for &(c, v) in row {
                let off = c as isize - r as isize;
                let pos = match diags.iter().position(|e| e.0 == off) {
                    Some(p) => p,
                    None => {
                        diags.push((off, vec![ZERO; d]));
                        diags.len() - 1
                    }
                };
                diags[pos].1[r] += v;
            }
        }
        diags.sort_by_key(|e| e.0);
        Self { dim: d, diags }
    }
}

impl Diagonals {
    /// `out = self · rho`, column by column.
    fn apply(&self, rho: &DMatrix<C>, out: &mut DMatrix<C>) {
        let d = self.dim;
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        dst.fill(ZERO);
        for (col, o) in src.chunks_exact(d).zip(dst.chunks_exact_mut(d)) {
            for (off, vals) in &self.diags {
                let off = *off;
                let (r0, r1) = if off >= 0 {
                    (0, d - off as usize)
                } else {
                    ((-off) as usize, d)
                };
                let shifted = &col[(r0 as isize + off) as usize..(r1 as isize + off) as usize];
                for ((or, v), x) in o[r0..r1].iter_mut().zip(&vals[r0..r1]).zip(shifted) {
                    *or += v * x;
                }
            }
        }
    }
}

pub fn build_generators(spec: &SystemSpec, cfg: &FockConfig) -> Result<Generators> {
    cfg.validate()?;
    let n = spec.n_wells();
    let dim = cfg.dimension(n)?;
    let basis = FockBasis {
        n_wells: n,
        n_max: cfg.n_max,
        dim,
    };
    let a: Vec<SparseOp> = (0..n).map(|i| SparseOp::annihilation(&basis, i)).collect();
    let ad: Vec<SparseOp> = a.iter().map(SparseOp::adjoint).collect();

    let mut h = SparseOp::zero(dim);
    let one = C::new(1.0, 0.0);
    if spec.chi() != 0.0 {
        for i in 0..n {
            let ad2a2 = ad[i].mul(&ad[i]).mul(&a[i]).mul(&a[i]);
            h.add_scaled(&ad2a2, one * spec.chi());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = spec.coupling(i, j);
            if jij != 0.0 {
                h.add_scaled(&ad[i].mul(&a[j]), -one * jij);
                h.add_scaled(&ad[j].mul(&a[i]), -one * jij);
            }
        }
    }
    for (i, &eps) in spec.pump().iter().enumerate() {
        if eps != ZERO {
            h.add_scaled(&ad[i], C::i() * eps);
            h.add_scaled(&a[i], -C::i() * eps.conj());
        }
    }

    let mut h_eff = h.clone();
    for (i, &g) in spec.loss().iter().enumerate() {
        if g != 0.0 {
            h_eff.add_scaled(&ad[i].mul(&a[i]), C::new(0.0, -g));
        }
    }
    log::debug!(
        "oracle generators: dim {dim}, H nnz {}, H_eff nnz {}",
        h.nnz(),
        h_eff.nnz()
    );
    let jumps = (0..n)
        .map(|i| {
            let stride = basis.stride(i);
            let w = (0..dim)
                .map(|r| if r + stride < dim { a[i].get(r, r + stride).re } else { 0.0 })
                .collect();
            (stride, w)
        })
        .collect();
    Ok(Generators {
        basis,
        hamiltonian: h,
        annihilators: a,
        loss: spec.loss().to_vec(),
        h_eff: Diagonals::from(&h_eff),
        jumps,
    })
}

impl Generators {
    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// `−i[H, ρ] + Σ γ_i(2a_iρa_i† − a_i†a_iρ − ρa_i†a_i)` for Hermitian `ρ`.
    pub fn liouvillian(&self, rho: &DMatrix<C>, out: &mut DMatrix<C>, work: &mut DMatrix<C>) {
        // −i(H_eff ρ − ρ H_eff†) and ρ H_eff† = (H_eff ρ)†.
        self.h_eff.apply(rho, work);
        let d = self.dim();
        let w = work.as_slice();
        let o = out.as_mut_slice();
        for c in 0..d {
            for r in 0..d {
                let z = w[c * d + r] - w[r * d + c].conj();
                o[c * d + r] = C::new(z.im, -z.re);
            }
        }
        let rho = rho.as_slice();
        // (a ρ a†)_rc = w_r w_c ρ_{r+s, c+s}, with s the mode stride and
        // w_r = √(n_r + 1) (zero at the cutoff).
        for ((stride, weights), &g) in self.jumps.iter().zip(&self.loss) {
            if g == 0.0 {
                continue;
            }
            let s = *stride;
            for c in 0..d - s {
                let wc = 2.0 * g * weights[c];
                if wc == 0.0 {
                    continue;
                }
                let src = &rho[(c + s) * d + s..(c + s) * d + d];
                let dst = &mut o[c * d..c * d + d - s];
                for ((y, x), wr) in dst.iter_mut().zip(src).zip(&weights[..d - s]) {
                    *y += x * (wc * wr);
                }
            }
        }
    }
}

/// Density matrix over a truncated product Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_wells: usize,
    pub n_max: usize,
    pub t: f64,
    pub rho: DMatrix<C>,
}

impl DensityMatrix {
    fn basis(n_wells: usize, n_max: usize) -> FockBasis {
        FockBasis {
            n_wells,
            n_max,
            dim: (n_max + 1).pow(n_wells as u32),
        }
    }

    pub fn vacuum(n_wells: usize, n_max: usize) -> Self {
        let b = Self::basis(n_wells, n_max);
        let mut rho = DMatrix::zeros(b.dim, b.dim);
        rho[(0, 0)] = C::new(1.0, 0.0);
        Self {
            n_wells,
            n_max,
            t: 0.0,
            rho,
        }
    }

    /// `|n⟩⟨n|` for the occupation list `occ`.
    pub fn fock(n_max: usize, occ: &[usize]) -> Result<Self> {
        if let Some(&n) = occ.iter().find(|&&n| n > n_max) {
            return Err(Error::ParameterDomain(format!(
                "occupation {n} above cutoff {n_max}"
            )));
        }
        let b = Self::basis(occ.len(), n_max);
        let mut rho = DMatrix::zeros(b.dim, b.dim);
        let k = b.index(occ);
        rho[(k, k)] = C::new(1.0, 0.0);
        Ok(Self {
            n_wells: occ.len(),
            n_max,
            t: 0.0,
            rho,
        })
    }

    /// Product of coherent states, truncated and renormalized.
    pub fn coherent(n_max: usize, beta: &[C]) -> Self {
        let b = Self::basis(beta.len(), n_max);
        let single: Vec<Vec<C>> = beta
            .iter()
            .map(|&z| {
                let mut amp = Vec::with_capacity(n_max + 1);
                let mut cur = C::new((-0.5 * z.norm_sqr()).exp(), 0.0);
                amp.push(cur);
                for n in 1..=n_max {
                    cur = cur * z / (n as f64).sqrt();
                    amp.push(cur);
                }
                amp
            })
            .collect();
        let psi: Vec<C> = (0..b.dim)
            .map(|k| {
                (0..b.n_wells)
                    .map(|m| single[m][b.occupation(k, m)])
                    .product()
            })
            .collect();
        Self::pure(beta.len(), n_max, &psi)
    }

    /// `|ψ⟩⟨ψ|` with `ψ` normalized.
    pub fn pure(n_wells: usize, n_max: usize, psi: &[C]) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi);
        let v = &v / C::new(v.norm(), 0.0);
        Self {
            n_wells,
            n_max,
            t: 0.0,
            rho: &v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian, unit trace within `10⁻⁸`, eigenvalues ≥ −10⁻⁸.
    pub fn validate(&self) -> Result<()> {
        let d = Self::basis(self.n_wells, self.n_max).dim;
        if self.rho.nrows() != d || self.rho.ncols() != d {
            return Err(Error::Config(format!(
                "density matrix is {}x{}, basis dimension is {d}",
                self.rho.nrows(),
                self.rho.ncols()
            )));
        }
        if self.rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericDomain("density matrix"));
        }
        let herm = self.hermiticity_error();
        if herm > 1e-8 {
            return Err(Error::ParameterDomain(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - C::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::ParameterDomain(format!("trace {tr} is not 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < -1e-8 {
            return Err(Error::ParameterDomain(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// Population of the top Fock level of each mode; a truncation diagnostic.
    pub fn top_level_weight(&self) -> Vec<f64> {
        let b = Self::basis(self.n_wells, self.n_max);
        (0..self.n_wells)
            .map(|m| {
                (0..b.dim)
                    .filter(|&k| b.occupation(k, m) == self.n_max)
                    .map(|k| self.rho[(k, k)].re)
                    .sum()
            })
            .collect()
    }
}

/// Fixed-step RK4 from `rho0`, returning states at the configured sample
/// times. Trace drift is checked after every step and never corrected.
pub fn evolve(
    rho0: &DensityMatrix,
    generators: &Generators,
    cfg: &FockConfig,
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::new();
    evolve_with(rho0, generators, cfg, |s| out.push(s.clone()))?;
    Ok(out)
}

/// [`evolve`] reduced to moments at each sample time.
pub fn evolve_moments(
    rho0: &DensityMatrix,
    generators: &Generators,
    cfg: &FockConfig,
) -> Result<Vec<GaussianMoments>> {
    let mut out = Vec::new();
    evolve_with(rho0, generators, cfg, |s| out.push(moments_from_rho(s)))?;
    Ok(out)
}

fn evolve_with<F: FnMut(&DensityMatrix)>(
    rho0: &DensityMatrix,
    gen: &Generators,
    cfg: &FockConfig,
    mut on_sample: F,
) -> Result<()> {
    cfg.validate()?;
    if rho0.n_wells != gen.basis.n_wells || rho0.n_max != gen.basis.n_max {
        return Err(Error::Config(format!(
            "initial state ({} wells, n_max {}) does not match generators ({} wells, n_max {})",
            rho0.n_wells, rho0.n_max, gen.basis.n_wells, gen.basis.n_max
        )));
    }
    rho0.validate()?;

    let d = gen.dim();
    let dt = cfg.dt;
    let mut state = rho0.clone();
    let t0 = state.t;
    let mut k1 = DMatrix::zeros(d, d);
    let mut k2 = DMatrix::zeros(d, d);
    let mut k3 = DMatrix::zeros(d, d);
    let mut k4 = DMatrix::zeros(d, d);
    let mut work = DMatrix::zeros(d, d);
    let mut tmp = DMatrix::zeros(d, d);
    let half = C::new(0.5 * dt, 0.0);
    let full = C::new(dt, 0.0);
    let sixth = C::new(dt / 6.0, 0.0);
    let two = C::new(2.0, 0.0);

    on_sample(&state);
    for step in 1..=cfg.n_steps() {
        gen.liouvillian(&state.rho, &mut k1, &mut work);
        tmp.copy_from(&state.rho);
        add_into(&mut tmp, half, &k1);
        gen.liouvillian(&tmp, &mut k2, &mut work);
        tmp.copy_from(&state.rho);
        add_into(&mut tmp, half, &k2);
        gen.liouvillian(&tmp, &mut k3, &mut work);
        tmp.copy_from(&state.rho);
        add_into(&mut tmp, full, &k3);
        gen.liouvillian(&tmp, &mut k4, &mut work);

        k1 += &k2 * two;
        k1 += &k3 * two;
        k1 += &k4;
        add_into(&mut state.rho, sixth, &k1);
        state.t = t0 + step as f64 * dt;

        let tr = state.trace();
        let drift = (tr - C::new(1.0, 0.0)).norm();
        if !drift.is_finite() || drift > TRACE_TOLERANCE {
            return Err(Error::TraceDrift {
                t: state.t,
                drift,
            });
        }
        if step % cfg.sample_every == 0 {
            log::debug!("oracle t = {:.4}: trace drift {drift:e}", state.t);
            on_sample(&state);
        }
    }
    let top = state.top_level_weight();
    if top.iter().any(|&w| w > 1e-6) {
        log::warn!("oracle cutoff n_max = {} may be too small: top-level weights {top:?}", state.n_max);
    }
    Ok(())
}

/// `dst += s · src`.
fn add_into(dst: &mut DMatrix<C>, s: C, src: &DMatrix<C>) {
    for (d, x) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += s * x;
    }
}

/// Symmetric-ordered moments of `rho`, in the same layout as the ensemble.
pub fn moments_from_rho(rho: &DensityMatrix) -> GaussianMoments {
    let n = rho.n_wells;
    let b = DensityMatrix::basis(n, rho.n_max);
    let a: Vec<SparseOp> = (0..n).map(|i| SparseOp::annihilation(&b, i)).collect();
    let ad: Vec<SparseOp> = a.iter().map(SparseOp::adjoint).collect();
    let m: Vec<C> = a.iter().map(|op| op.expect(&rho.rho)).collect();
    let mut s = vec![ZERO; n * n];
    let mut c = vec![ZERO; n * n];
    for i in 0..n {
        for j in i..n {
            let aa = a[i].mul(&a[j]).expect(&rho.rho) - m[i] * m[j];
            s[i * n + j] = aa;
            s[j * n + i] = aa;
            let mut herm = ad[i].mul(&a[j]).expect(&rho.rho) - m[i].conj() * m[j];
            if i == j {
                herm = C::new(herm.re + 0.5, 0.0);
            }
            c[i * n + j] = herm;
            c[j * n + i] = herm.conj();
        }
    }
    GaussianMoments {
        n_wells: n,
        t: rho.t,
        n_samples: 0,
        m,
        s,
        c,
    }
}

/// `[a, b]`.
pub fn commutator(a: &SparseOp, b: &SparseOp) -> SparseOp {
    let mut out = a.mul(b);
    out.add_scaled(&b.mul(a), C::new(-1.0, 0.0));
    out
}
