//! Two-sided Wiener paths with the shift group `θ_t ω = ω(· + t) − ω(t)`,
//! and the stationary Ornstein–Uhlenbeck process `dz + Az dt = dW` evaluated
//! along a stored path.
//!
//! Paths live on an integer-indexed grid. Shifts only move the anchor index,
//! so `θ_s ∘ θ_t = θ_{s+t}` holds bit for bit and the OU process of a shifted
//! path is an index shift of the OU process of the original path.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, StateVector};

const STREAM_FORWARD: u64 = 1;
const STREAM_BACKWARD: u64 = 2;
const STREAM_STATIONARY: u64 = 3;
const STREAM_EXACT: u64 = 4;

/// Number of whole steps of size `h` in `t`; fails if `t` is off-grid.
pub fn grid_steps(t: f64, h: f64) -> Result<isize> {
    let r = t / h;
    let k = r.round();
    if !r.is_finite() || (r - k).abs() > 1e-6 {
        return Err(Error::Alignment { t, h });
    }
    Ok(k as isize)
}

/// Uniform grid `t_j = (j - n_neg)·h`, `j = 0..=n_neg + n_pos`; 0 is always a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub h: f64,
    pub n_neg: usize,
    pub n_pos: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("grid step h = {h} must be positive")));
        }
        if !(t_min < 0.0 && t_max > 0.0) {
            return Err(Error::Parameter(format!(
                "grid [{t_min}, {t_max}] must contain 0 in its interior"
            )));
        }
        let n_neg = -grid_steps(t_min, h)?;
        let n_pos = grid_steps(t_max, h)?;
        Ok(TimeGrid {
            h,
            n_neg: n_neg as usize,
            n_pos: n_pos as usize,
        })
    }

    pub fn nodes(&self) -> usize {
        self.n_neg + self.n_pos + 1
    }

    pub fn t_min(&self) -> f64 {
        -(self.n_neg as f64) * self.h
    }

    pub fn t_max(&self) -> f64 {
        self.n_pos as f64 * self.h
    }

    /// Time of the node with storage index `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.n_neg as f64) * self.h
    }
}

/// Per-mode variances of the trace-class covariance `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub q: Vec<f64>,
}

impl CovarianceSpec {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some(bad) = q.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Parameter(format!("covariance entry {bad} is negative")));
        }
        Ok(CovarianceSpec { q })
    }

    pub fn zero(len: usize) -> Self {
        CovarianceSpec { q: vec![0.0; len] }
    }

    pub fn trace(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// A sampled two-sided path `ω` with `ω(0) = 0`.
///
/// `raw` holds the cumulative sums from sampling; the path value at node `i`
/// is `raw[i] − raw[anchor]`, which realizes `θ_t` as an anchor move.
#[derive(Debug, Clone)]
pub struct WienerPath {
    h: f64,
    modes: usize,
    nodes: usize,
    anchor: usize,
    raw: Arc<Vec<f64>>,
    cov: CovarianceSpec,
    seed: u64,
}

pub fn sample_wiener(seed: u64, grid: TimeGrid, cov: &CovarianceSpec) -> WienerPath {
    let modes = cov.q.len();
    let nodes = grid.nodes();
    let mut raw = vec![0.0; nodes * modes];
    let scale: Vec<f64> = cov.q.iter().map(|q| (q * grid.h).sqrt()).collect();

    let mut fwd = ChaCha8Rng::seed_from_u64(seed);
    fwd.set_stream(STREAM_FORWARD);
    for i in grid.n_neg..nodes - 1 {
        for j in 0..modes {
            let xi: f64 = StandardNormal.sample(&mut fwd);
            raw[(i + 1) * modes + j] = raw[i * modes + j] + scale[j] * xi;
        }
    }
    let mut bwd = ChaCha8Rng::seed_from_u64(seed);
    bwd.set_stream(STREAM_BACKWARD);
    for i in (1..=grid.n_neg).rev() {
        for j in 0..modes {
            let xi: f64 = StandardNormal.sample(&mut bwd);
            raw[(i - 1) * modes + j] = raw[i * modes + j] - scale[j] * xi;
        }
    }

    WienerPath {
        h: grid.h,
        modes,
        nodes,
        anchor: grid.n_neg,
        raw: Arc::new(raw),
        cov: cov.clone(),
        seed,
    }
}

/// `θ_{t_k} ω`; `t_k` must be a grid multiple and keep the anchor in storage.
pub fn shift_path(w: &WienerPath, t_k: f64) -> Result<WienerPath> {
    let k = grid_steps(t_k, w.h)?;
    let anchor = w.anchor as isize + k;
    if anchor < 0 || anchor >= w.nodes as isize {
        return Err(Error::Range(format!(
            "shift by {t_k} leaves the stored path [{}, {}]",
            w.grid().t_min(),
            w.grid().t_max()
        )));
    }
    Ok(WienerPath {
        anchor: anchor as usize,
        ..w.clone()
    })
}

impl WienerPath {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn covariance(&self) -> &CovarianceSpec {
        &self.cov
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            h: self.h,
            n_neg: self.anchor,
            n_pos: self.nodes - 1 - self.anchor,
        }
    }

    /// `ω(t)` at a grid-aligned time.
    pub fn value_at(&self, t: f64) -> Result<StateVector> {
        let i = self.anchor as isize + grid_steps(t, self.h)?;
        if i < 0 || i >= self.nodes as isize {
            return Err(Error::Range(format!("t = {t} outside the stored path")));
        }
        Ok(self.value(i as usize))
    }

    /// Path value at storage index `i`.
    pub fn value(&self, i: usize) -> StateVector {
        let m = self.modes;
        let (row, base) = (&self.raw[i * m..(i + 1) * m], &self.raw[self.anchor * m..(self.anchor + 1) * m]);
        StateVector(row.iter().zip(base).map(|(a, b)| a - b).collect())
    }

    /// Increment `ω(t_{i+1}) − ω(t_i)` over the step starting at storage index `i`.
    fn increment(&self, i: usize, j: usize) -> f64 {
        self.raw[(i + 1) * self.modes + j] - self.raw[i * self.modes + j]
    }

    /// The same path observed on a grid `factor` times coarser.
    ///
    /// Node values are copied, so the coarse path is the same `ω`.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        if factor == 0 {
            return Err(Error::Parameter("coarsening factor must be positive".into()));
        }
        let first = self.anchor % factor;
        let kept: Vec<usize> = (first..self.nodes).step_by(factor).collect();
        let mut raw = Vec::with_capacity(kept.len() * self.modes);
        for &i in &kept {
            raw.extend_from_slice(&self.raw[i * self.modes..(i + 1) * self.modes]);
        }
        Ok(WienerPath {
            h: self.h * factor as f64,
            modes: self.modes,
            nodes: kept.len(),
            anchor: self.anchor / factor,
            raw: Arc::new(raw),
            cov: self.cov.clone(),
            seed: self.seed,
        })
    }
}

/// How the stochastic convolution over one step is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuScheme {
    /// `ΔW_j · (1 − e^{−λ_j h}) / (λ_j h)`: a deterministic functional of the path.
    #[default]
    PathQuadrature,
    /// Exactly distributed pair: the quadrature term plus an independent
    /// correction carrying the conditional variance. Not a functional of the
    /// stored increments alone.
    ExactVariance,
}

/// `z(θ_t ω)` on the grid of the path it was solved on.
#[derive(Debug, Clone)]
pub struct OuProcess {
    h: f64,
    modes: usize,
    nodes: usize,
    anchor: usize,
    data: Arc<Vec<f64>>,
    seed: u64,
}

pub fn solve_ou(w: &WienerPath, s: &Spectrum, scheme: OuScheme) -> Result<OuProcess> {
    s.check_len(w.modes)?;
    if !(w.h > 0.0) {
        return Err(Error::Parameter("grid step must be positive".into()));
    }
    let m = w.modes;
    let h = w.h;
    let lam = s.lambdas();
    let q = &w.cov.q;
    let decay: Vec<f64> = lam.iter().map(|l| (-l * h).exp()).collect();
    let quad: Vec<f64> = lam.iter().map(|l| -(-l * h).exp_m1() / (l * h)).collect();

    let mut data = vec![0.0; w.nodes * m];
    let mut init = ChaCha8Rng::seed_from_u64(w.seed);
    init.set_stream(STREAM_STATIONARY);
    for j in 0..m {
        let xi: f64 = StandardNormal.sample(&mut init);
        data[j] = (q[j] / (2.0 * lam[j])).sqrt() * xi;
    }

    let mut extra = ChaCha8Rng::seed_from_u64(w.seed);
    extra.set_stream(STREAM_EXACT);
    // Conditional variance of ∫ e^{-λ(h-r)} dW given the increment ΔW.
    let cond_sd: Vec<f64> = lam
        .iter()
        .zip(q)
        .map(|(l, q)| {
            let total = -q * (-2.0 * l * h).exp_m1() / (2.0 * l);
            let explained = q * h * ((-l * h).exp_m1() / (l * h)).powi(2);
            (total - explained).max(0.0).sqrt()
        })
        .collect();

    for i in 0..w.nodes - 1 {
        for j in 0..m {
            let mut noise = w.increment(i, j) * quad[j];
            if scheme == OuScheme::ExactVariance {
                let xi: f64 = StandardNormal.sample(&mut extra);
                noise += cond_sd[j] * xi;
            }
            data[(i + 1) * m + j] = decay[j] * data[i * m + j] + noise;
        }
    }

    Ok(OuProcess {
        h,
        modes: m,
        nodes: w.nodes,
        anchor: w.anchor,
        data: Arc::new(data),
        seed: w.seed,
    })
}

impl OuProcess {
    /// `z ≡ 0` on `grid` (the `q = 0` case without sampling).
    pub fn zero(modes: usize, grid: TimeGrid) -> Self {
        OuProcess {
            h: grid.h,
            modes,
            nodes: grid.nodes(),
            anchor: grid.n_neg,
            data: Arc::new(vec![0.0; grid.nodes() * modes]),
            seed: 0,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            h: self.h,
            n_neg: self.anchor,
            n_pos: self.nodes - 1 - self.anchor,
        }
    }

    /// `z(θ_{kh} ω)` for a step offset `k` from the anchor.
    pub fn at(&self, k: isize) -> Option<&[f64]> {
        let i = self.anchor as isize + k;
        if i < 0 || i >= self.nodes as isize {
            return None;
        }
        let i = i as usize;
        Some(&self.data[i * self.modes..(i + 1) * self.modes])
    }

    pub fn at_time(&self, t: f64) -> Result<StateVector> {
        let k = grid_steps(t, self.h)?;
        self.at(k)
            .map(|z| StateVector(z.to_vec()))
            .ok_or_else(|| Error::Range(format!("t = {t} outside the OU grid")))
    }

    /// `z(ω)`, the value at time 0.
    pub fn origin(&self) -> StateVector {
        StateVector(self.at(0).expect("anchor is stored").to_vec())
    }

    /// Fails unless steps `lo..=hi` around the anchor are stored.
    pub fn require(&self, lo: isize, hi: isize) -> Result<()> {
        if self.at(lo).is_none() || self.at(hi).is_none() {
            return Err(Error::Range(format!(
                "OU process stored on [{}, {}] but [{}, {}] is required",
                self.grid().t_min(),
                self.grid().t_max(),
                lo as f64 * self.h,
                hi as f64 * self.h
            )));
        }
        Ok(())
    }

    /// The OU process of `θ_t ω`.
    pub fn shifted(&self, t: f64) -> Result<OuProcess> {
        self.shifted_steps(grid_steps(t, self.h)?)
    }

    pub fn shifted_steps(&self, k: isize) -> Result<OuProcess> {
        let anchor = self.anchor as isize + k;
        if anchor < 0 || anchor >= self.nodes as isize {
            return Err(Error::Range(format!(
                "shift by {} steps leaves the stored OU process",
                k
            )));
        }
        Ok(OuProcess {
            anchor: anchor as usize,
            ..self.clone()
        })
    }

    /// Rows `(t, z(t))` over the stored grid.
    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        (0..self.nodes).map(move |i| {
            (
                (i as f64 - self.anchor as f64) * self.h,
                &self.data[i * self.modes..(i + 1) * self.modes],
            )
        })
    }
}

/// `max_{t ≤ 0} e^{ct} ‖A^α z(t)‖` over the stored grid.
pub fn temperedness_ratio(z: &OuProcess, s: &Spectrum, c: f64, alpha: f64) -> Result<f64> {
    Ok(temperedness_profile(z, s, c, alpha)?
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max))
}

/// `(t, e^{ct} ‖A^α z(t)‖)` for every stored `t ≤ 0`, oldest first.
pub fn temperedness_profile(
    z: &OuProcess,
    s: &Spectrum,
    c: f64,
    alpha: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("temperedness rate c = {c} must be positive")));
    }
    s.check_len(z.modes)?;
    let w: Vec<f64> = s.lambdas().iter().map(|l| l.powf(alpha)).collect();
    Ok(z.rows()
        .filter(|(t, _)| *t <= 0.0)
        .map(|(t, v)| {
            let n = v
                .iter()
                .zip(&w)
                .map(|(x, w)| (x * w) * (x * w))
                .sum::<f64>()
                .sqrt();
            (t, (c * t).exp() * n)
        })
        .collect())
}
