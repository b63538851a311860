//! Gap certificate, the Lyapunov–Perron operator on the weighted space of
//! backward trajectories, its Picard fixed point and the manifold maps.
//!
//! Backward nodes are `t_i = −i·h`, `i = 0..=M`. On `[t_i, t_{i−1}]` the
//! integrand `f_i = F(ξ_i + z(t_i)) + g(t_i + h/2 + τ)` is held constant and
//! integrated exactly per mode, which reproduces the forward exponential Euler
//! step of [`crate::dynamics::integrate`]:
//!
//! * Q part: `y_M = 0`, `y_{i−1} = e^{−λh} y_i + (1 − e^{−λh})/λ · f_i`
//! * P part: `y_0 = x`, `y_i = e^{λh} y_{i−1} − (e^{λh} − 1)/λ · f_i`

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::forcing::temperedness_integral;
use crate::randomness::{grid_steps, OuProcess};
use crate::spectral::{ProjectionSplit, Propagator, Spectrum, StateVector};

/// Witness of the spectral gap condition and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub n: usize,
    pub lipschitz: f64,
    pub k: f64,
    pub alpha: f64,
    pub c_alpha: f64,
    pub mu: f64,
    pub delta: f64,
    /// `λ_{n+1} − λ_n` minus the right side of the gap inequality.
    pub margin: f64,
}

impl GapCertificate {
    /// Tracking needs `δ < 1`, i.e. `k < 1/2`.
    pub fn supports_tracking(&self) -> bool {
        self.k < 0.5
    }
}

/// `α^α Γ(1 − α)`, with `c_0 = 0`.
pub fn c_alpha(alpha: f64) -> f64 {
    if alpha == 0.0 {
        0.0
    } else {
        alpha.powf(alpha) * gamma(1.0 - alpha)
    }
}

/// `δ = k + k/(2 − 2k)`.
pub fn tracking_delta(k: f64) -> f64 {
    k + k / (2.0 - 2.0 * k)
}

fn gap_parts(s: &Spectrum, lipschitz: f64, k: f64, n: usize) -> Result<(f64, f64, f64)> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Parameter(format!("k = {k} must lie in (0, 1)")));
    }
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return Err(Error::Parameter(format!("L = {lipschitz} must be >= 0")));
    }
    if n == 0 || n >= s.len() {
        return Err(Error::Parameter(format!(
            "gap index n = {n} must satisfy 1 <= n < {}",
            s.len()
        )));
    }
    let a = s.alpha();
    let (ln, ln1) = (s.lambda(n), s.lambda(n + 1));
    let gap = ln1 - ln;
    let c = c_alpha(a);
    let rhs = 2.0 * lipschitz / k * (ln1.powf(a) + ln.powf(a) + c * gap.max(0.0).powf(a));
    Ok((gap - rhs, c, ln + 2.0 * lipschitz / k * ln.powf(a)))
}

/// Checks the gap condition at index `n`; on failure returns
/// [`Error::GapViolated`] carrying the (negative) margin.
pub fn check_gap(s: &Spectrum, lipschitz: f64, k: f64, n: usize) -> Result<GapCertificate> {
    let (margin, c, mu) = gap_parts(s, lipschitz, k, n)?;
    if margin < 0.0 || s.lambda(n + 1) <= s.lambda(n) {
        return Err(Error::GapViolated {
            n,
            margin: margin.min(s.lambda(n + 1) - s.lambda(n)),
        });
    }
    Ok(GapCertificate {
        n,
        lipschitz,
        k,
        alpha: s.alpha(),
        c_alpha: c,
        mu,
        delta: tracking_delta(k),
        margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapScanRow {
    pub n: usize,
    pub pass: bool,
    pub margin: f64,
    pub mu: f64,
    pub delta: f64,
}

/// Evaluates the gap condition for every `n` in `1..N_total`.
pub fn gap_scan(s: &Spectrum, lipschitz: f64, k: f64) -> Result<Vec<GapScanRow>> {
    (1..s.len())
        .map(|n| {
            let (margin, _, mu) = gap_parts(s, lipschitz, k, n)?;
            Ok(GapScanRow {
                n,
                pass: margin >= 0.0 && s.lambda(n + 1) > s.lambda(n),
                margin,
                mu,
                delta: tracking_delta(k),
            })
        })
        .collect()
}

fn horizon_for_rates(rates: &[f64], tol: f64, cap: f64, h: f64) -> f64 {
    let need = rates
        .iter()
        .filter(|r| **r > 1e-12)
        .map(|r| (10.0 / tol).ln() / r)
        .fold(0.0, f64::max)
        .min(cap);
    (need / h).ceil().max(1.0) * h
}

/// Smallest grid-aligned `T` with `e^{−(λ_{n+1}−μ)T} ≤ tol/10` and
/// `e^{−(μ−λ_n)T} ≤ tol/10`, capped at `cap`. Zero rates are skipped.
pub fn backward_horizon(s: &Spectrum, cert: &GapCertificate, tol: f64, cap: f64, h: f64) -> f64 {
    let rates = [s.lambda(cert.n + 1) - cert.mu, cert.mu - s.lambda(cert.n)];
    horizon_for_rates(&rates, tol, cap, h)
}

/// Smallest grid-aligned `T` with `e^{−(μ−λ_n)T} ≤ tol/10`, capped at `cap`
/// (and at `cap` when `μ = λ_n`).
pub fn forward_horizon(s: &Spectrum, cert: &GapCertificate, tol: f64, cap: f64, h: f64) -> f64 {
    let r = cert.mu - s.lambda(cert.n);
    if r <= 1e-12 {
        return (cap / h).round() * h;
    }
    horizon_for_rates(&[r], tol, cap, h)
}

/// A trajectory on `t_i = sign·i·h`, stored row-major by node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrajectory {
    h: f64,
    modes: usize,
    data: Vec<f64>,
}

/// Element of the space of backward trajectories on `[−T_back, 0]`.
pub type BackwardTrajectory = NodeTrajectory;
/// Element of the space of forward trajectories on `[0, T_fwd]`.
pub type ForwardTrajectory = NodeTrajectory;

impl NodeTrajectory {
    pub fn zeros(h: f64, modes: usize, nodes: usize) -> Self {
        NodeTrajectory {
            h,
            modes,
            data: vec![0.0; modes * nodes],
        }
    }

    pub fn from_states(h: f64, states: &[StateVector]) -> Result<Self> {
        let modes = states.first().map(|s| s.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(modes * states.len());
        for st in states {
            if st.len() != modes {
                return Err(Error::Dimension {
                    expected: modes,
                    got: st.len(),
                });
            }
            data.extend_from_slice(st);
        }
        Ok(NodeTrajectory { h, modes, data })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes(&self) -> usize {
        self.data.len().checked_div(self.modes).unwrap_or(0)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.modes..(i + 1) * self.modes]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.modes..(i + 1) * self.modes]
    }

    pub fn state(&self, i: usize) -> StateVector {
        StateVector(self.node(i).to_vec())
    }

    /// `max_i e^{−rate·i·h} ‖A^α ξ_i‖`. Backward trajectories use `rate = μ`,
    /// forward ones `rate = −μ`.
    pub fn weighted_norm(&self, s: &Spectrum, rate: f64) -> f64 {
        (0..self.nodes())
            .map(|i| (-rate * self.h * i as f64).exp() * s.norm_alpha(self.node(i)))
            .fold(0.0, f64::max)
    }

    pub fn weighted_distance(&self, other: &Self, s: &Spectrum, rate: f64) -> f64 {
        (0..self.nodes().min(other.nodes()))
            .map(|i| (-rate * self.h * i as f64).exp() * s.dist_alpha(self.node(i), other.node(i)))
            .fold(0.0, f64::max)
    }

    /// Per-node `‖A^α ξ_i‖`.
    pub fn alpha_norms(&self, s: &Spectrum) -> Vec<f64> {
        (0..self.nodes()).map(|i| s.norm_alpha(self.node(i))).collect()
    }
}

/// Output of the Picard iteration.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub xi: BackwardTrajectory,
    /// Number of contraction steps `J` taken before the stopping test passed.
    pub iterations: usize,
    /// A-posteriori bound `k/(1−k)·‖ξ_{J+1} − ξ_J‖_𝒮` on the distance to the
    /// discrete fixed point.
    pub residual: f64,
    /// Successive ratios `‖Δξ_{j+1}‖ / ‖Δξ_j‖`.
    pub ratios: Vec<f64>,
}

/// Lyapunov–Perron solver for one `(τ, ω)` pair.
///
/// Forcing samples are tabulated once at construction, so each Picard sweep
/// costs `O(M·N)` on top of the nonlinearity.
#[derive(Debug, Clone)]
pub struct LpSolver<'a> {
    model: &'a Model,
    ou: OuProcess,
    tau: f64,
    cert: GapCertificate,
    split: ProjectionSplit,
    prop: Propagator,
    steps: usize,
    g_mid: Vec<f64>,
    weights: Vec<f64>,
}

/// Lower bound on `‖Δξ‖_𝒮` below which ratios are roundoff, not contraction.
fn roundoff_floor(scale: f64) -> f64 {
    1e-13 * scale.max(1.0)
}

impl<'a> LpSolver<'a> {
    /// `ou` encodes `ω`; the solver reads `z` on `[−t_back, 0]`.
    pub fn new(
        model: &'a Model,
        ou: &OuProcess,
        tau: f64,
        cert: GapCertificate,
        t_back: f64,
    ) -> Result<Self> {
        let s = &model.spectrum;
        s.check_len(ou.modes())?;
        let h = ou.h();
        model.check_step(h)?;
        if cert.lipschitz + 1e-15 < model.nonlinearity.lipschitz() {
            return Err(Error::Parameter(format!(
                "certificate Lipschitz constant {} is below the nonlinearity's {}",
                cert.lipschitz,
                model.nonlinearity.lipschitz()
            )));
        }
        check_gap(s, cert.lipschitz, cert.k, cert.n)?;
        let m = grid_steps(t_back, h)?;
        if m <= 0 {
            return Err(Error::Parameter(format!("backward horizon {t_back} must be positive")));
        }
        ou.require(-m, 0)?;
        let steps = m as usize;
        let modes = s.len();
        let mut g_mid = vec![0.0; (steps + 1) * modes];
        for i in 1..=steps {
            let t = -(i as f64) * h + 0.5 * h + tau;
            model
                .forcing
                .add_into(t, &mut g_mid[i * modes..(i + 1) * modes])?;
        }
        Ok(LpSolver {
            model,
            ou: ou.clone(),
            tau,
            cert,
            split: ProjectionSplit::new(cert.n, modes)?,
            prop: Propagator::new(s, h),
            steps,
            g_mid,
            weights: (0..=steps).map(|i| (-cert.mu * h * i as f64).exp()).collect(),
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn ou(&self) -> &OuProcess {
        &self.ou
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn certificate(&self) -> &GapCertificate {
        &self.cert
    }

    pub fn split(&self) -> ProjectionSplit {
        self.split
    }

    pub fn h(&self) -> f64 {
        self.prop.h
    }

    pub fn t_back(&self) -> f64 {
        self.steps as f64 * self.prop.h
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    fn spectrum(&self) -> &Spectrum {
        &self.model.spectrum
    }

    fn z(&self, i: usize) -> &[f64] {
        self.ou.at(-(i as isize)).expect("range checked at construction")
    }

    /// `‖ξ‖_𝒮`.
    pub fn norm(&self, xi: &BackwardTrajectory) -> f64 {
        let s = self.spectrum();
        (0..xi.nodes())
            .map(|i| self.weights[i] * s.norm_alpha(xi.node(i)))
            .fold(0.0, f64::max)
    }

    /// `‖ξ₁ − ξ₂‖_𝒮`.
    pub fn distance(&self, a: &BackwardTrajectory, b: &BackwardTrajectory) -> f64 {
        let s = self.spectrum();
        (0..a.nodes())
            .map(|i| self.weights[i] * s.dist_alpha(a.node(i), b.node(i)))
            .fold(0.0, f64::max)
    }

    /// `‖z‖_𝒮` over the stored window.
    pub fn ou_norm(&self) -> f64 {
        let s = self.spectrum();
        (0..=self.steps)
            .map(|i| self.weights[i] * s.norm_alpha(self.z(i)))
            .fold(0.0, f64::max)
    }

    /// `∫_{−∞}^0 e^{λ_1 s}‖A^α g(s + τ)‖ ds`.
    pub fn forcing_integral(&self) -> Result<f64> {
        let s = self.spectrum();
        temperedness_integral(&self.model.forcing, s, s.lambda(1), self.tau, s.alpha())
    }

    /// `ξ₀(t) = e^{−At} P x` on the backward grid.
    pub fn linear_flow(&self, x: &[f64]) -> Result<BackwardTrajectory> {
        let s = self.spectrum();
        s.check_len(x.len())?;
        let n = self.split.n();
        let mut xi = BackwardTrajectory::zeros(self.h(), s.len(), self.nodes());
        for i in 0..=self.steps {
            let t = i as f64 * self.h();
            let row = xi.node_mut(i);
            for j in 0..n {
                row[j] = (s.lambdas()[j] * t).exp() * x[j];
            }
        }
        Ok(xi)
    }

    /// One application of the Lyapunov–Perron operator, `ℐ(ξ, x, ω, τ)`.
    pub fn apply(&self, xi: &BackwardTrajectory, x: &[f64]) -> Result<BackwardTrajectory> {
        let mut out = BackwardTrajectory::zeros(self.h(), self.spectrum().len(), self.nodes());
        let mut scratch = vec![0.0; self.nodes() * self.spectrum().len()];
        self.apply_into(xi, x, &mut out, &mut scratch)?;
        Ok(out)
    }

    fn apply_into(
        &self,
        xi: &BackwardTrajectory,
        x: &[f64],
        out: &mut BackwardTrajectory,
        f: &mut [f64],
    ) -> Result<()> {
        let modes = self.spectrum().len();
        self.spectrum().check_len(x.len())?;
        if xi.modes() != modes || xi.nodes() != self.nodes() {
            return Err(Error::Alignment {
                t: -(xi.nodes().saturating_sub(1) as f64) * xi.h(),
                h: self.h(),
            });
        }
        if (xi.h() - self.h()).abs() > 1e-12 * self.h() {
            return Err(Error::Alignment { t: xi.h(), h: self.h() });
        }
        let nl = &self.model.nonlinearity;
        for i in 1..=self.steps {
            let fi = &mut f[i * modes..(i + 1) * modes];
            nl.eval_sum(xi.node(i), self.z(i), fi);
            for (a, g) in fi.iter_mut().zip(&self.g_mid[i * modes..(i + 1) * modes]) {
                *a += g;
            }
        }
        let n = self.split.n();
        let p = &self.prop;
        // P part: integrate backward from x at t = 0.
        out.node_mut(0)[..n].copy_from_slice(&x[..n]);
        for i in 1..=self.steps {
            for j in 0..n {
                let prev = out.data[(i - 1) * modes + j];
                out.data[i * modes + j] = p.growth[j] * prev - p.back[j] * f[i * modes + j];
            }
        }
        // Q part: integrate forward from 0 at t = −T_back.
        for j in n..modes {
            out.data[self.steps * modes + j] = 0.0;
        }
        for i in (1..=self.steps).rev() {
            for j in n..modes {
                let cur = out.data[i * modes + j];
                out.data[(i - 1) * modes + j] = p.decay[j] * cur + p.phi_h[j] * f[i * modes + j];
            }
        }
        Ok(())
    }

    fn contraction_slack(&self) -> f64 {
        5.0 * self.h() * self.spectrum().lambda(self.cert.n + 1)
    }

    /// Picard iteration from the backward linear flow of `x`.
    pub fn solve(&self, x: &[f64], tol: f64) -> Result<FixedPoint> {
        self.solve_from(x, tol, None)
    }

    /// Picard iteration from `init` (or the linear flow of `x`).
    ///
    /// Stops once `‖ξ_{j+1} − ξ_j‖_𝒮 ≤ (1−k)·tol`, so the returned iterate is
    /// within `tol` of the fixed point.
    pub fn solve_from(
        &self,
        x: &[f64],
        tol: f64,
        init: Option<&BackwardTrajectory>,
    ) -> Result<FixedPoint> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
        }
        let x = self.split.project_p(x);
        let k = self.cert.k;
        let mut cur = match init {
            Some(xi) => xi.clone(),
            None => self.linear_flow(&x)?,
        };
        let mut next = BackwardTrajectory::zeros(self.h(), self.spectrum().len(), self.nodes());
        let mut scratch = vec![0.0; self.nodes() * self.spectrum().len()];
        self.apply_into(&cur, &x, &mut next, &mut scratch)?;
        if self.model.nonlinearity.is_zero() {
            // ℐ does not depend on ξ, so one application is exact.
            self.debug_check_self_map(&next, &x);
            return Ok(FixedPoint {
                xi: next,
                iterations: 1,
                residual: 0.0,
                ratios: Vec::new(),
            });
        }
        let mut ratios = Vec::new();
        let mut prev_d = f64::INFINITY;
        let mut iterations = 0;
        loop {
            let d = self.distance(&next, &cur);
            if !d.is_finite() {
                return Err(Error::Instability {
                    step: iterations,
                    t: 0.0,
                });
            }
            let floor = roundoff_floor(self.norm(&next));
            if prev_d.is_finite() {
                let r = d / prev_d;
                ratios.push(r);
                if prev_d > 1e3 * floor && r > k + self.contraction_slack() {
                    return Err(Error::CertificateViolation(format!(
                        "measured contraction ratio {r:.4} exceeds k = {k} at iteration {iterations}"
                    )));
                }
            }
            self.debug_check_self_map(&next, &x);
            if d <= (1.0 - k) * tol || d <= floor {
                return Ok(FixedPoint {
                    xi: next,
                    iterations,
                    residual: k / (1.0 - k) * d,
                    ratios,
                });
            }
            if iterations >= 10_000 {
                return Err(Error::CertificateViolation(format!(
                    "Picard iteration did not reach tolerance {tol} (last step {d:.3e})"
                )));
            }
            std::mem::swap(&mut cur, &mut next);
            self.apply_into(&cur, &x, &mut next, &mut scratch)?;
            prev_d = d;
            iterations += 1;
        }
    }

    /// Self-map bound `‖ℐ(ξ)‖_𝒮 ≤ k‖ξ + z‖_𝒮 + ‖A^α x‖ + ∫ e^{λ_1 s}‖A^α g^τ‖`,
    /// with a first-order quadrature allowance.
    fn debug_check_self_map(&self, image: &BackwardTrajectory, x: &[f64]) {
        if !cfg!(debug_assertions) {
            return;
        }
        let Ok(gint) = self.forcing_integral() else {
            return;
        };
        let lhs = self.norm(image);
        // ξ + z for the preimage is not kept; ‖ξ‖ ≤ ‖ℐξ‖ + small at the
        // fixed point, so bound with the image itself.
        let s = self.spectrum();
        let shifted = (0..image.nodes())
            .map(|i| {
                let v: Vec<f64> = image.node(i).iter().zip(self.z(i)).map(|(a, b)| a + b).collect();
                self.weights[i] * s.norm_alpha(&v)
            })
            .fold(0.0, f64::max);
        let rhs = self.cert.k * shifted + s.norm_alpha(x) + gint;
        let slack = 1.0 + 10.0 * self.h() * s.lambda(self.cert.n + 1);
        debug_assert!(
            lhs <= rhs * slack / (1.0 - self.cert.k) + 1e-9,
            "self-map bound violated: {lhs} > {rhs}"
        );
    }

    /// `m(τ, ω)(x) = Q_n ξ*(0)` together with the solve record.
    pub fn manifold_point(&self, x: &[f64], tol: f64) -> Result<(StateVector, FixedPoint)> {
        let fp = self.solve(x, tol)?;
        Ok((self.split.project_q(fp.xi.node(0)), fp))
    }

    /// `m̃(τ, ω)(x) = Q_n z(ω) + m(τ, ω)(x − P_n z(ω))`.
    pub fn tilde_manifold_point(&self, x: &[f64], tol: f64) -> Result<StateVector> {
        let z0 = self.z(0);
        let shifted: Vec<f64> = x.iter().zip(z0).map(|(a, b)| a - b).collect();
        let (m, _) = self.manifold_point(&shifted, tol)?;
        Ok(m.add(&self.split.project_q(z0)))
    }
}

/// Free-function form of [`LpSolver::apply`].
pub fn lp_apply(solver: &LpSolver<'_>, xi: &BackwardTrajectory, x: &[f64]) -> Result<BackwardTrajectory> {
    solver.apply(xi, x)
}

pub fn solve_fixed_point(solver: &LpSolver<'_>, x: &[f64], tol: f64) -> Result<FixedPoint> {
    solver.solve(x, tol)
}

pub fn manifold_point(solver: &LpSolver<'_>, x: &[f64], tol: f64) -> Result<StateVector> {
    Ok(solver.manifold_point(x, tol)?.0)
}

pub fn tilde_manifold_point(solver: &LpSolver<'_>, x: &[f64], tol: f64) -> Result<StateVector> {
    solver.tilde_manifold_point(x, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: StateVector,
    pub q: StateVector,
    pub residual: f64,
    pub iterations: usize,
}

/// Sampled graph `x ↦ m(τ, ω)(x)` over base points in `P_n H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldChart {
    pub tau: f64,
    pub seed: u64,
    pub h: f64,
    pub t_back: f64,
    pub tol: f64,
    pub certificate: GapCertificate,
    pub points: Vec<ChartPoint>,
    /// Largest `‖A^α(m(x) − m(y))‖ / ‖A^α(x − y)‖` over all pairs.
    pub lipschitz_estimate: f64,
}

impl ManifoldChart {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Graph points `x + m(x)`.
    pub fn graph(&self) -> Vec<StateVector> {
        self.points.iter().map(|p| p.x.add(&p.q)).collect()
    }
}

/// Largest pairwise difference quotient of a sampled map.
pub fn empirical_lipschitz(s: &Spectrum, xs: &[StateVector], ys: &[StateVector]) -> f64 {
    let mut best: f64 = 0.0;
    for a in 0..xs.len() {
        for b in a + 1..xs.len() {
            let dx = s.dist_alpha(&xs[a], &xs[b]);
            if dx > 0.0 {
                best = best.max(s.dist_alpha(&ys[a], &ys[b]) / dx);
            }
        }
    }
    best
}

/// Evaluates `m(τ, ω)` on every base point (in parallel).
pub fn build_chart(solver: &LpSolver<'_>, xs: &[StateVector], tol: f64) -> Result<ManifoldChart> {
    if xs.is_empty() {
        return Err(Error::Parameter("chart grid is empty".into()));
    }
    let split = solver.split();
    let points: Vec<ChartPoint> = xs
        .par_iter()
        .map(|x| {
            let xp = split.project_p(x);
            let (q, fp) = solver.manifold_point(&xp, tol)?;
            Ok(ChartPoint {
                x: xp,
                q,
                residual: fp.residual,
                iterations: fp.iterations,
            })
        })
        .collect::<Result<_>>()?;
    let bases: Vec<StateVector> = points.iter().map(|p| p.x.clone()).collect();
    let values: Vec<StateVector> = points.iter().map(|p| p.q.clone()).collect();
    Ok(ManifoldChart {
        tau: solver.tau(),
        seed: solver.ou().seed(),
        h: solver.h(),
        t_back: solver.t_back(),
        tol,
        certificate: *solver.certificate(),
        lipschitz_estimate: empirical_lipschitz(&solver.model().spectrum, &bases, &values),
        points,
    })
}

/// Evenly spaced points on the segment between two P-space points.
pub fn line_grid(from: &StateVector, to: &StateVector, points: usize) -> Vec<StateVector> {
    if points <= 1 {
        return vec![from.clone()];
    }
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            StateVector(from.iter().zip(to.iter()).map(|(a, b)| a + t * (b - a)).collect())
        })
        .collect()
}
