//! Verification harness: invariance, (almost) periodicity, attractor
//! containment and set distances, all computed on one stored noise path.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cocycle_phi, integrate_substepped, Model};
use crate::error::{Error, Result};
use crate::forcing::almost_period_defect;
use crate::lyapunov_perron::{GapCertificate, LpSolver, ManifoldChart};
use crate::randomness::OuProcess;
use crate::spectral::{Spectrum, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Invariance,
    Periodicity,
    AlmostPeriodicity,
    Containment,
    Lipschitz,
    Tracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub kind: DefectKind,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
    pub context: BTreeMap<String, f64>,
}

impl DefectReport {
    pub fn new(kind: DefectKind, value: f64, bound: Option<f64>) -> Self {
        DefectReport {
            kind,
            value,
            bound,
            pass: value.is_finite() && bound.is_none_or(|b| value <= b),
            context: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.insert(key.to_string(), value);
        self
    }
}

/// Pullback ensemble endpoints approximating the attractor at `(τ, ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCloud {
    pub tau: f64,
    pub seed: u64,
    pub pullback_time: f64,
    pub ensemble_size: usize,
    pub points: Vec<StateVector>,
}

/// Settings for [`invariance_defect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceOptions {
    /// Substeps per grid step in the flow applied to chart points. At 1 the
    /// flow is the same scheme the chart was built with, and the defect only
    /// sees the solver tolerance; larger values expose the discretization error.
    pub flow_substeps: usize,
    /// Bound constant: `bound = c_inv · (h + tol)`.
    pub c_inv: f64,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        InvarianceOptions {
            flow_substeps: 1,
            c_inv: 10.0,
        }
    }
}

/// `max_p ‖Q Ψ(t,τ,ω,p) − m(τ+t, θ_t ω)(P Ψ(t,τ,ω,p))‖_{D(A^α)}` over the
/// graph points `p` of `chart`, which must come from `solver`.
pub fn invariance_defect(
    solver: &LpSolver<'_>,
    chart: &ManifoldChart,
    t: f64,
    opts: InvarianceOptions,
    tol: f64,
) -> Result<DefectReport> {
    if t < 0.0 {
        return Err(Error::Domain(format!("invariance time {t} must be >= 0")));
    }
    let model = solver.model();
    let s = &model.spectrum;
    let shifted = solver.ou().shifted(t)?;
    let target = LpSolver::new(model, &shifted, solver.tau() + t, *solver.certificate(), solver.t_back())?;
    let split = solver.split();
    let defects: Vec<f64> = chart
        .graph()
        .par_iter()
        .map(|p| {
            let q = integrate_substepped(model, solver.ou(), solver.tau(), p, 0.0, t, opts.flow_substeps)?
                .states
                .pop()
                .expect("nonempty");
            let (m, _) = target.manifold_point(&split.project_p(&q), tol)?;
            Ok(s.dist_alpha(&split.project_q(&q), &m))
        })
        .collect::<Result<_>>()?;
    let value = defects.into_iter().fold(0.0, f64::max);
    let h = solver.h();
    Ok(DefectReport::new(DefectKind::Invariance, value, Some(opts.c_inv * (h + tol)))
        .with("t", t)
        .with("h", h)
        .with("tol", tol)
        .with("flow_substeps", opts.flow_substeps as f64)
        .with("chart_residual", chart.max_residual()))
}

fn max_chart_difference(
    s: &Spectrum,
    a: &LpSolver<'_>,
    b: &LpSolver<'_>,
    xs: &[StateVector],
    tol: f64,
    tilde: bool,
) -> Result<f64> {
    let vals: Vec<f64> = xs
        .par_iter()
        .map(|x| {
            let (ma, mb) = if tilde {
                (a.tilde_manifold_point(x, tol)?, b.tilde_manifold_point(x, tol)?)
            } else {
                (a.manifold_point(x, tol)?.0, b.manifold_point(x, tol)?.0)
            };
            Ok(s.dist_alpha(&ma, &mb))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `max_x ‖m(τ+T, ω)(x) − m(τ, ω)(x)‖_{D(A^α)}` for `T`-periodic forcing.
/// Bound `2·tol + slack`.
#[allow(clippy::too_many_arguments)]
pub fn periodicity_defect(
    model: &Model,
    ou: &OuProcess,
    cert: GapCertificate,
    t_back: f64,
    tau: f64,
    period: f64,
    xs: &[StateVector],
    tol: f64,
    slack: f64,
) -> Result<DefectReport> {
    if !model.forcing.is_periodic_with(period) {
        return Err(Error::Precondition(format!(
            "forcing is not {period}-periodic; periodicity check does not apply"
        )));
    }
    let a = LpSolver::new(model, ou, tau, cert, t_back)?;
    let b = LpSolver::new(model, ou, tau + period, cert, t_back)?;
    let value = max_chart_difference(&model.spectrum, &a, &b, xs, tol, false)?;
    Ok(DefectReport::new(DefectKind::Periodicity, value, Some(2.0 * tol + slack))
        .with("tau", tau)
        .with("period", period)
        .with("tol", tol))
}

/// `max_x ‖m̃(τ+τ₀, ω)(x) − m̃(τ, ω)(x)‖_{D(A^α)}` against
/// `2·ε_g/((1−k)λ_n) + 2·tol`, where `ε_g` is the forcing defect at `τ₀`.
#[allow(clippy::too_many_arguments)]
pub fn ap_defect(
    model: &Model,
    ou: &OuProcess,
    cert: GapCertificate,
    t_back: f64,
    tau: f64,
    tau0: f64,
    xs: &[StateVector],
    tol: f64,
) -> Result<DefectReport> {
    let s = &model.spectrum;
    let eps_g = almost_period_defect(&model.forcing, s, tau0, s.alpha())?;
    let eps = 2.0 * eps_g / ((1.0 - cert.k) * s.lambda(cert.n));
    let a = LpSolver::new(model, ou, tau, cert, t_back)?;
    let b = LpSolver::new(model, ou, tau + tau0, cert, t_back)?;
    let value = max_chart_difference(s, &a, &b, xs, tol, true)?;
    Ok(DefectReport::new(DefectKind::AlmostPeriodicity, value, Some(eps + 2.0 * tol))
        .with("tau", tau)
        .with("tau0", tau0)
        .with("eps_g", eps_g)
        .with("eps", eps)
        .with("tol", tol))
}

/// Evolves each ensemble member by `Φ(T, τ−T, θ_{−T}ω, u)`.
pub fn pullback_attractor(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    pullback_time: f64,
    ensemble: &[StateVector],
) -> Result<AttractorCloud> {
    if !(pullback_time > 0.0) {
        return Err(Error::Parameter(format!("pullback time {pullback_time} must be positive")));
    }
    if ensemble.is_empty() {
        return Err(Error::Parameter("ensemble is empty".into()));
    }
    let start = ou.shifted(-pullback_time)?;
    let points: Vec<StateVector> = ensemble
        .par_iter()
        .map(|u| cocycle_phi(model, &start, tau - pullback_time, pullback_time, u))
        .collect::<Result<_>>()?;
    Ok(AttractorCloud {
        tau,
        seed: ou.seed(),
        pullback_time,
        ensemble_size: points.len(),
        points,
    })
}

/// `max_u ‖Q u − m̃(τ, ω)(P u)‖_{D(A^α)}` over the cloud.
pub fn containment_value(solver: &LpSolver<'_>, cloud: &AttractorCloud, tol: f64) -> Result<f64> {
    let s = &solver.model().spectrum;
    let split = solver.split();
    let vals: Vec<f64> = cloud
        .points
        .par_iter()
        .map(|u| {
            let m = solver.tilde_manifold_point(&split.project_p(u), tol)?;
            Ok(s.dist_alpha(&split.project_q(u), &m))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Bound on the containment defect after pulling back for time `T`:
/// each orbit is shadowed by a manifold orbit within
/// `e^{−μT}·D_0/(1−δ)`, where `D_0` is the largest initial graph defect at
/// `(τ−T, θ_{−T}ω)`, and the graph map is `1/(1−k)`-Lipschitz. Adds `tol`.
#[allow(clippy::too_many_arguments)]
pub fn containment_bound(
    model: &Model,
    ou: &OuProcess,
    cert: GapCertificate,
    t_back: f64,
    tau: f64,
    pullback_time: f64,
    ensemble: &[StateVector],
    tol: f64,
) -> Result<f64> {
    if !cert.supports_tracking() {
        return Err(Error::Parameter("containment bound needs k < 1/2".into()));
    }
    let start = ou.shifted(-pullback_time)?;
    let lp = LpSolver::new(model, &start, tau - pullback_time, cert, t_back)?;
    let s = &model.spectrum;
    let split = lp.split();
    let d0 = ensemble
        .par_iter()
        .map(|u| {
            let m = lp.tilde_manifold_point(&split.project_p(u), tol)?;
            Ok(s.dist_alpha(&split.project_q(u), &m))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let k = cert.k;
    Ok((2.0 - k) / (1.0 - k) / (1.0 - cert.delta) * (-cert.mu * pullback_time).exp() * d0 + tol)
}

/// Containment report for `cloud` with an optional precomputed bound.
pub fn containment_defect(
    solver: &LpSolver<'_>,
    cloud: &AttractorCloud,
    tol: f64,
    bound: Option<f64>,
) -> Result<DefectReport> {
    if (solver.tau() - cloud.tau).abs() > 1e-12 || solver.ou().seed() != cloud.seed {
        return Err(Error::Precondition(
            "cloud and manifold must share tau and noise path".into(),
        ));
    }
    let value = containment_value(solver, cloud, tol)?;
    Ok(DefectReport::new(DefectKind::Containment, value, bound)
        .with("pullback_time", cloud.pullback_time)
        .with("ensemble_size", cloud.ensemble_size as f64)
        .with("tol", tol))
}

/// Least-squares slope of `ln value` against pullback time.
pub fn fitted_decay(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Chart Lipschitz estimate against `1/(1−k) + slack`.
pub fn lipschitz_report(chart: &ManifoldChart, slack: f64) -> DefectReport {
    let bound = 1.0 / (1.0 - chart.certificate.k) + slack;
    DefectReport::new(DefectKind::Lipschitz, chart.lipschitz_estimate, Some(bound))
        .with("points", chart.points.len() as f64)
}

/// `max_{p∈a} min_{q∈b} ‖p − q‖_{D(A^α)}`.
pub fn hausdorff_semidist(a: &[StateVector], b: &[StateVector], s: &Spectrum) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("Hausdorff semi-distance needs nonempty sets".into()));
    }
    Ok(a.iter()
        .map(|p| b.iter().map(|q| s.dist_alpha(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Nonlinearity;
    use crate::forcing::{ForcingSignal, TrigTerm};
    use crate::lyapunov_perron::{build_chart, check_gap, line_grid};
    use crate::randomness::{sample_wiener, solve_ou, CovarianceSpec, OuScheme, TimeGrid};

    const H: f64 = 1e-3;

    fn noisy(s: &Spectrum, seed: u64, lo: f64, hi: f64) -> OuProcess {
        let grid = TimeGrid::new(lo, hi, H).unwrap();
        let cov = CovarianceSpec::new((1..=s.len()).map(|j| 0.1 / (j * j) as f64).collect()).unwrap();
        solve_ou(&sample_wiener(seed, grid, &cov), s, OuScheme::PathQuadrature).unwrap()
    }

    fn sine(mode: usize, beta: f64, a: f64) -> TrigTerm {
        TrigTerm {
            mode,
            amplitude: a,
            frequency: beta,
            phase: 0.0,
        }
    }

    #[test]
    fn hausdorff_examples() {
        let s = Spectrum::new(vec![1.0, 1.0], 0.0).unwrap();
        let a = vec![StateVector(vec![0.0, 0.0])];
        let b = vec![StateVector(vec![3.0, 0.0]), StateVector(vec![0.0, 4.0])];
        assert_eq!(hausdorff_semidist(&a, &b, &s).unwrap(), 3.0);
        assert_eq!(hausdorff_semidist(&b, &b, &s).unwrap(), 0.0);
        let sub = vec![b[0].clone()];
        assert_eq!(hausdorff_semidist(&sub, &b, &s).unwrap(), 0.0);
        assert_eq!(hausdorff_semidist(&b, &sub, &s).unwrap(), 5.0);
        assert!(matches!(hausdorff_semidist(&[], &b, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn report_pass_semantics() {
        assert!(DefectReport::new(DefectKind::Lipschitz, 5.0, None).pass);
        assert!(DefectReport::new(DefectKind::Lipschitz, 1.0, Some(1.0)).pass);
        assert!(!DefectReport::new(DefectKind::Lipschitz, 1.1, Some(1.0)).pass);
        assert!(!DefectReport::new(DefectKind::Lipschitz, f64::NAN, None).pass);
    }

    #[test]
    fn invariance_at_zero_and_linear_closed_form() {
        let s = Spectrum::dirichlet_laplacian(8, 0.0).unwrap();
        let g = ForcingSignal::constant(StateVector::basis(8, 2, 1.0)).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), g).unwrap();
        let cert = check_gap(&s, 0.0, 0.2, 1).unwrap();
        let ou = noisy(&s, 2, -10.0, 3.0);
        let solver = LpSolver::new(&model, &ou, 0.0, cert, 8.0).unwrap();
        let xs = line_grid(&StateVector::basis(8, 1, -1.0), &StateVector::basis(8, 1, 1.0), 5);
        let chart = build_chart(&solver, &xs, 1e-7).unwrap();
        let opts = InvarianceOptions::default();
        let r0 = invariance_defect(&solver, &chart, 0.0, opts, 1e-7).unwrap();
        assert!(r0.value <= chart.max_residual() + 1e-15);
        let r1 = invariance_defect(&solver, &chart, 1.0, opts, 1e-7).unwrap();
        assert!(r1.value <= 10.0 * (H + 1e-7));
        assert!(r1.pass);
    }

    #[test]
    fn periodicity_examples() {
        let s = Spectrum::dirichlet_laplacian(8, 0.0).unwrap();
        let cert = check_gap(&s, 0.1, 0.2, 1).unwrap();
        let ou = noisy(&s, 4, -10.0, 1.0);
        let xs = line_grid(&StateVector::basis(8, 1, -1.0), &StateVector::basis(8, 1, 1.0), 3);
        let tp = 2.0 * std::f64::consts::PI;
        let g = ForcingSignal::trig_sum(8, vec![sine(2, 1.0, 1.0)])
            .unwrap()
            .with_period(tp)
            .unwrap();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), g).unwrap();
        let r = periodicity_defect(&model, &ou, cert, 8.0, 1.0, tp, &xs, 1e-7, 1e-4).unwrap();
        assert!(r.pass && r.value <= 2e-7, "{}", r.value);
        let err = periodicity_defect(&model, &ou, cert, 8.0, 1.0, 3.0, &xs, 1e-7, 1e-4);
        assert!(matches!(err, Err(Error::Precondition(_))));
        let zero = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), ForcingSignal::zero(8)).unwrap();
        let r = periodicity_defect(&zero, &ou, cert, 8.0, 0.0, 1.7, &xs, 1e-7, 0.0).unwrap();
        assert!(r.value <= 2e-7);
    }

    #[test]
    fn ap_examples() {
        let s = Spectrum::dirichlet_laplacian(8, 0.0).unwrap();
        let cert = check_gap(&s, 0.1, 0.2, 1).unwrap();
        let ou = noisy(&s, 5, -10.0, 1.0);
        let xs = vec![StateVector::basis(8, 1, 0.5)];
        let zero = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), ForcingSignal::zero(8)).unwrap();
        let r = ap_defect(&zero, &ou, cert, 8.0, 0.0, 3.3, &xs, 1e-7).unwrap();
        assert!(r.pass && r.value <= 2e-7);
        let g = ForcingSignal::trig_sum(8, vec![sine(2, 1.0, 1.0)]).unwrap();
        let per = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), g).unwrap();
        let r = ap_defect(&per, &ou, cert, 8.0, 0.0, 2.0 * std::f64::consts::PI, &xs, 1e-7).unwrap();
        assert!(r.pass && r.context["eps_g"] < 1e-12);
        // A poor τ₀ still satisfies the (then loose) bound.
        let r = ap_defect(&per, &ou, cert, 8.0, 0.0, 1.0, &xs, 1e-7).unwrap();
        assert!(r.pass && r.value > 1e-3);
    }

    #[test]
    fn trivial_cloud_collapses() {
        let s = Spectrum::dirichlet_laplacian(4, 0.0).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), ForcingSignal::zero(4)).unwrap();
        let ou = OuProcess::zero(4, TimeGrid::new(-12.0, 1.0, H).unwrap());
        let ens = vec![StateVector(vec![1.0, 1.0, 1.0, 1.0]), StateVector(vec![-2.0, 0.0, 0.5, 0.0])];
        let c = pullback_attractor(&model, &ou, 0.0, 3.0, &ens).unwrap();
        assert_eq!(c.ensemble_size, 2);
        for (p, u) in c.points.iter().zip(&ens) {
            assert!((p[0] - u[0] * (-3.0f64).exp()).abs() < 1e-12);
        }
        let cert = check_gap(&s, 0.0, 0.2, 1).unwrap();
        let solver = LpSolver::new(&model, &ou, 0.0, cert, 4.0).unwrap();
        let single = pullback_attractor(&model, &ou, 0.0, 3.0, &ens[..1]).unwrap();
        assert_eq!(single.points.len(), 1);
        let r = containment_defect(&solver, &single, 1e-8, None).unwrap();
        assert!(r.value < 1e-3 * (-3.0f64).exp() * 10.0);
    }

    #[test]
    fn constant_forcing_cloud_lies_on_graph() {
        let s = Spectrum::dirichlet_laplacian(6, 0.0).unwrap();
        let c = StateVector(vec![0.5, 2.0, 0.0, 1.0, 0.0, 0.0]);
        let g = ForcingSignal::constant(c.clone()).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), g).unwrap();
        let ou = OuProcess::zero(6, TimeGrid::new(-20.0, 1.0, H).unwrap());
        let cert = check_gap(&s, 0.0, 0.2, 1).unwrap();
        let solver = LpSolver::new(&model, &ou, 0.0, cert, 8.0).unwrap();
        let ens: Vec<StateVector> = (0..4).map(|i| StateVector(vec![i as f64 - 1.5; 6])).collect();
        let t = 6.0;
        let cloud = pullback_attractor(&model, &ou, 0.0, t, &ens).unwrap();
        let r = containment_defect(&solver, &cloud, 1e-8, Some(1e-8 + (-t).exp())).unwrap();
        assert!(r.pass, "{} > {:?}", r.value, r.bound);
        // Steady state c_j/λ_j.
        for p in &cloud.points {
            assert!((p[1] - 0.5).abs() < 1e-6 && (p[3] - 1.0 / 16.0).abs() < 1e-6);
        }
    }

    #[test]
    fn nonlinear_containment_decays_with_pullback_time() {
        let s = Spectrum::dirichlet_laplacian(16, 0.0).unwrap();
        let g = ForcingSignal::trig_sum(16, vec![sine(2, 1.0, 1.0)]).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), g).unwrap();
        let cert = check_gap(&s, 0.1, 0.2, 1).unwrap();
        let ou = noisy(&s, 8, -30.0, 1.0);
        let solver = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let ens: Vec<StateVector> = (0..4)
            .map(|i| StateVector((1..=16).map(|j| (i as f64 - 1.5) / j as f64).collect()))
            .collect();
        let mut values = Vec::new();
        for t in [2.0, 4.0] {
            let cloud = pullback_attractor(&model, &ou, 0.0, t, &ens).unwrap();
            let bound = containment_bound(&model, &ou, cert, 12.0, 0.0, t, &ens, 1e-9).unwrap();
            let r = containment_defect(&solver, &cloud, 1e-10, Some(bound)).unwrap();
            assert!(r.pass, "{} > {bound}", r.value);
            values.push(r.value);
        }
        assert!(values[1] <= 0.5 * values[0]);
        assert!(fitted_decay(&[2.0, 4.0], &values).unwrap() < -1.0);
    }
}
