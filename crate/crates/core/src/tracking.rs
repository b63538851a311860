//! Exponential tracking: for an initial state `v0`, find the point `v0*` on
//! the manifold whose orbit shadows the orbit of `v0` at rate `μ`.
//!
//! The unknown is the difference `ξ(t) = v*(t) − v(t)` on forward nodes
//! `t_i = i·h`, `i = 0..=K`, with `d_i = F(ξ_i + v_i + z_i) − F(v_i + z_i)`:
//!
//! * P part: `y_K = 0`, `y_i = e^{λh} y_{i+1} − (e^{λh} − 1)/λ · d_i`
//! * `x₀ = P v0 + y^P_0`, `y₀ = −Q v0 + m(τ, ω)(x₀)`
//! * Q part: `y_0 = y₀`, `y_{i+1} = e^{−λh} y_i + (1 − e^{−λh})/λ · d_i`
//!
//! so that `v0* = v0 + ξ(0) = x₀ + m(τ, ω)(x₀)` lies on the graph.

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, Trajectory};
use crate::error::{Error, Result};
use crate::lyapunov_perron::{BackwardTrajectory, ForwardTrajectory, LpSolver};
use crate::randomness::grid_steps;
use crate::spectral::{Spectrum, StateVector};

/// Outcome of a tracking solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub v0: StateVector,
    pub v0_star: StateVector,
    /// Q-part seed `y₀`.
    pub y0: StateVector,
    /// P-part base point `x₀` of `v0*`.
    pub x0: StateVector,
    /// `‖Q v0 − m(τ, ω)(P v0)‖_{D(A^α)}`.
    pub defect: f64,
    /// `defect / (1 − δ)`.
    pub prefactor: f64,
    /// `μ`.
    pub rate: f64,
    pub h: f64,
    /// `‖ξ(t_i)‖_{D(A^α)}` per forward node.
    pub decay_curve: Vec<f64>,
    /// Least-squares slope of `ln decay_curve` over the resolved nodes.
    pub fitted_slope: f64,
    pub iterations: usize,
    /// Successive Picard ratios.
    pub ratios: Vec<f64>,
    /// `‖Q v0* − m(τ, ω)(P v0*)‖_{D(A^α)}` recomputed after the solve.
    pub graph_residual: f64,
    /// Whether every node satisfies the decay envelope.
    pub envelope_holds: bool,
}

impl TrackingResult {
    pub fn envelope(&self, i: usize) -> f64 {
        self.prefactor * (-self.rate * self.h * i as f64).exp()
    }
}

/// Image of one sweep of the forward operator.
#[derive(Debug, Clone)]
pub struct PlusImage {
    pub xi: ForwardTrajectory,
    pub y0: StateVector,
    pub x0: StateVector,
}

/// Forward fixed-point solver tied to a manifold solver for the same `(τ, ω)`.
pub struct TrackingSolver<'a, 'b> {
    lp: &'b LpSolver<'a>,
    steps: usize,
    weights: Vec<f64>,
}

/// Least-squares slope of `ln y` against `t_i = i·h` over entries above
/// `floor_rel · max(y)`. Returns 0 with fewer than two usable points.
pub fn fitted_log_slope(curve: &[f64], h: f64, floor_rel: f64) -> f64 {
    let peak = curve.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .filter(|(_, y)| **y > floor_rel * peak && **y > 0.0)
        .map(|(i, y)| (i as f64 * h, y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

impl<'a, 'b> TrackingSolver<'a, 'b> {
    pub fn new(lp: &'b LpSolver<'a>, t_fwd: f64) -> Result<Self> {
        let cert = lp.certificate();
        if !cert.supports_tracking() {
            return Err(Error::Parameter(format!(
                "tracking needs k < 1/2 (got k = {}, delta = {})",
                cert.k, cert.delta
            )));
        }
        let h = lp.h();
        let k = grid_steps(t_fwd, h)?;
        if k <= 0 {
            return Err(Error::Parameter(format!("forward horizon {t_fwd} must be positive")));
        }
        lp.ou().require(0, k)?;
        let steps = k as usize;
        Ok(TrackingSolver {
            lp,
            steps,
            weights: (0..=steps).map(|i| (cert.mu * h * i as f64).exp()).collect(),
        })
    }

    fn spectrum(&self) -> &Spectrum {
        &self.lp.model().spectrum
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn t_fwd(&self) -> f64 {
        self.steps as f64 * self.lp.h()
    }

    /// `‖ξ‖_{𝒮⁺} = max_i e^{μ t_i}‖A^α ξ_i‖`.
    pub fn norm(&self, xi: &ForwardTrajectory) -> f64 {
        let s = self.spectrum();
        (0..xi.nodes())
            .map(|i| self.weights[i] * s.norm_alpha(xi.node(i)))
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, a: &ForwardTrajectory, b: &ForwardTrajectory) -> f64 {
        let s = self.spectrum();
        (0..a.nodes())
            .map(|i| self.weights[i] * s.dist_alpha(a.node(i), b.node(i)))
            .fold(0.0, f64::max)
    }

    /// The orbit `v(t, 0, ω, g^τ, v0)` on `[0, T_fwd]`.
    pub fn base(&self, v0: &StateVector) -> Result<Trajectory> {
        integrate(self.lp.model(), self.lp.ou(), self.lp.tau(), v0, 0.0, self.t_fwd())
    }

    /// One sweep of the forward operator, with `y₀` refreshed from the current
    /// `ξ`. `warm` carries the inner manifold solve between sweeps.
    pub fn apply(
        &self,
        xi: &ForwardTrajectory,
        v0: &StateVector,
        base: &Trajectory,
        lp_tol: f64,
        warm: &mut Option<BackwardTrajectory>,
    ) -> Result<PlusImage> {
        let s = self.spectrum();
        let modes = s.len();
        s.check_len(v0.len())?;
        if xi.nodes() != self.nodes() || base.len() != self.nodes() || xi.modes() != modes {
            return Err(Error::Alignment {
                t: self.t_fwd(),
                h: self.lp.h(),
            });
        }
        let split = self.lp.split();
        let n = split.n();
        let prop = crate::spectral::Propagator::new(s, self.lp.h());
        let nl = &self.lp.model().nonlinearity;
        let ou = self.lp.ou();

        let mut d = vec![0.0; self.steps * modes];
        for i in 0..self.steps {
            let z = ou.at(i as isize).expect("range checked at construction");
            nl.eval_increment(&base.states[i], z, xi.node(i), &mut d[i * modes..(i + 1) * modes]);
        }
        let mut out = ForwardTrajectory::zeros(self.lp.h(), modes, self.nodes());
        for i in (0..self.steps).rev() {
            for j in 0..n {
                let next = out.node(i + 1)[j];
                out.node_mut(i)[j] = prop.growth[j] * next - prop.back[j] * d[i * modes + j];
            }
        }
        let mut x0 = split.project_p(v0);
        for j in 0..n {
            x0[j] += out.node(0)[j];
        }
        let fp = self.lp.solve_from(&x0, lp_tol, warm.as_ref())?;
        let m = split.project_q(fp.xi.node(0));
        *warm = Some(fp.xi);
        let y0 = m.sub(&split.project_q(v0));
        out.node_mut(0)[n..].copy_from_slice(&y0[n..]);
        for i in 0..self.steps {
            for j in n..modes {
                let cur = out.node(i)[j];
                out.node_mut(i + 1)[j] = prop.decay[j] * cur + prop.phi_h[j] * d[i * modes + j];
            }
        }
        Ok(PlusImage { xi: out, y0, x0 })
    }

    /// Picard iteration from `ξ ≡ 0` to `‖Δξ‖_{𝒮⁺} ≤ (1−δ)·tol`.
    pub fn solve(&self, v0: &StateVector, tol: f64) -> Result<TrackingResult> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
        }
        let s = self.spectrum();
        let cert = *self.lp.certificate();
        let delta = cert.delta;
        let lp_tol = 0.1 * (1.0 - delta) * tol;
        let split = self.lp.split();
        let base = self.base(v0)?;

        let (m_v0, _) = self.lp.manifold_point(&split.project_p(v0), lp_tol)?;
        let defect = s.dist_alpha(&split.project_q(v0), &m_v0);

        let mut warm = None;
        let mut cur = ForwardTrajectory::zeros(self.lp.h(), s.len(), self.nodes());
        let mut image = self.apply(&cur, v0, &base, lp_tol, &mut warm)?;
        let slack = 5.0 * self.lp.h() * s.lambda(cert.n + 1);
        let mut ratios = Vec::new();
        let mut prev = f64::INFINITY;
        let mut iterations = 0;
        loop {
            let dist = self.distance(&image.xi, &cur);
            if !dist.is_finite() {
                return Err(Error::Instability {
                    step: iterations,
                    t: 0.0,
                });
            }
            if prev.is_finite() {
                let r = dist / prev;
                ratios.push(r);
                let floor = 100.0 * lp_tol + 1e-13 * self.norm(&image.xi).max(1.0);
                if prev > floor && r > delta + slack {
                    return Err(Error::CertificateViolation(format!(
                        "tracking contraction ratio {r:.4} exceeds delta = {delta:.4} at iteration {iterations}"
                    )));
                }
            }
            if dist <= (1.0 - delta) * tol || self.lp.model().nonlinearity.is_zero() {
                break;
            }
            if iterations >= 10_000 {
                return Err(Error::CertificateViolation(format!(
                    "tracking iteration did not reach tolerance {tol} (last step {dist:.3e})"
                )));
            }
            cur = image.xi;
            image = self.apply(&cur, v0, &base, lp_tol, &mut warm)?;
            prev = dist;
            iterations += 1;
        }

        let xi = image.xi;
        let v0_star = v0.add(xi.node(0));
        let (m_star, _) = self.lp.manifold_point(&split.project_p(&v0_star), lp_tol)?;
        let graph_residual = s.dist_alpha(&split.project_q(&v0_star), &m_star);
        let decay_curve = xi.alpha_norms(s);
        let prefactor = defect / (1.0 - delta);
        let h = self.lp.h();
        let env_slack = 1.0 + 10.0 * h * s.lambda(cert.n + 1);
        let envelope_holds = decay_curve.iter().enumerate().all(|(i, y)| {
            let e = (-cert.mu * h * i as f64).exp();
            *y <= (prefactor * env_slack + tol) * e
        });
        Ok(TrackingResult {
            v0: v0.clone(),
            v0_star,
            y0: image.y0,
            x0: image.x0,
            defect,
            prefactor,
            rate: cert.mu,
            h,
            fitted_slope: fitted_log_slope(&decay_curve, h, 1e-12),
            decay_curve,
            iterations,
            ratios,
            graph_residual,
            envelope_holds,
        })
    }

    /// Tracking in the original variables: `v0 = u0 − z(ω)`, and the returned
    /// `v0`/`v0_star` fields are shifted back by `z(ω)`. Since `Φ` and `Ψ`
    /// differ by the same `z(θ_t ω)` on both orbits, the decay curve is shared.
    pub fn track_phi(&self, u0: &StateVector, tol: f64) -> Result<TrackingResult> {
        let z0 = self.lp.ou().origin();
        let mut r = self.solve(&u0.sub(&z0), tol)?;
        r.v0 = r.v0.add(&z0);
        r.v0_star = r.v0_star.add(&z0);
        r.x0 = r.x0.add(&self.lp.split().project_p(&z0));
        Ok(r)
    }
}

pub fn lp_plus_apply(
    solver: &TrackingSolver<'_, '_>,
    xi: &ForwardTrajectory,
    v0: &StateVector,
    base: &Trajectory,
    lp_tol: f64,
) -> Result<PlusImage> {
    solver.apply(xi, v0, base, lp_tol, &mut None)
}

pub fn solve_tracking(solver: &TrackingSolver<'_, '_>, v0: &StateVector, tol: f64) -> Result<TrackingResult> {
    solver.solve(v0, tol)
}

pub fn track_phi(solver: &TrackingSolver<'_, '_>, u0: &StateVector, tol: f64) -> Result<TrackingResult> {
    solver.track_phi(u0, tol)
}

/// `‖A^α(u(t) − u*(t))‖` along the two `Φ`-orbits on `[0, t_end]`.
pub fn orbit_difference(
    lp: &LpSolver<'_>,
    u0: &StateVector,
    u0_star: &StateVector,
    t_end: f64,
) -> Result<Vec<f64>> {
    let model = lp.model();
    let a = crate::dynamics::phi_orbit(model, lp.ou(), lp.tau(), t_end, u0)?;
    let b = crate::dynamics::phi_orbit(model, lp.ou(), lp.tau(), t_end, u0_star)?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| model.spectrum.dist_alpha(x, y))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Model, Nonlinearity};
    use crate::forcing::ForcingSignal;
    use crate::lyapunov_perron::check_gap;
    use crate::randomness::{sample_wiener, solve_ou, CovarianceSpec, OuProcess, OuScheme, TimeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: f64 = 1e-3;

    fn ou(s: &Spectrum, seed: u64) -> OuProcess {
        let grid = TimeGrid::new(-14.0, 8.0, H).unwrap();
        let cov = CovarianceSpec::new((1..=s.len()).map(|j| 0.1 / (j * j) as f64).collect()).unwrap();
        solve_ou(&sample_wiener(seed, grid, &cov), s, OuScheme::PathQuadrature).unwrap()
    }

    fn nonlinear() -> (Model, OuProcess) {
        let s = Spectrum::dirichlet_laplacian(16, 0.0).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.1, &s).unwrap(), ForcingSignal::zero(16)).unwrap();
        let ou = ou(&s, 31);
        (model, ou)
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
        StateVector((1..=n).map(|j| rng.random_range(-1.0..1.0) / j as f64).collect())
    }

    #[test]
    fn linear_case_decays_at_q_rate() {
        let s = Spectrum::dirichlet_laplacian(8, 0.0).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), ForcingSignal::zero(8)).unwrap();
        let cert = check_gap(&s, 0.0, 0.2, 1).unwrap();
        let ou = ou(&s, 1);
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 6.0).unwrap();
        let tr = TrackingSolver::new(&lp, 4.0).unwrap();
        let v0 = StateVector(vec![0.3, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = tr.solve(&v0, 1e-10).unwrap();
        assert_eq!(r.y0, StateVector(vec![0.0, -0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        for (i, y) in r.decay_curve.iter().enumerate().step_by(100) {
            let t = i as f64 * H;
            assert!((y - 0.8 * (-4.0 * t).exp()).abs() <= 1e-12);
            assert!(*y <= 0.8 * (-2.0 * t).exp() + 1e-15);
        }
        assert!(r.envelope_holds);
        assert!((r.fitted_slope + 4.0).abs() < 1e-6);
        assert_eq!(r.v0_star, StateVector(vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn point_on_manifold_is_its_own_shadow() {
        let (model, ou) = nonlinear();
        let cert = check_gap(&model.spectrum, 0.1, 0.2, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let tr = TrackingSolver::new(&lp, 6.0).unwrap();
        let x = StateVector::basis(16, 1, 0.6);
        let (m, _) = lp.manifold_point(&x, 1e-12).unwrap();
        let v0 = x.add(&m);
        let r = tr.solve(&v0, 1e-9).unwrap();
        assert!(model.spectrum.dist_alpha(&r.v0_star, &v0) < 1e-9);
        assert!(r.decay_curve.iter().all(|y| *y < 1e-9));
    }

    #[test]
    fn nonlinear_tracking_contracts_and_decays() {
        let (model, ou) = nonlinear();
        let s = &model.spectrum;
        let cert = check_gap(s, 0.1, 0.2, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let tr = TrackingSolver::new(&lp, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let v0 = random_state(&mut rng, 16);
            let r = tr.solve(&v0, 1e-10).unwrap();
            assert!(r.ratios.iter().all(|q| *q <= cert.delta + 0.05), "{:?}", r.ratios);
            assert!(r.envelope_holds);
            assert!(r.graph_residual < 1e-9);
            assert!(r.fitted_slope <= -cert.mu + 0.1, "slope {}", r.fitted_slope);
            let p = lp.split().project_p(&r.v0_star);
            assert!(s.dist_alpha(&p, &r.x0) < 1e-14);
        }
    }

    #[test]
    fn shadow_orbit_matches_integration() {
        let (model, ou) = nonlinear();
        let cert = check_gap(&model.spectrum, 0.1, 0.2, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let tr = TrackingSolver::new(&lp, 4.0).unwrap();
        let v0 = StateVector((1..=16).map(|j| 0.5 / j as f64).collect());
        let r = tr.solve(&v0, 1e-12).unwrap();
        let base = tr.base(&v0).unwrap();
        let star = tr.base(&r.v0_star).unwrap();
        // v*(t) − v(t) from independent integration against the solver's ‖ξ(t)‖.
        for (i, (x, y)) in star.states.iter().zip(&base.states).enumerate() {
            let measured = model.spectrum.dist_alpha(x, y);
            assert!((measured - r.decay_curve[i]).abs() <= 1e-9 * x.norm() + 1e-12, "node {i}");
        }
    }

    #[test]
    fn forward_operator_contracts_on_random_pairs() {
        let (model, ou) = nonlinear();
        let cert = check_gap(&model.spectrum, 0.1, 0.2, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let tr = TrackingSolver::new(&lp, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v0 = random_state(&mut rng, 16);
        let base = tr.base(&v0).unwrap();
        for _ in 0..4 {
            let mk = |rng: &mut ChaCha8Rng| {
                let states: Vec<StateVector> = (0..tr.nodes())
                    .map(|i| {
                        let w = (-cert.mu * H * i as f64).exp();
                        StateVector((0..16).map(|_| w * rng.random_range(-1.0..1.0) / 4.0).collect())
                    })
                    .collect();
                ForwardTrajectory::from_states(H, &states).unwrap()
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            let ia = lp_plus_apply(&tr, &a, &v0, &base, 1e-13).unwrap();
            let ib = lp_plus_apply(&tr, &b, &v0, &base, 1e-13).unwrap();
            let r = tr.distance(&ia.xi, &ib.xi) / tr.distance(&a, &b);
            assert!(r <= cert.delta + 5.0 * H * 4.0, "ratio {r}");
        }
    }

    #[test]
    fn phi_tracking_shifts_by_z() {
        let (model, ou) = nonlinear();
        let cert = check_gap(&model.spectrum, 0.1, 0.2, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 12.0).unwrap();
        let tr = TrackingSolver::new(&lp, 4.0).unwrap();
        let u0 = StateVector((1..=16).map(|j| 0.4 / j as f64).collect());
        let r = tr.track_phi(&u0, 1e-10).unwrap();
        let direct = tr.solve(&u0.sub(&ou.origin()), 1e-10).unwrap();
        assert_eq!(r.decay_curve, direct.decay_curve);
        assert_eq!(r.v0_star, direct.v0_star.add(&ou.origin()));
        // The m̃ defect of u0 equals the m defect of u0 − z(ω).
        let split = lp.split();
        let mt = lp.tilde_manifold_point(&split.project_p(&u0), 1e-12).unwrap();
        let d = model.spectrum.dist_alpha(&split.project_q(&u0), &mt);
        assert!((d - r.defect).abs() < 1e-10);
        let diff = orbit_difference(&lp, &u0, &r.v0_star, 4.0).unwrap();
        for (i, y) in diff.iter().enumerate() {
            assert!(*y <= r.envelope(i) * 1.02 + 1e-12);
        }
    }

    #[test]
    fn large_k_is_rejected() {
        let (model, ou) = nonlinear();
        let cert = check_gap(&model.spectrum, 0.1, 0.6, 1).unwrap();
        let lp = LpSolver::new(&model, &ou, 0.0, cert, 8.0).unwrap();
        assert!(matches!(TrackingSolver::new(&lp, 4.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn slope_fit() {
        let curve: Vec<f64> = (0..100).map(|i| 3.0 * (-2.5 * 0.01 * i as f64).exp()).collect();
        assert!((fitted_log_slope(&curve, 0.01, 1e-12) + 2.5).abs() < 1e-10);
        assert_eq!(fitted_log_slope(&[0.0, 0.0], 0.1, 1e-12), 0.0);
    }
}
