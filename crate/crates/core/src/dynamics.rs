//! Mild solutions of the transformed random equation
//! `v' + Av = F(v + z(θ_t ω)) + g(t + τ)` and the cocycles built from them.
//!
//! Time stepping is exponential Euler with the nonlinearity and the OU value
//! sampled at the left end of each step and the forcing at its midpoint:
//! `v_{i+1} = e^{-Ah} v_i + φ₁(−Ah)·h·(F(v_i + z_i) + g(t_i + h/2 + τ))`.
//! The Lyapunov–Perron quadrature uses the same samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::ForcingSignal;
use crate::randomness::{grid_steps, OuProcess};
use crate::spectral::{Propagator, Spectrum, StateVector};

/// Largest admissible `λ_max · h`.
pub const MAX_STIFFNESS_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    /// `F_j(u) = L · w_j · sin(⟨c, A^α u⟩)`.
    PerModeSin,
    /// `F_j(u) = w_j · φ(⟨c, A^α u⟩)` with `φ` piecewise linear through `points`
    /// (constant beyond the ends, `φ(0) = 0`).
    CustomTable { points: Vec<(f64, f64)> },
}

/// A globally Lipschitz `F: D(A^α) → H` with `F(0) = 0`.
///
/// Both kinds are rank one: `F(u) = w · ψ(⟨κ, u⟩)` where `κ_j = c_j λ_j^α`,
/// `‖c‖ = ‖w‖ = 1` and `ψ` is `L`-Lipschitz, which gives
/// `‖F(u) − F(v)‖ ≤ L ‖A^α (u − v)‖`. The profiles `c_j, w_j ∝ 1/j` couple the
/// resolved and unresolved modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    lipschitz: f64,
    kappa: Vec<f64>,
    response: Vec<f64>,
}

fn harmonic_profile(len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=len).map(|j| 1.0 / j as f64).collect();
    let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / n).collect()
}

impl Nonlinearity {
    pub fn zero(s: &Spectrum) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Zero,
            lipschitz: 0.0,
            kappa: vec![0.0; s.len()],
            response: vec![0.0; s.len()],
        }
    }

    pub fn per_mode_sin(lipschitz: f64, s: &Spectrum) -> Result<Self> {
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::Parameter(format!("Lipschitz constant {lipschitz} must be >= 0")));
        }
        let c = harmonic_profile(s.len());
        Ok(Nonlinearity {
            kind: NonlinearityKind::PerModeSin,
            lipschitz,
            kappa: c.iter().zip(s.frac_weights()).map(|(c, w)| c * w).collect(),
            response: harmonic_profile(s.len()),
        })
    }

    /// Lipschitz constant is the steepest table slope.
    pub fn custom_table(mut points: Vec<(f64, f64)>, s: &Spectrum) -> Result<Self> {
        if points.len() < 2 || points.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::Parameter("custom table needs at least two finite points".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Parameter("custom table abscissae must be distinct".into()));
        }
        if table_eval(&points, 0.0).abs() > 1e-14 {
            return Err(Error::Parameter("custom table must pass through (0, 0)".into()));
        }
        let lipschitz = points
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max);
        let c = harmonic_profile(s.len());
        Ok(Nonlinearity {
            kind: NonlinearityKind::CustomTable { points },
            lipschitz,
            kappa: c.iter().zip(s.frac_weights()).map(|(c, w)| c * w).collect(),
            response: harmonic_profile(s.len()),
        })
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Zero) || self.lipschitz == 0.0
    }

    fn scalar(&self, x: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::PerModeSin => self.lipschitz * x.sin(),
            NonlinearityKind::CustomTable { points } => table_eval(points, x),
        }
    }

    /// Writes `F(a + b)` into `out`.
    pub fn eval_sum(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        if self.is_zero() {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let x: f64 = self
            .kappa
            .iter()
            .zip(a.iter().zip(b))
            .map(|(k, (a, b))| k * (a + b))
            .sum();
        let y = self.scalar(x);
        for (o, w) in out.iter_mut().zip(&self.response) {
            *o = w * y;
        }
    }

    /// Writes `F(a + b + c)` into `out`.
    pub fn eval_sum3(&self, a: &[f64], b: &[f64], c: &[f64], out: &mut [f64]) {
        if self.is_zero() {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let x: f64 = (0..self.kappa.len())
            .map(|j| self.kappa[j] * (a[j] + b[j] + c[j]))
            .sum();
        let y = self.scalar(x);
        for (o, w) in out.iter_mut().zip(&self.response) {
            *o = w * y;
        }
    }

    /// Writes `F(a + b + ξ) − F(a + b)` into `out`, formed without
    /// cancellation so that tiny `ξ` keeps full relative precision.
    pub fn eval_increment(&self, a: &[f64], b: &[f64], xi: &[f64], out: &mut [f64]) {
        if self.is_zero() {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let mut x = 0.0;
        let mut d = 0.0;
        for j in 0..self.kappa.len() {
            x += self.kappa[j] * (a[j] + b[j]);
            d += self.kappa[j] * xi[j];
        }
        let y = match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::PerModeSin => {
                2.0 * self.lipschitz * (x + 0.5 * d).cos() * (0.5 * d).sin()
            }
            NonlinearityKind::CustomTable { points } => {
                let (ia, ib) = (table_segment(points, x), table_segment(points, x + d));
                if ia == ib {
                    table_slope(points, ia) * d
                } else {
                    table_eval(points, x + d) - table_eval(points, x)
                }
            }
        };
        for (o, w) in out.iter_mut().zip(&self.response) {
            *o = w * y;
        }
    }

    pub fn eval(&self, u: &[f64]) -> StateVector {
        let mut out = StateVector::zeros(u.len());
        let zero = vec![0.0; u.len()];
        self.eval_sum(u, &zero, &mut out);
        out
    }
}

/// `0` left of the table, `len` right of it, otherwise `i` for segment `[p_{i−1}, p_i]`.
fn table_segment(points: &[(f64, f64)], x: f64) -> usize {
    points.partition_point(|p| p.0 <= x)
}

fn table_slope(points: &[(f64, f64)], seg: usize) -> f64 {
    if seg == 0 || seg == points.len() {
        0.0
    } else {
        let (a, b) = (points[seg - 1], points[seg]);
        (b.1 - a.1) / (b.0 - a.0)
    }
}

fn table_eval(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= x) - 1;
    let (a, b) = (points[i], points[i + 1]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// The random PDE: spectrum of `A`, nonlinearity `F`, forcing `g`.
#[derive(Debug, Clone)]
pub struct Model {
    pub spectrum: Spectrum,
    pub nonlinearity: Nonlinearity,
    pub forcing: ForcingSignal,
}

impl Model {
    pub fn new(spectrum: Spectrum, nonlinearity: Nonlinearity, forcing: ForcingSignal) -> Result<Self> {
        spectrum.check_len(nonlinearity.kappa.len())?;
        spectrum.check_len(forcing.modes())?;
        Ok(Model {
            spectrum,
            nonlinearity,
            forcing,
        })
    }

    pub fn modes(&self) -> usize {
        self.spectrum.len()
    }

    /// Enforces `λ_max · h ≤ 0.5`.
    pub fn check_step(&self, h: f64) -> Result<()> {
        let stiff = self.spectrum.largest() * h;
        if !(h > 0.0) || stiff > MAX_STIFFNESS_STEP + 1e-12 {
            return Err(Error::Parameter(format!(
                "step h = {h} gives lambda_max * h = {stiff:.3} > {MAX_STIFFNESS_STEP}"
            )));
        }
        Ok(())
    }
}

/// States on the grid `t0 + i·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub h: f64,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.h * i as f64
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one node")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Exponential-Euler realization of the mild solution `v(t, r, ω, g^τ, v_r)`
/// on `[r, t_end]`, with `z` read from `ou` (which encodes `ω`).
pub fn integrate(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    v_r: &StateVector,
    r: f64,
    t_end: f64,
) -> Result<Trajectory> {
    integrate_substepped(model, ou, tau, v_r, r, t_end, 1)
}

/// As [`integrate`], but each grid step is split into `substeps` exponential
/// Euler steps with `z` held at its left grid value and `g` sampled at each
/// substep midpoint. Only grid-node states are returned.
pub fn integrate_substepped(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    v_r: &StateVector,
    r: f64,
    t_end: f64,
    substeps: usize,
) -> Result<Trajectory> {
    let s = &model.spectrum;
    s.check_len(v_r.len())?;
    s.check_len(ou.modes())?;
    let h = ou.h();
    model.check_step(h)?;
    if substeps == 0 {
        return Err(Error::Parameter("substeps must be positive".into()));
    }
    let k0 = grid_steps(r, h)?;
    let k1 = grid_steps(t_end, h)?;
    if k1 < k0 {
        return Err(Error::Domain(format!("end time {t_end} precedes start {r}")));
    }
    ou.require(k0, k1)?;

    let hs = h / substeps as f64;
    let prop = Propagator::new(s, hs);
    let m = s.len();
    let mut states = Vec::with_capacity((k1 - k0 + 1) as usize);
    let mut v = v_r.clone();
    states.push(v.clone());
    let mut rhs = vec![0.0; m];
    for (step, k) in (k0..k1).enumerate() {
        let z = ou.at(k).expect("range checked");
        let t = k as f64 * h;
        for sub in 0..substeps {
            model.nonlinearity.eval_sum(&v, z, &mut rhs);
            model.forcing.add_into(t + (sub as f64 + 0.5) * hs + tau, &mut rhs)?;
            for j in 0..m {
                v[j] = prop.decay[j] * v[j] + prop.phi_h[j] * rhs[j];
            }
        }
        if !v.is_finite() {
            return Err(Error::Instability {
                step,
                t: t + h,
            });
        }
        states.push(v.clone());
    }
    Ok(Trajectory {
        t0: k0 as f64 * h,
        h,
        states,
    })
}

/// `Ψ(t, τ, ω, v_0) = v(t, 0, ω, g^τ, v_0)`.
pub fn cocycle_psi(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    t: f64,
    v0: &StateVector,
) -> Result<StateVector> {
    if t < 0.0 {
        return Err(Error::Domain(format!("cocycle time t = {t} must be >= 0")));
    }
    Ok(integrate(model, ou, tau, v0, 0.0, t)?.states.pop().expect("nonempty"))
}

/// `Φ(t, τ, ω, u_0) = Ψ(t, τ, ω, u_0 − z(ω)) + z(θ_t ω)`.
pub fn cocycle_phi(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    t: f64,
    u0: &StateVector,
) -> Result<StateVector> {
    let v0 = u0.sub(&ou.origin());
    let v = cocycle_psi(model, ou, tau, t, &v0)?;
    Ok(v.add(&ou.at_time(t)?))
}

/// Full `Φ`-orbit `u(t) = v(t) + z(θ_t ω)` on `[0, t]`.
pub fn phi_orbit(
    model: &Model,
    ou: &OuProcess,
    tau: f64,
    t: f64,
    u0: &StateVector,
) -> Result<Trajectory> {
    let v0 = u0.sub(&ou.origin());
    let mut traj = integrate(model, ou, tau, &v0, 0.0, t)?;
    for (i, st) in traj.states.iter_mut().enumerate() {
        let z = ou.at(i as isize).expect("range checked by integrate");
        *st = st.add(z);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::TrigTerm;
    use crate::randomness::{sample_wiener, solve_ou, CovarianceSpec, OuScheme, TimeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectrum() -> Spectrum {
        Spectrum::dirichlet_laplacian(6, 0.25).unwrap()
    }

    fn noisy_ou(s: &Spectrum, h: f64) -> OuProcess {
        let grid = TimeGrid::new(-4.0, 6.0, h).unwrap();
        let cov = CovarianceSpec::new((1..=s.len()).map(|j| 0.05 / (j * j) as f64).collect()).unwrap();
        solve_ou(&sample_wiener(21, grid, &cov), s, OuScheme::PathQuadrature).unwrap()
    }

    #[test]
    fn nonlinearity_lipschitz_on_random_pairs() {
        let s = spectrum();
        let table = vec![(-2.0, -1.0), (0.0, 0.0), (1.0, 0.3), (3.0, 1.3)];
        for f in [
            Nonlinearity::per_mode_sin(0.7, &s).unwrap(),
            Nonlinearity::custom_table(table, &s).unwrap(),
        ] {
            assert_eq!(f.eval(&[0.0; 6]).norm(), 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..1000 {
                let u: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
                let v: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
                let lhs = f.eval(&u).sub(&f.eval(&v)).norm();
                assert!(lhs <= f.lipschitz() * s.dist_alpha(&u, &v) * (1.0 + 1e-12));
                assert!(f.eval(&u).norm() <= f.lipschitz() * s.norm_alpha(&u) * (1.0 + 1e-12));
            }
        }
        assert!(Nonlinearity::custom_table(vec![(0.0, 1.0), (1.0, 2.0)], &s).is_err());
    }

    #[test]
    fn increment_matches_difference_and_keeps_precision() {
        let s = spectrum();
        let table = vec![(-2.0, -1.0), (0.0, 0.0), (1.0, 0.3), (3.0, 1.3)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [
            Nonlinearity::per_mode_sin(0.7, &s).unwrap(),
            Nonlinearity::custom_table(table, &s).unwrap(),
        ] {
            for scale in [1.0, 1e-3] {
                let a: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let b: Vec<f64> = (0..6).map(|_| rng.random_range(-0.5..0.5)).collect();
                let xi: Vec<f64> = (0..6).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
                let mut inc = vec![0.0; 6];
                f.eval_increment(&a, &b, &xi, &mut inc);
                let (mut lo, mut hi) = (vec![0.0; 6], vec![0.0; 6]);
                f.eval_sum(&a, &b, &mut lo);
                let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                f.eval_sum(&ab, &xi, &mut hi);
                for j in 0..6 {
                    assert!((inc[j] - (hi[j] - lo[j])).abs() <= 1e-14);
                }
            }
            // Tiny perturbations stay resolved far below the absolute roundoff of F.
            let a = vec![0.3; 6];
            let xi = vec![1e-30; 6];
            let mut inc = vec![0.0; 6];
            f.eval_increment(&a, &[0.0; 6], &xi, &mut inc);
            assert!(inc.iter().any(|v| v.abs() > 1e-32));
        }
    }

    #[test]
    fn h_refinement_is_first_order() {
        let s = spectrum();
        let g = ForcingSignal::trig_sum(
            6,
            vec![TrigTerm {
                mode: 1,
                amplitude: 1.0,
                frequency: 3.0,
                phase: 0.0,
            }],
        )
        .unwrap();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(1.0, &s).unwrap(), g).unwrap();
        let h_ref = 0.01 / 16.0;
        let fine = OuProcess::zero(6, TimeGrid::new(-1.0, 3.0, h_ref).unwrap());
        let v0 = StateVector(vec![1.0, 0.5, -0.3, 0.2, 0.0, 0.1]);
        let reference = cocycle_psi(&model, &fine, 0.0, 2.0, &v0).unwrap();
        let err = |h: f64| {
            let ou = OuProcess::zero(6, TimeGrid::new(-1.0, 3.0, h).unwrap());
            s.dist_alpha(&cocycle_psi(&model, &ou, 0.0, 2.0, &v0).unwrap(), &reference)
        };
        let (e1, e2) = (err(0.01), err(0.005));
        let order = (e1 / e2).log2();
        assert!(order >= 0.9, "observed order {order} ({e1:.3e}, {e2:.3e})");
    }

    #[test]
    fn linear_homogeneous_is_exact() {
        let s = spectrum();
        let h = 1e-3;
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), ForcingSignal::zero(6)).unwrap();
        let ou = OuProcess::zero(6, TimeGrid::new(-1.0, 3.0, h).unwrap());
        let v0 = StateVector(vec![1.0, -2.0, 0.5, 0.1, 0.0, 3.0]);
        let traj = integrate(&model, &ou, 0.0, &v0, 0.0, 2.0).unwrap();
        for (i, st) in traj.states.iter().enumerate().step_by(97) {
            let t = traj.time(i);
            for j in 0..6 {
                let exact = (-s.lambdas()[j] * t).exp() * v0[j];
                assert!((st[j] - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let s = spectrum();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.3, &s).unwrap(), ForcingSignal::zero(6)).unwrap();
        let ou = OuProcess::zero(6, TimeGrid::new(-1.0, 3.0, 1e-3).unwrap());
        let traj = integrate(&model, &ou, 0.0, &StateVector::zeros(6), 0.0, 2.0).unwrap();
        assert!(traj.states.iter().all(|v| v.iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn constant_forcing_closed_form() {
        let s = Spectrum::dirichlet_laplacian(4, 0.0).unwrap();
        let c = 1.5;
        let model = Model::new(
            s.clone(),
            Nonlinearity::zero(&s),
            ForcingSignal::constant(StateVector::basis(4, 2, c)).unwrap(),
        )
        .unwrap();
        let ou = OuProcess::zero(4, TimeGrid::new(-1.0, 3.0, 1e-3).unwrap());
        for t in [0.5, 1.0, 2.0] {
            let v = cocycle_psi(&model, &ou, 0.0, t, &StateVector::zeros(4)).unwrap();
            let exact = c / 4.0 * (1.0 - (-4.0 * t).exp());
            assert!((v[1] - exact).abs() <= 1e-12);
        }
        assert_eq!(
            cocycle_psi(&model, &ou, 0.0, 0.0, &StateVector::basis(4, 1, 2.0)).unwrap(),
            StateVector::basis(4, 1, 2.0)
        );
    }

    #[test]
    fn cocycle_law() {
        let s = spectrum();
        let h = 1e-3;
        let g = ForcingSignal::trig_sum(
            6,
            vec![TrigTerm {
                mode: 2,
                amplitude: 1.0,
                frequency: 1.0,
                phase: 0.2,
            }],
        )
        .unwrap();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.5, &s).unwrap(), g).unwrap();
        let ou = noisy_ou(&s, h);
        let v0 = StateVector(vec![0.4, -0.3, 0.2, 0.0, 0.1, -0.1]);
        let (sa, tb, tau) = (0.7, 1.3, 0.45);
        let direct = cocycle_psi(&model, &ou, tau, sa + tb, &v0).unwrap();
        let mid = cocycle_psi(&model, &ou, tau, sa, &v0).unwrap();
        let composed = cocycle_psi(&model, &ou.shifted(sa).unwrap(), tau + sa, tb, &mid).unwrap();
        let rel = direct.sub(&composed).norm() / direct.norm();
        assert!(rel <= 1e-10, "relative cocycle defect {rel}");

        // The same law for Φ.
        let u0 = v0.add(&[0.1; 6]);
        let direct = cocycle_phi(&model, &ou, tau, sa + tb, &u0).unwrap();
        let mid = cocycle_phi(&model, &ou, tau, sa, &u0).unwrap();
        let composed = cocycle_phi(&model, &ou.shifted(sa).unwrap(), tau + sa, tb, &mid).unwrap();
        assert!(direct.sub(&composed).norm() / direct.norm() <= 1e-10);
    }

    #[test]
    fn phi_conjugacy_is_definitional() {
        let s = spectrum();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.5, &s).unwrap(), ForcingSignal::zero(6)).unwrap();
        let ou = noisy_ou(&s, 1e-3);
        let u0 = StateVector(vec![0.3; 6]);
        let t = 1.2;
        let phi = cocycle_phi(&model, &ou, 0.0, t, &u0).unwrap();
        let psi = cocycle_psi(&model, &ou, 0.0, t, &u0.sub(&ou.origin())).unwrap();
        assert_eq!(phi, psi.add(&ou.at_time(t).unwrap()));
        assert_eq!(cocycle_phi(&model, &ou, 0.0, 0.0, &u0).unwrap().sub(&u0).norm(), 0.0);
        let zero_ou = OuProcess::zero(6, ou.grid());
        assert_eq!(
            cocycle_phi(&model, &zero_ou, 0.0, t, &u0).unwrap(),
            cocycle_psi(&model, &zero_ou, 0.0, t, &u0).unwrap()
        );
    }

    #[test]
    fn continuous_dependence_ratio_is_bounded() {
        let s = spectrum();
        let model = Model::new(s.clone(), Nonlinearity::per_mode_sin(0.8, &s).unwrap(), ForcingSignal::zero(6)).unwrap();
        let ou = noisy_ou(&s, 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..8 {
            let a: StateVector = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>().into();
            let b: StateVector = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>().into();
            let ta = integrate(&model, &ou, 0.0, &a, 0.0, 5.0).unwrap();
            let tb = integrate(&model, &ou, 0.0, &b, 0.0, 5.0).unwrap();
            let d0 = s.dist_alpha(&a, &b);
            for (x, y) in ta.states.iter().zip(&tb.states) {
                assert!(s.dist_alpha(x, y) / d0 < 10.0);
            }
        }
    }

    #[test]
    fn step_validation_and_errors() {
        let s = Spectrum::dirichlet_laplacian(16, 0.0).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), ForcingSignal::zero(16)).unwrap();
        assert!(model.check_step(1e-3).is_ok());
        assert!(model.check_step(4e-3).is_err());
        let ou = OuProcess::zero(16, TimeGrid::new(-1.0, 1.0, 1e-3).unwrap());
        let v = StateVector::zeros(16);
        assert!(matches!(integrate(&model, &ou, 0.0, &v, 0.0, 2.0), Err(Error::Range(_))));
        assert!(matches!(integrate(&model, &ou, 0.0, &v, 0.5, 0.1), Err(Error::Domain(_))));
        assert!(matches!(
            integrate(&model, &ou, 0.0, &v, 0.0, 0.0005),
            Err(Error::Alignment { .. })
        ));
    }

    #[test]
    fn instability_is_reported() {
        let s = Spectrum::new(vec![1e-6, 1.0], 0.0).unwrap();
        let g = ForcingSignal::constant(StateVector(vec![f64::MAX, 0.0])).unwrap();
        let model = Model::new(s.clone(), Nonlinearity::zero(&s), g).unwrap();
        let ou = OuProcess::zero(2, TimeGrid::new(-1.0, 1.0, 0.01).unwrap());
        let v0 = StateVector(vec![f64::MAX, 0.0]);
        assert!(matches!(
            integrate(&model, &ou, 0.0, &v0, 0.0, 0.5),
            Err(Error::Instability { step: 0, .. })
        ));
    }
}
