//! Deterministic non-autonomous forcing `g(t)` and its translates `g^τ = g(· + τ)`.
//!
//! Almost periodic forcing is represented by finite trigonometric sums; near
//! periods are located by scanning with [`scan_near_period`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, StateVector};

/// One term `a · sin(β t + φ)` acting on the 1-based `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub mode: usize,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ForcingForm {
    Zero,
    Constant { values: StateVector },
    TrigSum { terms: Vec<TrigTerm> },
    /// Rows at `t0 + i·dt`, linearly interpolated.
    Tabulated { t0: f64, dt: f64, rows: Vec<StateVector> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingSignal {
    form: ForcingForm,
    modes: usize,
    /// Accumulated translation: `eval(t) = base(t + offset)`.
    offset: f64,
    declared_period: Option<f64>,
}

impl ForcingSignal {
    pub fn zero(modes: usize) -> Self {
        ForcingSignal {
            form: ForcingForm::Zero,
            modes,
            offset: 0.0,
            declared_period: None,
        }
    }

    pub fn constant(values: StateVector) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::Validation("constant forcing must be finite".into()));
        }
        Ok(ForcingSignal {
            modes: values.len(),
            form: ForcingForm::Constant { values },
            offset: 0.0,
            declared_period: None,
        })
    }

    pub fn trig_sum(modes: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        for t in &terms {
            if t.mode == 0 || t.mode > modes {
                return Err(Error::Validation(format!(
                    "forcing term mode {} outside 1..={modes}",
                    t.mode
                )));
            }
            if !(t.amplitude.is_finite() && t.frequency.is_finite() && t.phase.is_finite()) {
                return Err(Error::Validation("forcing term must be finite".into()));
            }
        }
        Ok(ForcingSignal {
            form: ForcingForm::TrigSum { terms },
            modes,
            offset: 0.0,
            declared_period: None,
        })
    }

    pub fn tabulated(t0: f64, dt: f64, rows: Vec<StateVector>) -> Result<Self> {
        if !(dt > 0.0) || rows.len() < 2 {
            return Err(Error::Validation(
                "tabulated forcing needs dt > 0 and at least two rows".into(),
            ));
        }
        let modes = rows[0].len();
        if rows.iter().any(|r| r.len() != modes || !r.is_finite()) {
            return Err(Error::Validation("tabulated rows must be finite and equally sized".into()));
        }
        Ok(ForcingSignal {
            form: ForcingForm::Tabulated { t0, dt, rows },
            modes,
            offset: 0.0,
            declared_period: None,
        })
    }

    /// Attach a period and verify `g(t + T) = g(t)` on sample times.
    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Validation(format!("period {period} must be positive")));
        }
        let scale = 1.0 + self.sup_coefficient_bound();
        let times: Vec<f64> = match &self.form {
            ForcingForm::Tabulated { t0, dt, rows } => {
                let end = t0 + dt * (rows.len() - 1) as f64;
                (0..rows.len())
                    .map(|i| t0 + dt * i as f64 - self.offset)
                    .filter(|t| t + self.offset + period <= end)
                    .collect()
            }
            _ => (0..256).map(|i| 4.0 * period * i as f64 / 256.0).collect(),
        };
        for t in times {
            let a = self.eval(t)?;
            let b = self.eval(t + period)?;
            let d = a.sub(&b).norm();
            if d > 1e-9 * scale {
                return Err(Error::Validation(format!(
                    "declared period {period} violated at t = {t} (|g(t+T) - g(t)| = {d:.3e})"
                )));
            }
        }
        self.declared_period = Some(period);
        Ok(self)
    }

    pub fn form(&self) -> &ForcingForm {
        &self.form
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn declared_period(&self) -> Option<f64> {
        self.declared_period
    }

    /// Trig terms with the accumulated translation folded into the phases.
    pub fn effective_terms(&self) -> Vec<TrigTerm> {
        match &self.form {
            ForcingForm::TrigSum { terms } => terms
                .iter()
                .map(|t| TrigTerm {
                    phase: t.phase + t.frequency * self.offset,
                    ..*t
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Adds `g(t)` into `out`.
    pub fn add_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let t = t + self.offset;
        match &self.form {
            ForcingForm::Zero => {}
            ForcingForm::Constant { values } => {
                for (o, v) in out.iter_mut().zip(values.iter()) {
                    *o += v;
                }
            }
            ForcingForm::TrigSum { terms } => {
                for term in terms {
                    out[term.mode - 1] += term.amplitude * (term.frequency * t + term.phase).sin();
                }
            }
            ForcingForm::Tabulated { t0, dt, rows } => {
                let x = (t - t0) / dt;
                let last = (rows.len() - 1) as f64;
                if !(x >= -1e-9 && x <= last + 1e-9) {
                    return Err(Error::Range(format!(
                        "tabulated forcing queried at t = {t} outside [{t0}, {}]",
                        t0 + dt * last
                    )));
                }
                let x = x.clamp(0.0, last);
                let i = (x.floor() as usize).min(rows.len() - 2);
                let w = x - i as f64;
                for (j, o) in out.iter_mut().enumerate() {
                    *o += (1.0 - w) * rows[i][j] + w * rows[i + 1][j];
                }
            }
        }
        Ok(())
    }

    /// Upper bound on `sup_t ‖g(t)‖_{D(A^α)}` when `weights = λ^α`; with
    /// `None` the plain coefficient bound.
    fn sup_coefficient_bound(&self) -> f64 {
        self.sup_bound(None)
    }

    fn sup_bound(&self, weights: Option<&[f64]>) -> f64 {
        let w = |j: usize| weights.map_or(1.0, |w| w[j]);
        match &self.form {
            ForcingForm::Zero => 0.0,
            ForcingForm::Constant { values } => values
                .iter()
                .enumerate()
                .map(|(j, v)| (w(j) * v).powi(2))
                .sum::<f64>()
                .sqrt(),
            ForcingForm::TrigSum { terms } => {
                let mut per_mode = vec![0.0; self.modes];
                for t in terms {
                    per_mode[t.mode - 1] += t.amplitude.abs();
                }
                per_mode
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (w(j) * a).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            ForcingForm::Tabulated { rows, .. } => rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .map(|(j, v)| (w(j) * v).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max),
        }
    }

    /// `sup_t ‖A^α g(t)‖` bound: exact for constants, `Σ|a| λ^α`-type for trig sums.
    pub fn sup_norm_alpha_bound(&self, s: &Spectrum) -> f64 {
        self.sup_bound(Some(s.frac_weights()))
    }

    /// Whether `g(t + T) = g(t)` is guaranteed (zero, constant, or `T` a
    /// multiple of the declared period).
    pub fn is_periodic_with(&self, period: f64) -> bool {
        match &self.form {
            ForcingForm::Zero | ForcingForm::Constant { .. } => true,
            _ => match self.declared_period {
                Some(p) => {
                    let r = period / p;
                    r >= 0.5 && (r - r.round()).abs() < 1e-9
                }
                None => false,
            },
        }
    }
}

pub fn eval_forcing(g: &ForcingSignal, t: f64) -> Result<StateVector> {
    g.eval(t)
}

impl ForcingSignal {
    pub fn eval(&self, t: f64) -> Result<StateVector> {
        let mut out = StateVector::zeros(self.modes);
        self.add_into(t, &mut out)?;
        Ok(out)
    }
}

/// `g^τ`: `eval(shift_forcing(g, τ), t) = eval(g, t + τ)`.
pub fn shift_forcing(g: &ForcingSignal, tau: f64) -> ForcingSignal {
    ForcingSignal {
        offset: g.offset + tau,
        ..g.clone()
    }
}

/// `∫_{-∞}^0 e^{λ_1 s} ‖A^α g(s + τ)‖ ds`.
pub fn temperedness_integral(
    g: &ForcingSignal,
    s: &Spectrum,
    lambda1: f64,
    tau: f64,
    alpha: f64,
) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(Error::Parameter(format!("lambda1 = {lambda1} must be positive")));
    }
    s.check_len(g.modes)?;
    let w: Vec<f64> = s.lambdas().iter().map(|l| l.powf(alpha)).collect();
    let norm = |v: &[f64]| {
        v.iter()
            .zip(&w)
            .map(|(x, w)| (x * w) * (x * w))
            .sum::<f64>()
            .sqrt()
    };
    match &g.form {
        ForcingForm::Zero => Ok(0.0),
        ForcingForm::Constant { values } => Ok(norm(values) / lambda1),
        ForcingForm::TrigSum { terms } => {
            let beta_max = terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max);
            // e^{-λ_1 S} ≈ 4e-18; the tail beyond S is bounded by sup·e^{-λ_1 S}/λ_1.
            let span = 40.0 / lambda1;
            let step = (1.0 / (1024.0 * lambda1)).min(if beta_max > 0.0 {
                2.0 * PI / (1024.0 * beta_max)
            } else {
                f64::INFINITY
            });
            let mut n = (span / step).ceil() as usize;
            n = n.clamp(64, 4_000_000);
            n += n % 2;
            let dx = span / n as f64;
            let mut buf = vec![0.0; g.modes];
            let mut f = |x: f64| -> Result<f64> {
                buf.iter_mut().for_each(|b| *b = 0.0);
                g.add_into(x + tau, &mut buf)?;
                Ok((lambda1 * x).exp() * norm(&buf))
            };
            let mut acc = f(-span)? + f(0.0)?;
            for i in 1..n {
                let x = -span + dx * i as f64;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x)?;
            }
            let tail = g.sup_bound(Some(&w)) * (-lambda1 * span).exp() / lambda1;
            Ok(acc * dx / 3.0 + tail)
        }
        ForcingForm::Tabulated { t0, dt, rows } => {
            // Trapezoid over table nodes s_i = t0 + i·dt − offset − τ with s_i ≤ 0.
            let shift = g.offset + tau;
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (t0 + dt * i as f64 - shift, r))
                .filter(|(x, _)| *x <= 1e-12)
                .map(|(x, r)| (x, (lambda1 * x).exp() * norm(r)))
                .collect();
            if pts.len() < 2 {
                return Err(Error::Validation(
                    "tabulated forcing does not cover negative times".into(),
                ));
            }
            let peak = pts.iter().map(|p| p.1).fold(0.0, f64::max);
            if pts[0].1 > 1e-6 * peak.max(f64::MIN_POSITIVE) {
                return Err(Error::Validation(format!(
                    "weighted tabulated forcing does not decay at the table start \
                     ({:.3e} vs peak {:.3e}); integral not resolved or divergent",
                    pts[0].1, peak
                )));
            }
            let mut acc = 0.0;
            for p in pts.windows(2) {
                acc += 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0);
            }
            let last = pts[pts.len() - 1];
            if last.0 < 0.0 {
                // Tail between the last node and 0, linear interpolation of g.
                let mut buf = vec![0.0; g.modes];
                g.add_into(tau, &mut buf)?;
                acc += 0.5 * (last.1 + norm(&buf)) * (-last.0);
            }
            Ok(acc)
        }
    }
}

fn defect_at(g: &ForcingSignal, w: &[f64], r: f64, tau0: f64, a: &mut [f64], b: &mut [f64]) -> Result<f64> {
    a.iter_mut().for_each(|x| *x = 0.0);
    b.iter_mut().for_each(|x| *x = 0.0);
    g.add_into(r + tau0, a)?;
    g.add_into(r, b)?;
    Ok(a.iter()
        .zip(b.iter())
        .zip(w)
        .map(|((x, y), w)| (w * (x - y)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `sup_r ‖g(r + τ_0) − g(r)‖_{D(A^α)}` over a sample window covering at least
/// four of the slowest periods, refined around the best sample.
pub fn almost_period_defect(g: &ForcingSignal, s: &Spectrum, tau0: f64, alpha: f64) -> Result<f64> {
    s.check_len(g.modes)?;
    let w: Vec<f64> = s.lambdas().iter().map(|l| l.powf(alpha)).collect();
    let mut a = vec![0.0; g.modes];
    let mut b = vec![0.0; g.modes];
    match &g.form {
        ForcingForm::Zero | ForcingForm::Constant { .. } => Ok(0.0),
        ForcingForm::TrigSum { terms } => {
            let betas: Vec<f64> = terms
                .iter()
                .map(|t| t.frequency.abs())
                .filter(|b| *b > 0.0)
                .collect();
            if betas.is_empty() {
                return Ok(0.0);
            }
            let slow = 2.0 * PI / betas.iter().cloned().fold(f64::INFINITY, f64::min);
            let fast = 2.0 * PI / betas.iter().cloned().fold(0.0, f64::max);
            let window = 4.0 * slow;
            let n = ((window / fast) * 64.0).ceil().max(1000.0) as usize;
            let dr = window / n as f64;
            let mut best = (0.0, f64::NEG_INFINITY);
            for i in 0..=n {
                let r = dr * i as f64;
                let d = defect_at(g, &w, r, tau0, &mut a, &mut b)?;
                if d > best.1 {
                    best = (r, d);
                }
            }
            // Golden-section refinement of the local maximum.
            let (mut lo, mut hi) = (best.0 - dr, best.0 + dr);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..60 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if defect_at(g, &w, m1, tau0, &mut a, &mut b)? > defect_at(g, &w, m2, tau0, &mut a, &mut b)? {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let refined = defect_at(g, &w, 0.5 * (lo + hi), tau0, &mut a, &mut b)?;
            Ok(best.1.max(refined))
        }
        ForcingForm::Tabulated { t0, dt, rows } => {
            let start = t0 - g.offset;
            let end = start + dt * (rows.len() - 1) as f64;
            let mut best: Option<f64> = None;
            for i in 0..rows.len() {
                let r = start + dt * i as f64;
                if r + tau0 >= start && r + tau0 <= end {
                    let d = defect_at(g, &w, r, tau0, &mut a, &mut b)?;
                    best = Some(best.map_or(d, |x: f64| x.max(d)));
                }
            }
            best.ok_or_else(|| Error::Range(format!("shift {tau0} exceeds the table length")))
        }
    }
}

/// Cheap upper bound of the almost-period defect for a trig sum:
/// per mode `Σ |a| · |2 sin(β τ_0 / 2)|`, combined in the `D(A^α)` norm.
fn trig_defect_bound(terms: &[TrigTerm], w: &[f64], tau0: f64, acc: &mut [f64]) -> f64 {
    acc.iter_mut().for_each(|x| *x = 0.0);
    for t in terms {
        acc[t.mode - 1] += t.amplitude.abs() * (2.0 * (0.5 * t.frequency * tau0).sin()).abs();
    }
    acc.iter()
        .zip(w)
        .map(|(a, w)| (a * w).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Scan `[lo, hi]` for the τ_0 minimizing the almost-period defect of a trig
/// sum. Returns `(τ_0, defect)`.
pub fn scan_near_period(
    g: &ForcingSignal,
    s: &Spectrum,
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if !(hi > lo) {
        return Err(Error::Parameter(format!("empty scan window [{lo}, {hi}]")));
    }
    let terms = match &g.form {
        ForcingForm::TrigSum { terms } => terms,
        _ => return Ok((lo, almost_period_defect(g, s, lo, alpha)?)),
    };
    let w: Vec<f64> = s.lambdas().iter().map(|l| l.powf(alpha)).collect();
    let beta_max = terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max);
    if beta_max == 0.0 {
        return Ok((lo, 0.0));
    }
    let step = 2.0 * PI / beta_max / 256.0;
    let n = ((hi - lo) / step).ceil() as usize;
    let mut acc = vec![0.0; g.modes];
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let tau = (lo + step * i as f64).min(hi);
            (tau, trig_defect_bound(terms, &w, tau, &mut acc))
        })
        .collect();
    // The bound is V-shaped near each candidate, so a coarse sample can rank
    // candidates wrongly; refine the best few local minima.
    let mut minima: Vec<(f64, f64)> = (0..samples.len())
        .filter(|&i| {
            (i == 0 || samples[i].1 <= samples[i - 1].1)
                && (i + 1 == samples.len() || samples[i].1 <= samples[i + 1].1)
        })
        .map(|i| samples[i])
        .collect();
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    minima.truncate(32);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = (lo, f64::INFINITY);
    for (center, _) in minima {
        let (mut a, mut b) = ((center - step).max(lo), (center + step).min(hi));
        for _ in 0..80 {
            let m1 = b - phi * (b - a);
            let m2 = a + phi * (b - a);
            if trig_defect_bound(terms, &w, m1, &mut acc) < trig_defect_bound(terms, &w, m2, &mut acc) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let c = 0.5 * (a + b);
        let v = trig_defect_bound(terms, &w, c, &mut acc);
        if v < best.1 {
            best = (c, v);
        }
    }
    let tau0 = best.0;
    Ok((tau0, almost_period_defect(g, s, tau0, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(n: usize, alpha: f64) -> Spectrum {
        Spectrum::dirichlet_laplacian(n, alpha).unwrap()
    }

    fn sine(mode: usize, a: f64, beta: f64, phase: f64) -> TrigTerm {
        TrigTerm {
            mode,
            amplitude: a,
            frequency: beta,
            phase,
        }
    }

    #[test]
    fn eval_examples() {
        let z = ForcingSignal::zero(3);
        assert_eq!(z.eval(1.7).unwrap().0, vec![0.0; 3]);
        let c = ForcingSignal::constant(StateVector::basis(3, 2, 2.5)).unwrap();
        assert_eq!(c.eval(-4.0).unwrap().0, vec![0.0, 2.5, 0.0]);
        let t = ForcingSignal::trig_sum(3, vec![sine(2, 1.0, 1.0, 0.0)]).unwrap();
        let v = t.eval(PI / 2.0).unwrap();
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-15);
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn tabulated_interpolates_and_rejects_out_of_range() {
        let rows = vec![StateVector(vec![0.0, 1.0]), StateVector(vec![2.0, 3.0])];
        let g = ForcingSignal::tabulated(1.0, 0.5, rows).unwrap();
        let v = g.eval(1.25).unwrap();
        assert_relative_eq!(v[0], 1.0);
        assert_relative_eq!(v[1], 2.0);
        assert!(matches!(g.eval(0.0), Err(Error::Range(_))));
        let s = shift_forcing(&g, 0.25);
        assert_eq!(s.eval(1.0).unwrap(), g.eval(1.25).unwrap());
    }

    #[test]
    fn shift_examples() {
        let g = ForcingSignal::trig_sum(2, vec![sine(1, 1.0, 1.0, 0.0)])
            .unwrap()
            .with_period(2.0 * PI)
            .unwrap();
        assert_eq!(shift_forcing(&g, 0.0), g);
        let p = shift_forcing(&g, 2.0 * PI);
        for t in [-3.0, 0.1, 5.0] {
            assert!((p.eval(t).unwrap()[0] - g.eval(t).unwrap()[0]).abs() < 1e-12);
        }
        let h = shift_forcing(&g, PI);
        assert_relative_eq!(h.effective_terms()[0].phase, PI);
    }

    #[test]
    fn declared_period_is_checked() {
        let g = ForcingSignal::trig_sum(2, vec![sine(1, 1.0, 1.0, 0.0)]).unwrap();
        assert!(g.clone().with_period(PI).is_err());
        assert!(g.clone().with_period(2.0 * PI).is_ok());
        assert!(g.with_period(-1.0).is_err());
        assert!(ForcingSignal::trig_sum(2, vec![sine(3, 1.0, 1.0, 0.0)]).is_err());
    }

    #[test]
    fn temperedness_examples() {
        let s = sp(3, 0.0);
        assert_eq!(temperedness_integral(&ForcingSignal::zero(3), &s, 1.0, 0.0, 0.0).unwrap(), 0.0);
        let c = ForcingSignal::constant(StateVector(vec![0.0, 3.0, 4.0])).unwrap();
        assert_relative_eq!(
            temperedness_integral(&c, &s, 2.0, 5.0, 0.0).unwrap(),
            2.5,
            epsilon = 1e-15
        );
        // ∫ e^{s}|sin(s)| ds over (−∞,0] equals (1 + e^{−π})/(2(1 − e^{−π})).
        // The kinks of |sin| limit Simpson to second order.
        let t = ForcingSignal::trig_sum(3, vec![sine(2, 1.0, 1.0, 0.0)]).unwrap();
        let val = temperedness_integral(&t, &s, 1.0, 0.0, 0.0).unwrap();
        let e = (-PI).exp();
        assert_relative_eq!(val, (1.0 + e) / (2.0 * (1.0 - e)), epsilon = 1e-6);
        assert!(val <= t.sup_norm_alpha_bound(&s) / 1.0);
        assert!(temperedness_integral(&t, &s, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tabulated_temperedness() {
        let rows: Vec<StateVector> = (0..=4000).map(|_| StateVector(vec![1.0, 0.0])).collect();
        let g = ForcingSignal::tabulated(-40.0, 0.01, rows).unwrap();
        let s = sp(2, 0.0);
        let v = temperedness_integral(&g, &s, 1.0, 0.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
        // Too short to resolve the weighted decay.
        let short: Vec<StateVector> = (0..=100).map(|_| StateVector(vec![1.0, 0.0])).collect();
        let g = ForcingSignal::tabulated(-1.0, 0.01, short).unwrap();
        assert!(matches!(
            temperedness_integral(&g, &s, 1.0, 0.0, 0.0),
            Err(Error::Validation(_))
        ));
        // Exponential growth toward −∞.
        let grow: Vec<StateVector> = (0..=4000)
            .map(|i| StateVector(vec![(2.0 * (40.0 - 0.01 * i as f64)).exp(), 0.0]))
            .collect();
        let g = ForcingSignal::tabulated(-40.0, 0.01, grow).unwrap();
        assert!(matches!(
            temperedness_integral(&g, &s, 1.0, 0.0, 0.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn almost_period_examples() {
        let s = sp(3, 0.25);
        let g = ForcingSignal::trig_sum(3, vec![sine(2, 0.7, 2.0, 0.3)])
            .unwrap()
            .with_period(PI)
            .unwrap();
        assert!(almost_period_defect(&g, &s, PI, 0.25).unwrap() < 1e-12);
        assert_eq!(almost_period_defect(&g, &s, 0.0, 0.25).unwrap(), 0.0);
        let flip = almost_period_defect(&g, &s, PI / 2.0, 0.25).unwrap();
        assert_relative_eq!(flip, 2.0 * 0.7 * 4f64.powf(0.25), epsilon = 1e-10);
    }

    #[test]
    fn scan_finds_quasi_period() {
        let s = sp(3, 0.0);
        let g = ForcingSignal::trig_sum(
            3,
            vec![sine(1, 0.1, 1.0, 0.0), sine(2, 0.1, 2f64.sqrt(), 0.0)],
        )
        .unwrap();
        let (tau0, eps) = scan_near_period(&g, &s, 0.0, 1.0, 2000.0).unwrap();
        assert!(tau0 > 1.0 && eps <= 1e-3, "tau0 = {tau0}, eps = {eps}");
        assert!(eps <= trig_defect_bound(
            match g.form() {
                ForcingForm::TrigSum { terms } => terms,
                _ => unreachable!(),
            },
            &[1.0, 1.0, 1.0],
            tau0,
            &mut [0.0; 3]
        ) + 1e-12);
    }
}
