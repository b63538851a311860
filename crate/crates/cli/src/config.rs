//! Run configuration: TOML schema, validation, and construction of the core
//! objects it describes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rim_core::forcing::TrigTerm;
use rim_core::lyapunov_perron::{backward_horizon, check_gap, forward_horizon, line_grid};
use rim_core::randomness::{sample_wiener, solve_ou};
use rim_core::{
    CovarianceSpec, ForcingSignal, GapCertificate, Model, Nonlinearity, OuProcess, OuScheme, Spectrum,
    StateVector, TimeGrid,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
}

fn bad(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub chart: ChartConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Worker threads; does not affect results and is left out of the hash.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `λ_j = j²`.
    Dirichlet,
    /// `lambdas` given literally.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub kind: SpectrumKind,
    #[serde(default)]
    pub modes: Option<usize>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityChoice {
    #[default]
    Zero,
    PerModeSin,
    CustomTable,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    #[serde(default)]
    pub kind: NonlinearityChoice,
    #[serde(default)]
    pub lipschitz: f64,
    /// `(x, y)` breakpoints of the scalar table.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingChoice {
    #[default]
    Zero,
    Constant,
    Trig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub kind: ForcingChoice,
    /// Coefficients for `constant`.
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
    /// Declared period, required by the periodicity check.
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub seed: u64,
    /// Per-mode covariance; overrides `scale`/`decay`.
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    /// `q_j = scale · j^{−decay}`.
    #[serde(default)]
    pub scale: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub scheme: OuScheme,
}

fn default_decay() -> f64 {
    2.0
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            seed: 0,
            q: None,
            scale: 0.0,
            decay: default_decay(),
            scheme: OuScheme::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub n: usize,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Chosen from the certificate when absent.
    #[serde(default)]
    pub t_back: Option<f64>,
    #[serde(default)]
    pub t_fwd: Option<f64>,
    #[serde(default = "default_cap")]
    pub horizon_cap: f64,
    #[serde(default)]
    pub tau: f64,
    /// Increasing pullback times; the last one feeds the attractor cloud.
    #[serde(default = "default_pullback")]
    pub pullback_times: Vec<f64>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_radius")]
    pub ensemble_radius: f64,
}

fn default_h() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    1e-6
}
fn default_cap() -> f64 {
    20.0
}
fn default_pullback() -> Vec<f64> {
    vec![4.0, 8.0]
}
fn default_ensemble() -> usize {
    8
}
fn default_radius() -> f64 {
    1.0
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            h: default_h(),
            tol: default_tol(),
            t_back: None,
            t_fwd: None,
            horizon_cap: default_cap(),
            tau: 0.0,
            pullback_times: default_pullback(),
            ensemble_size: default_ensemble(),
            ensemble_radius: default_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    /// Segment endpoints in P-coordinates (length n).
    #[serde(default)]
    pub from: Option<Vec<f64>>,
    #[serde(default)]
    pub to: Option<Vec<f64>>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    9
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            from: None,
            to: None,
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_inv_time")]
    pub invariance_time: f64,
    #[serde(default = "default_substeps")]
    pub flow_substeps: usize,
    #[serde(default = "default_c_inv")]
    pub c_inv: f64,
    #[serde(default = "default_lip_slack")]
    pub lipschitz_slack: f64,
    #[serde(default = "default_samples")]
    pub tracking_samples: usize,
    #[serde(default)]
    pub periodicity: bool,
    #[serde(default = "default_taus")]
    pub periodicity_taus: Vec<f64>,
    #[serde(default = "default_per_slack")]
    pub periodicity_slack: f64,
    /// Near-period for the almost-periodicity check; `ap_scan` finds one.
    #[serde(default)]
    pub ap_tau0: Option<f64>,
    #[serde(default)]
    pub ap_scan: Option<[f64; 2]>,
    #[serde(default)]
    pub containment: bool,
}

fn default_inv_time() -> f64 {
    1.0
}
fn default_substeps() -> usize {
    1
}
fn default_c_inv() -> f64 {
    10.0
}
fn default_lip_slack() -> f64 {
    0.05
}
fn default_samples() -> usize {
    4
}
fn default_taus() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_per_slack() -> f64 {
    1e-4
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            invariance_time: default_inv_time(),
            flow_substeps: default_substeps(),
            c_inv: default_c_inv(),
            lipschitz_slack: default_lip_slack(),
            tracking_samples: default_samples(),
            periodicity: false,
            periodicity_taus: default_taus(),
            periodicity_slack: default_per_slack(),
            ap_tau0: None,
            ap_scan: None,
            containment: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn total_modes(&self) -> usize {
        match self.spectrum.kind {
            SpectrumKind::Dirichlet => self.spectrum.modes.unwrap_or(0),
            SpectrumKind::Explicit => self.spectrum.lambdas.as_ref().map_or(0, Vec::len),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let sp = &self.spectrum;
        match sp.kind {
            SpectrumKind::Dirichlet => {
                if sp.modes.is_none_or(|m| m < 2) {
                    return Err(bad("spectrum.modes", "dirichlet spectrum needs modes >= 2"));
                }
                if sp.lambdas.is_some() {
                    return Err(bad("spectrum.lambdas", "only allowed with kind = \"explicit\""));
                }
            }
            SpectrumKind::Explicit => match &sp.lambdas {
                None => return Err(bad("spectrum.lambdas", "explicit spectrum needs lambdas")),
                Some(l) if l.len() < 2 => return Err(bad("spectrum.lambdas", "need at least two eigenvalues")),
                Some(l) if l.iter().any(|x| !(x.is_finite() && *x > 0.0)) => {
                    return Err(bad("spectrum.lambdas", "eigenvalues must be positive and finite"))
                }
                Some(l) if l.windows(2).any(|w| w[1] < w[0]) => {
                    return Err(bad("spectrum.lambdas", "eigenvalues must be nondecreasing"))
                }
                _ => {}
            },
        }
        if !(0.0..0.5).contains(&sp.alpha) {
            return Err(bad("spectrum.alpha", format!("{} not in [0, 1/2)", sp.alpha)));
        }
        let total = self.total_modes();

        let nl = &self.nonlinearity;
        if !(nl.lipschitz.is_finite() && nl.lipschitz >= 0.0) {
            return Err(bad("nonlinearity.lipschitz", "must be finite and >= 0"));
        }
        match nl.kind {
            NonlinearityChoice::Zero if nl.lipschitz != 0.0 => {
                return Err(bad("nonlinearity.lipschitz", "must be 0 for kind = \"zero\""))
            }
            NonlinearityChoice::CustomTable if nl.points.len() < 2 => {
                return Err(bad("nonlinearity.points", "table needs at least two points"))
            }
            _ => {}
        }

        let f = &self.forcing;
        match f.kind {
            ForcingChoice::Constant if f.values.len() != total => {
                return Err(bad("forcing.values", format!("expected {total} values, got {}", f.values.len())))
            }
            ForcingChoice::Trig if f.terms.is_empty() => {
                return Err(bad("forcing.terms", "trig forcing needs at least one term"))
            }
            _ => {}
        }
        if f.terms.iter().any(|t| t.mode == 0 || t.mode > total) {
            return Err(bad("forcing.terms", format!("mode must be in 1..={total}")));
        }
        if f.period.is_some_and(|p| !(p > 0.0 && p.is_finite())) {
            return Err(bad("forcing.period", "must be positive"));
        }

        let nz = &self.noise;
        if let Some(q) = &nz.q {
            if q.len() != total {
                return Err(bad("noise.q", format!("expected {total} entries, got {}", q.len())));
            }
            if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(bad("noise.q", "entries must be finite and >= 0"));
            }
        }
        if !(nz.scale.is_finite() && nz.scale >= 0.0) {
            return Err(bad("noise.scale", "must be finite and >= 0"));
        }
        if !nz.decay.is_finite() {
            return Err(bad("noise.decay", "must be finite"));
        }

        let c = &self.certificate;
        if c.n == 0 || c.n >= total {
            return Err(bad("certificate.n", format!("must be in 1..{total}")));
        }
        if !(c.k > 0.0 && c.k < 1.0) {
            return Err(bad("certificate.k", format!("{} not in (0, 1)", c.k)));
        }

        let nm = &self.numerics;
        if !(nm.h > 0.0 && nm.h.is_finite()) {
            return Err(bad("numerics.h", "must be positive"));
        }
        if !(nm.tol > 0.0 && nm.tol < 1.0) {
            return Err(bad("numerics.tol", "must be in (0, 1)"));
        }
        if !(nm.horizon_cap > 0.0 && nm.horizon_cap.is_finite()) {
            return Err(bad("numerics.horizon_cap", "must be positive"));
        }
        if nm.t_back.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(bad("numerics.t_back", "must be positive"));
        }
        if nm.t_fwd.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(bad("numerics.t_fwd", "must be positive"));
        }
        if !nm.tau.is_finite() {
            return Err(bad("numerics.tau", "must be finite"));
        }
        if nm.pullback_times.is_empty()
            || nm.pullback_times.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || nm.pullback_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(bad("numerics.pullback_times", "need increasing positive times"));
        }
        if nm.ensemble_size == 0 {
            return Err(bad("numerics.ensemble_size", "must be >= 1"));
        }
        if !(nm.ensemble_radius.is_finite() && nm.ensemble_radius >= 0.0) {
            return Err(bad("numerics.ensemble_radius", "must be finite and >= 0"));
        }

        let ch = &self.chart;
        if ch.points == 0 {
            return Err(bad("chart.points", "must be >= 1"));
        }
        for (field, v) in [("chart.from", &ch.from), ("chart.to", &ch.to)] {
            if v.as_ref().is_some_and(|v| v.len() != c.n) {
                return Err(bad(field, format!("expected {} P-coordinates", c.n)));
            }
        }

        if self.threads == Some(0) {
            return Err(bad("threads", "must be >= 1"));
        }

        let v = &self.verify;
        if !(v.invariance_time >= 0.0 && v.invariance_time.is_finite()) {
            return Err(bad("verify.invariance_time", "must be >= 0"));
        }
        if v.flow_substeps == 0 {
            return Err(bad("verify.flow_substeps", "must be >= 1"));
        }
        if !(v.c_inv > 0.0) {
            return Err(bad("verify.c_inv", "must be positive"));
        }
        if !(v.lipschitz_slack >= 0.0) {
            return Err(bad("verify.lipschitz_slack", "must be >= 0"));
        }
        if !(v.periodicity_slack >= 0.0) {
            return Err(bad("verify.periodicity_slack", "must be >= 0"));
        }
        if v.periodicity && f.period.is_none() {
            return Err(bad("forcing.period", "periodicity check needs a declared period"));
        }
        if v.ap_scan.is_some_and(|[lo, hi]| !(lo > 0.0 && hi > lo)) {
            return Err(bad("verify.ap_scan", "need 0 < lo < hi"));
        }
        Ok(())
    }

    pub fn spectrum(&self) -> rim_core::Result<Spectrum> {
        match self.spectrum.kind {
            SpectrumKind::Dirichlet => {
                Spectrum::dirichlet_laplacian(self.spectrum.modes.unwrap_or(0), self.spectrum.alpha)
            }
            SpectrumKind::Explicit => {
                Spectrum::new(self.spectrum.lambdas.clone().unwrap_or_default(), self.spectrum.alpha)
            }
        }
    }

    pub fn nonlinearity(&self, s: &Spectrum) -> rim_core::Result<Nonlinearity> {
        let nl = &self.nonlinearity;
        match nl.kind {
            NonlinearityChoice::Zero => Ok(Nonlinearity::zero(s)),
            NonlinearityChoice::PerModeSin => Nonlinearity::per_mode_sin(nl.lipschitz, s),
            NonlinearityChoice::CustomTable => {
                Nonlinearity::custom_table(nl.points.iter().map(|p| (p[0], p[1])).collect(), s)
            }
        }
    }

    pub fn forcing(&self) -> rim_core::Result<ForcingSignal> {
        let total = self.total_modes();
        let f = &self.forcing;
        let g = match f.kind {
            ForcingChoice::Zero => ForcingSignal::zero(total),
            ForcingChoice::Constant => ForcingSignal::constant(StateVector(f.values.clone()))?,
            ForcingChoice::Trig => ForcingSignal::trig_sum(total, f.terms.clone())?,
        };
        match f.period {
            Some(p) => g.with_period(p),
            None => Ok(g),
        }
    }

    pub fn covariance(&self) -> rim_core::Result<CovarianceSpec> {
        let total = self.total_modes();
        match &self.noise.q {
            Some(q) => CovarianceSpec::new(q.clone()),
            None => CovarianceSpec::new(
                (1..=total)
                    .map(|j| self.noise.scale * (j as f64).powf(-self.noise.decay))
                    .collect(),
            ),
        }
    }

    pub fn model(&self) -> rim_core::Result<Model> {
        let s = self.spectrum()?;
        let f = self.nonlinearity(&s)?;
        Model::new(s, f, self.forcing()?)
    }

    pub fn certificate(&self, s: &Spectrum) -> rim_core::Result<GapCertificate> {
        check_gap(s, self.nonlinearity.lipschitz, self.certificate.k, self.certificate.n)
    }

    /// Deterministic ensemble `u_{i,j} = r·sin(i·j + 1)/j`.
    pub fn ensemble(&self) -> Vec<StateVector> {
        let total = self.total_modes();
        let r = self.numerics.ensemble_radius;
        (0..self.numerics.ensemble_size)
            .map(|i| StateVector((1..=total).map(|j| r * ((i * j) as f64 + 1.0).sin() / j as f64).collect()))
            .collect()
    }

    /// Tracking start points `u_{i,j} = r·cos(i·j + 1/2)/j`.
    pub fn tracking_points(&self) -> Vec<StateVector> {
        let total = self.total_modes();
        let r = self.numerics.ensemble_radius;
        (0..self.verify.tracking_samples)
            .map(|i| StateVector((1..=total).map(|j| r * ((i * j) as f64 + 0.5).cos() / j as f64).collect()))
            .collect()
    }

    /// Chart base points; defaults to the segment `[−1, 1]·e_1`.
    pub fn chart_grid(&self) -> Vec<StateVector> {
        let total = self.total_modes();
        let n = self.certificate.n;
        let lift = |p: &[f64]| {
            let mut v = vec![0.0; total];
            v[..n].copy_from_slice(p);
            StateVector(v)
        };
        let mut default_from = vec![0.0; n];
        let mut default_to = vec![0.0; n];
        default_from[0] = -1.0;
        default_to[0] = 1.0;
        let from = lift(self.chart.from.as_deref().unwrap_or(&default_from));
        let to = lift(self.chart.to.as_deref().unwrap_or(&default_to));
        line_grid(&from, &to, self.chart.points)
    }
}

/// Everything a command needs, built once from a validated config.
pub struct Setup {
    pub model: Model,
    pub cert: GapCertificate,
    pub ou: OuProcess,
    pub t_back: f64,
    pub t_fwd: f64,
}

fn align(t: f64, h: f64) -> f64 {
    (t / h).ceil() * h
}

impl Setup {
    pub fn build(cfg: &RunConfig) -> rim_core::Result<Self> {
        let model = cfg.model()?;
        let s = &model.spectrum;
        let cert = cfg.certificate(s)?;
        let nm = &cfg.numerics;
        let h = nm.h;
        model.check_step(h)?;
        let t_back = match nm.t_back {
            Some(t) => align(t, h),
            None => backward_horizon(s, &cert, nm.tol, nm.horizon_cap, h),
        };
        let t_fwd = match nm.t_fwd {
            Some(t) => align(t, h),
            None => forward_horizon(s, &cert, nm.tol, nm.horizon_cap, h),
        };
        let pullback = nm.pullback_times.last().copied().unwrap_or(0.0);
        let lo = -(align(t_back + pullback, h) + 1.0);
        let hi = align(t_fwd.max(cfg.verify.invariance_time), h) + 1.0;
        let grid = TimeGrid::new(lo, hi, h)?;
        let cov = cfg.covariance()?;
        let ou = if cov.trace() == 0.0 {
            OuProcess::zero(s.len(), grid)
        } else {
            solve_ou(&sample_wiener(cfg.noise.seed, grid, &cov), s, cfg.noise.scheme)?
        };
        Ok(Setup {
            model,
            cert,
            ou,
            t_back,
            t_fwd,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[spectrum]
kind = "dirichlet"
modes = 8

[certificate]
n = 1
k = 0.2
"#;

    fn field_of(text: &str) -> &'static str {
        match RunConfig::from_toml(text) {
            Err(ConfigError::Field { field, .. }) => field,
            other => panic!("expected a field error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.numerics.h, 1e-3);
        assert_eq!(c.chart.points, 9);
        assert_eq!(c.chart_grid().len(), 9);
        assert_eq!(c.chart_grid()[0], StateVector::basis(8, 1, -1.0));
        assert_eq!(c.total_modes(), 8);
    }

    #[test]
    fn validation_names_fields() {
        assert_eq!(field_of(&BASE.replace("k = 0.2", "k = 1.5")), "certificate.k");
        assert_eq!(field_of(&BASE.replace("n = 1", "n = 8")), "certificate.n");
        assert_eq!(field_of(&BASE.replace("modes = 8", "modes = 8\nalpha = 0.5")), "spectrum.alpha");
        assert_eq!(field_of(&format!("{BASE}[numerics]\nh = -1.0\n")), "numerics.h");
        assert_eq!(field_of(&format!("{BASE}[noise]\nq = [1.0]\n")), "noise.q");
        assert_eq!(field_of(&format!("{BASE}[forcing]\nkind = \"constant\"\nvalues = [1.0]\n")), "forcing.values");
        assert_eq!(field_of(&format!("{BASE}[nonlinearity]\nlipschitz = 0.1\n")), "nonlinearity.lipschitz");
        assert_eq!(
            field_of(&format!("{BASE}[numerics]\npullback_times = [4.0, 2.0]\n")),
            "numerics.pullback_times"
        );
        assert_eq!(field_of(&format!("{BASE}[chart]\nfrom = [0.0, 1.0]\n")), "chart.from");
        assert!(matches!(RunConfig::from_toml("[spectrum]\nkind = \"x\""), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn hash_ignores_threads_but_not_seed() {
        let a = RunConfig::from_toml(BASE).unwrap();
        let mut b = a.clone();
        b.threads = Some(8);
        assert_eq!(a.hash(), b.hash());
        b.noise.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn covariance_from_scale_and_decay() {
        let c = RunConfig::from_toml(&format!("{BASE}[noise]\nscale = 0.5\ndecay = 1.0\n")).unwrap();
        let q = c.covariance().unwrap();
        assert_eq!(q.q[0], 0.5);
        assert_eq!(q.q[3], 0.125);
    }

    #[test]
    fn setup_covers_every_horizon() {
        let c = RunConfig::from_toml(&format!("{BASE}[noise]\nscale = 0.1\n")).unwrap();
        let s = Setup::build(&c).unwrap();
        let h = c.numerics.h;
        let back = ((s.t_back + 8.0) / h).round() as isize;
        let fwd = (s.t_fwd / h).round() as isize;
        s.ou.require(-back, fwd).unwrap();
    }
}
