//! Diagonal representation of the linear operator `A` on a Galerkin
//! truncation of its eigenbasis.
//!
//! Every operator in this crate acts mode by mode: `A e_j = λ_j e_j`, so the
//! semigroup, fractional powers and the projections `P_n`, `Q_n` are all
//! per-coefficient multiplications. The `D(A^α)` norm of a coefficient vector
//! is `(Σ λ_j^{2α} v_j²)^{1/2}`.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues of `A` (nondecreasing, positive) and the fractional exponent α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpectrumRepr", try_from = "SpectrumRepr")]
pub struct Spectrum {
    lambdas: Vec<f64>,
    alpha: f64,
    frac: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    lambdas: Vec<f64>,
    alpha: f64,
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> Self {
        SpectrumRepr {
            lambdas: s.lambdas,
            alpha: s.alpha,
        }
    }
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;
    fn try_from(r: SpectrumRepr) -> Result<Self> {
        Spectrum::new(r.lambdas, r.alpha)
    }
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>, alpha: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Spectrum("at least one eigenvalue is required".into()));
        }
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::Spectrum(format!("alpha = {alpha} outside [0, 1/2)")));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Spectrum(format!("eigenvalue {bad} is not positive")));
        }
        if lambdas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Spectrum("eigenvalues must be nondecreasing".into()));
        }
        let frac = lambdas.iter().map(|l| l.powf(alpha)).collect();
        Ok(Spectrum {
            lambdas,
            alpha,
            frac,
        })
    }

    /// 1-D Dirichlet Laplacian on (0, π): λ_j = j².
    pub fn dirichlet_laplacian(n_total: usize, alpha: f64) -> Result<Self> {
        Self::new((1..=n_total).map(|j| (j * j) as f64).collect(), alpha)
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// λ_j for the 1-based mode index `j`.
    pub fn lambda(&self, j: usize) -> f64 {
        self.lambdas[j - 1]
    }

    /// λ_j^α for every mode.
    pub fn frac_weights(&self) -> &[f64] {
        &self.frac
    }

    pub fn largest(&self) -> f64 {
        *self.lambdas.last().expect("nonempty spectrum")
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// `‖A^α v‖`, the `D(A^α)` norm.
    pub fn norm_alpha(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.frac)
            .map(|(x, w)| (w * x) * (w * x))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖A^α (a - b)‖` without allocating.
    pub fn dist_alpha(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.frac)
            .map(|((x, y), w)| {
                let d = w * (x - y);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Coefficients of a state in the eigenbasis of `A`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn zeros(len: usize) -> Self {
        StateVector(vec![0.0; len])
    }

    /// Unit vector along the 1-based mode `j`, scaled by `value`.
    pub fn basis(len: usize, j: usize, value: f64) -> Self {
        let mut v = Self::zeros(len);
        v.0[j - 1] = value;
        v
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &[f64]) -> StateVector {
        StateVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> StateVector {
        StateVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        StateVector(v)
    }
}

/// The split `H = P_n H ⊕ Q_n H` at the gap index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSplit {
    n: usize,
    total: usize,
}

impl ProjectionSplit {
    pub fn new(n: usize, total: usize) -> Result<Self> {
        if n == 0 || n >= total {
            return Err(Error::Parameter(format!(
                "gap index n = {n} must satisfy 1 <= n < {total}"
            )));
        }
        Ok(ProjectionSplit { n, total })
    }

    /// Number of resolved modes (dimension of `P_n H`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_p(&self, index0: usize) -> bool {
        index0 < self.n
    }

    /// `P_n v`, zero-padded.
    pub fn project_p(&self, v: &[f64]) -> StateVector {
        let mut out = StateVector::zeros(v.len());
        out[..self.n].copy_from_slice(&v[..self.n]);
        out
    }

    /// `Q_n v`, zero-padded.
    pub fn project_q(&self, v: &[f64]) -> StateVector {
        let mut out = StateVector::zeros(v.len());
        out[self.n..].copy_from_slice(&v[self.n..]);
        out
    }
}

/// Which part of the state a semigroup application acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    P,
    Q,
    Full,
}

/// `A^α v`, component `j` is `λ_j^α v_j`.
pub fn frac_power(alpha: f64, v: &StateVector, s: &Spectrum) -> Result<StateVector> {
    s.check_len(v.len())?;
    if alpha < 0.0 {
        return Err(Error::Domain(format!("negative fractional exponent {alpha}")));
    }
    Ok(StateVector(
        v.iter()
            .zip(s.lambdas())
            .map(|(x, l)| l.powf(alpha) * x)
            .collect(),
    ))
}

/// `e^{-At}` restricted to the chosen part; unselected modes are zeroed.
///
/// On `P_n H` the flow is invertible, so negative `t` is allowed there.
pub fn apply_semigroup(
    t: f64,
    v: &StateVector,
    split: ProjectionSplit,
    part: Part,
    s: &Spectrum,
) -> Result<StateVector> {
    s.check_len(v.len())?;
    if t < 0.0 && part != Part::P {
        return Err(Error::Domain(format!(
            "backward time t = {t} only defined on the P part"
        )));
    }
    let out = v
        .iter()
        .zip(s.lambdas())
        .enumerate()
        .map(|(j, (x, l))| {
            let selected = match part {
                Part::P => split.is_p(j),
                Part::Q => !split.is_p(j),
                Part::Full => true,
            };
            if selected {
                (-l * t).exp() * x
            } else {
                0.0
            }
        })
        .collect();
    Ok(StateVector(out))
}

pub fn split_state(v: &StateVector, split: ProjectionSplit) -> (StateVector, StateVector) {
    (split.project_p(v), split.project_q(v))
}

pub fn merge(p: &StateVector, q: &StateVector) -> StateVector {
    p.add(q)
}

/// Per-mode weights of the exponential integrator for step `h`.
///
/// For a piecewise-constant integrand `f` on `[s, s + h]`:
/// `∫ e^{-λ(s+h-r)} f dr = phi_h · f` and `∫ e^{-λ(s-r)} f dr = -back · f`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub h: f64,
    /// `e^{-λh}`
    pub decay: Vec<f64>,
    /// `e^{λh}`
    pub growth: Vec<f64>,
    /// `(1 - e^{-λh}) / λ`
    pub phi_h: Vec<f64>,
    /// `(e^{λh} - 1) / λ`
    pub back: Vec<f64>,
}

impl Propagator {
    pub fn new(s: &Spectrum, h: f64) -> Self {
        let l = s.lambdas();
        Propagator {
            h,
            decay: l.iter().map(|l| (-l * h).exp()).collect(),
            growth: l.iter().map(|l| (l * h).exp()).collect(),
            phi_h: l.iter().map(|l| -(-l * h).exp_m1() / l).collect(),
            back: l.iter().map(|l| (l * h).exp_m1() / l).collect(),
        }
    }
}
