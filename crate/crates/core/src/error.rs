use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} modes, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time {t} is not a multiple of the grid step {h}")]
    Alignment { t: f64, h: f64 },

    #[error("out of range: {0}")]
    Range(String),

    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The gap inequality fails; `margin` is left side minus right side (negative).
    #[error("gap condition violated at n = {n} (margin {margin:.6e})")]
    GapViolated { n: usize, margin: f64 },

    #[error("certificate violation: {0}")]
    CertificateViolation(String),

    #[error("integration became unstable at step {step} (t = {t})")]
    Instability { step: usize, t: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}
