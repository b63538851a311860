//! Random inertial manifolds for non-autonomous stochastic semilinear
//! parabolic equations on a spectral Galerkin truncation.
//!
//! The state space is the span of the first `N` eigenvectors of `A`, so every
//! linear operator is diagonal. Noise enters through the stationary
//! Ornstein–Uhlenbeck process `z`, which turns the stochastic equation into a
//! random one solved path by path.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod forcing;
pub mod lyapunov_perron;
pub mod randomness;
pub mod spectral;
pub mod tracking;

pub use analysis::{AttractorCloud, DefectKind, DefectReport, InvarianceOptions};
pub use dynamics::{Model, Nonlinearity, NonlinearityKind, Trajectory};
pub use error::{Error, Result};
pub use forcing::{ForcingForm, ForcingSignal, TrigTerm};
pub use lyapunov_perron::{
    BackwardTrajectory, ForwardTrajectory, GapCertificate, LpSolver, ManifoldChart,
};
pub use randomness::{CovarianceSpec, OuProcess, OuScheme, TimeGrid, WienerPath};
pub use spectral::{Part, ProjectionSplit, Spectrum, StateVector};
pub use tracking::{TrackingResult, TrackingSolver};
