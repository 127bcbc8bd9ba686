//! Penalized approximations of reflected Brownian motion on manifolds with
//! boundary, with boundary local time, damped parallel transport and Monte
//! Carlo checks of the associated heat-semigroup representations.
//!
//! The modules build on each other bottom-up:
//!
//! * [`geometry`] – the built-in model manifolds and their differential data.
//! * [`skorohod1d`] – exact half-line machinery and the 1D penalized family.
//! * [`penalized`] / [`reflected`] – the coupled path integrators.
//! * [`transport`] / [`damped`] – transport frames and damped transports.
//! * [`estimators`] – Monte Carlo estimators with analytic oracles.
//! * [`harness`] – experiments, result rows and the CLI plumbing.

pub mod damped;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod penalized;
pub mod reflected;
pub mod rng;
pub mod skorohod1d;
pub mod stats;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{ManifoldModel, ModelKind, TangentVector};
pub use penalized::{DriverPath, PenalizedPath, TimeGrid};
pub use reflected::{Monitoring, ReflectOptions, ReflectedPath};
pub use skorohod1d::{RealPath, SkorohodSolution};
