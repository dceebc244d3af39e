//! Numerical laboratory for finite-time blow-up growth dynamics.
//!
//! - [`model`]: closed-form solutions and blow-up times (the analytic oracle)
//! - [`ode`]: adaptive Runge–Kutta integration with blow-up refinement
//! - [`sde`]: Euler–Maruyama paths and ergodicity transformations
//! - [`ensemble`]: seeded Monte Carlo ensembles of stochastic paths
//! - [`analysis`]: convergence classifier, regime barometer, two-phase plans
//! - [`dsl`]: text language for growth laws and rate systems

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dsl;
pub mod ensemble;
pub mod error;
pub mod law;
pub mod model;
pub mod ode;
pub mod rng;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
pub use law::GrowthLaw;
