//! Convergence classifier, regime barometer and two-phase scenarios.

mod barometer;
mod classify;
mod phases;
pub mod quad;

pub use barometer::{barometer, barometer_scan, BarometerReport, DEFAULT_Z_THRESHOLD, MIN_WINDOW};
pub use classify::{
    classify_growth_law, default_lower_limit, ClassifierOptions, ConvergenceVerdict, QuadratureEvidence, TailEvidence,
    Verdict,
};
pub use phases::{compose_phases, PhaseOptions, PhasePlan};
