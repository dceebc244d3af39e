//! Adaptive integration of autonomous growth systems `dE_i = F_i(E) dt`
//! with blow-up detection.
//!
//! The scheme is the Dormand–Prince 5(4) embedded pair. When any component
//! crosses [`IntegrationOptions::blowup_threshold`] the integrator switches
//! to a refinement phase that keeps stepping through a ladder of higher
//! thresholds and extrapolates the blow-up time from the local growth
//! exponent (see [`blowup`]).

mod blowup;
mod rk45;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use blowup::{BlowUpEvent, BlowUpMethod, BlowUpSearch, NoBlowUp};
use rk45::Stepper;

/// Right-hand side of an autonomous system.
///
/// Implementations must not mutate internal state during evaluation; one
/// field is shared by concurrent integrations.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `F(state)` into `rate`. Both slices have length [`dim`](Self::dim).
    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()>;
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        (**self).eval(state, rate)
    }
}

impl<V: VectorField + ?Sized> VectorField for Arc<V> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        (**self).eval(state, rate)
    }
}

/// A vector field backed by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        (self.f)(state, rate);
        Ok(())
    }
}

/// Scalar field `dA = f(A) dt`.
pub fn scalar_field<F>(f: F) -> FnField<impl Fn(&[f64], &mut [f64]) + Send + Sync>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    FnField::new(1, move |s: &[f64], r: &mut [f64]| r[0] = f(s[0]))
}

/// Product field `dE_i = k_i * prod_j E_j dt`.
pub struct MultiplicativeField {
    coeffs: Vec<f64>,
}

impl MultiplicativeField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("multiplicative system needs at least one factor"));
        }
        if let Some(k) = coeffs.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::domain(format!("coefficients must be positive, got {k}")));
        }
        Ok(Self { coeffs })
    }
}

impl VectorField for MultiplicativeField {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }
    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        let prod: f64 = state.iter().product();
        for (r, k) in rate.iter_mut().zip(&self.coeffs) {
            *r = k * prod;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    /// A component above this level ends the recorded trajectory and starts
    /// blow-up refinement.
    pub blowup_threshold: f64,
    /// Absolute width allowed for the blow-up bracket. `None` means
    /// `1e-3` times the current estimate.
    pub blowup_tol: Option<f64>,
    /// Times to sample at. `None` records every accepted step.
    pub output_times: Option<Vec<f64>>,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            initial_step: None,
            blowup_threshold: 1e9,
            blowup_tol: None,
            output_times: None,
            max_steps: 5_000_000,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = Some(times);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return Err(Error::domain("tolerances must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::domain("blow-up threshold must be positive"));
        }
        if let Some(times) = &self.output_times {
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::domain("output times must be strictly ascending"));
            }
        }
        Ok(())
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryEnd {
    /// Integrated all the way to `t_end`.
    Horizon,
    /// Crossed the threshold and the refinement confirmed a finite blow-up.
    BlowUp(BlowUpEvent),
    /// Crossed the threshold, but no blow-up could be confirmed before the
    /// horizon or the end of the representable range.
    Escaped { t_cross: f64, reason: NoBlowUp },
}

/// Time-ordered samples of the state. Samples never exceed the blow-up
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub end: TrajectoryEnd,
}

impl Trajectory {
    pub fn blowup(&self) -> Option<&BlowUpEvent> {
        match &self.end {
            TrajectoryEnd::BlowUp(ev) => Some(ev),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Values of one component across all samples.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// State at a sampled time, if `t` was sampled exactly.
    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        self.times
            .iter()
            .position(|&s| s == t)
            .map(|i| self.states[i].as_slice())
    }
}

fn check_initial(field: &dyn VectorField, state0: &[f64]) -> Result<()> {
    if state0.len() != field.dim() {
        return Err(Error::domain(format!(
            "initial state has {} components, field has {}",
            state0.len(),
            field.dim()
        )));
    }
    if let Some(x) = state0.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!(
            "initial state must be strictly positive and finite, got {x}"
        )));
    }
    Ok(())
}

fn exceeds(state: &[f64], threshold: f64) -> bool {
    state.iter().any(|&x| x > threshold)
}

/// Integrates `field` from `state0` at `t = 0` up to `t_end`.
pub fn integrate(field: &dyn VectorField, state0: &[f64], t_end: f64, opts: &IntegrationOptions) -> Result<Trajectory> {
    opts.validate()?;
    check_initial(field, state0)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!("t_end must be positive and finite, got {t_end}")));
    }

    let mut stepper = Stepper::new(field, state0, 0.0, t_end, opts)?;
    let mut times = vec![0.0];
    let mut states = vec![state0.to_vec()];

    let outputs: Vec<f64> = match &opts.output_times {
        Some(ts) => {
            let mut v: Vec<f64> = ts.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
            v.push(t_end);
            v
        }
        None => Vec::new(),
    };
    let record_all = opts.output_times.is_none();
    let mut next_out = 0;

    if exceeds(state0, opts.blowup_threshold) {
        return Err(Error::domain("initial state already exceeds the blow-up threshold"));
    }

    while stepper.t() < t_end {
        let stop = if record_all { t_end } else { outputs[next_out] };
        if let Err(err) = stepper.step(stop) {
            return match (&err, blowup::singular_stop(&stepper, opts)) {
                (Error::Stiff { .. } | Error::Field { .. }, Some(ev)) => Ok(Trajectory {
                    times,
                    states,
                    end: TrajectoryEnd::BlowUp(ev),
                }),
                _ => Err(err),
            };
        }
        if exceeds(stepper.state(), opts.blowup_threshold) {
            let t_cross = stepper.t();
            let end = match blowup::refine(&mut stepper, t_end, opts) {
                BlowUpSearch::Found(ev) => TrajectoryEnd::BlowUp(ev),
                BlowUpSearch::NotFound { reason, .. } => TrajectoryEnd::Escaped { t_cross, reason },
            };
            return Ok(Trajectory { times, states, end });
        }
        if record_all {
            times.push(stepper.t());
            states.push(stepper.state().to_vec());
        } else if stepper.t() == outputs[next_out] {
            times.push(stepper.t());
            states.push(stepper.state().to_vec());
            next_out += 1;
        }
    }
    Ok(Trajectory {
        times,
        states,
        end: TrajectoryEnd::Horizon,
    })
}

/// Searches for a finite-time blow-up before `horizon`.
pub fn estimate_blowup_time(
    field: &dyn VectorField,
    state0: &[f64],
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<BlowUpSearch> {
    let opts = IntegrationOptions {
        output_times: Some(Vec::new()),
        ..opts.clone()
    };
    let traj = integrate(field, state0, horizon, &opts)?;
    Ok(match traj.end {
        TrajectoryEnd::BlowUp(ev) => BlowUpSearch::Found(ev),
        TrajectoryEnd::Horizon => BlowUpSearch::NotFound {
            reason: NoBlowUp::HorizonReached,
            t_reached: horizon,
        },
        TrajectoryEnd::Escaped { t_cross, reason } => BlowUpSearch::NotFound {
            reason,
            t_reached: t_cross,
        },
    })
}

/// Integrates `dE_i = k_i * prod_j E_j dt`.
pub fn integrate_multiplicative(
    coeffs: &[f64],
    state0: &[f64],
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    let field = MultiplicativeField::new(coeffs.to_vec())?;
    integrate(&field, state0, t_end, opts)
}
