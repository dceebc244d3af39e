//! Itô processes `dA = a(A) dt + b(A) dW` with state-dependent coefficients.
//!
//! Paths are simulated with fixed-step Euler–Maruyama. A path stops early
//! when the level crosses the explosion threshold (or stops being finite)
//! or when a step drives it to zero or below; the latter is a
//! discretization artifact and is tagged as absorbed rather than clamped.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::path_rng;

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative step of the central differences used for `b'` and `u''`.
const DIFF_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelLabel {
    Gbm,
    HyperbolicSde,
    Custom,
}

#[derive(Clone)]
pub struct StochasticModel {
    drift: Coefficient,
    diffusion: Coefficient,
    label: ModelLabel,
    /// Closed form of the ergodicity transformation, when known.
    transform: Option<String>,
}

impl fmt::Debug for StochasticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochasticModel")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl StochasticModel {
    pub fn custom<D, B>(drift: D, diffusion: B) -> Self
    where
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            label: ModelLabel::Custom,
            transform: None,
        }
    }

    pub fn from_coefficients(drift: Coefficient, diffusion: Coefficient) -> Self {
        Self {
            drift,
            diffusion,
            label: ModelLabel::Custom,
            transform: None,
        }
    }

    pub fn label(&self) -> ModelLabel {
        self.label
    }

    pub fn drift(&self, a: f64) -> f64 {
        (self.drift)(a)
    }

    pub fn diffusion(&self, a: f64) -> f64 {
        (self.diffusion)(a)
    }

    pub fn diffusion_fn(&self) -> Coefficient {
        Arc::clone(&self.diffusion)
    }
}

/// Geometric Brownian motion `dA = k I A dt + sigma I A dW`.
pub fn gbm_model(k: f64, intelligence: f64, sigma: f64) -> Result<StochasticModel> {
    if !(k > 0.0 && intelligence > 0.0 && sigma >= 0.0) {
        return Err(Error::domain(format!(
            "GBM needs k > 0, I > 0, sigma >= 0; got k = {k}, I = {intelligence}, sigma = {sigma}"
        )));
    }
    let mu = k * intelligence;
    let vol = sigma * intelligence;
    Ok(StochasticModel {
        drift: Arc::new(move |a| mu * a),
        diffusion: Arc::new(move |a| vol * a),
        label: ModelLabel::Gbm,
        transform: Some(format!("u = ln(A) / {vol}")),
    })
}

/// Almost-sure long-run growth rate of [`gbm_model`]: `k I - (sigma I)^2 / 2`.
pub fn gbm_time_average_exponent(k: f64, intelligence: f64, sigma: f64) -> Result<f64> {
    gbm_model(k, intelligence, sigma)?;
    let vol = sigma * intelligence;
    Ok(k * intelligence - 0.5 * vol * vol)
}

/// Hyperbolic growth with level-proportional volatility:
/// `dA = k A^2 dt + sigma A^2 dW`.
pub fn hyperbolic_sde_model(k: f64, sigma: f64) -> Result<StochasticModel> {
    if !(k > 0.0 && sigma >= 0.0) {
        return Err(Error::domain(format!(
            "hyperbolic SDE needs k > 0, sigma >= 0; got k = {k}, sigma = {sigma}"
        )));
    }
    Ok(StochasticModel {
        drift: Arc::new(move |a| k * a * a),
        diffusion: Arc::new(move |a| sigma * a * a),
        label: ModelLabel::HyperbolicSde,
        transform: Some(format!("u = -1 / ({sigma} * A)")),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    /// Levels above this count as an explosion.
    pub threshold: f64,
    /// Record every `record_stride`-th step (the start and the last step
    /// are always recorded).
    pub record_stride: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            threshold: 1e9,
            record_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathOutcome {
    /// Reached `t_end` with a positive finite level.
    Survived,
    /// First step whose level exceeded the threshold or was not finite.
    Exploded { t: f64 },
    /// First step whose level was zero or negative.
    Absorbed { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub times: Vec<f64>,
    /// Recorded levels; all finite and positive.
    pub values: Vec<f64>,
    pub outcome: PathOutcome,
    pub seed: u64,
}

impl PathResult {
    pub fn exploded(&self) -> bool {
        matches!(self.outcome, PathOutcome::Exploded { .. })
    }

    pub fn absorbed(&self) -> bool {
        matches!(self.outcome, PathOutcome::Absorbed { .. })
    }

    pub fn explosion_time(&self) -> Option<f64> {
        match self.outcome {
            PathOutcome::Exploded { t } => Some(t),
            _ => None,
        }
    }

    pub fn terminal_value(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Simulates one Euler–Maruyama path from `A(0) = a0` to `t_end`.
pub fn em_path(
    model: &StochasticModel,
    a0: f64,
    dt: f64,
    t_end: f64,
    seed: u64,
    opts: &EmOptions,
) -> Result<PathResult> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::domain(format!("A0 must be positive and finite, got {a0}")));
    }
    if !(dt > 0.0 && t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!(
            "need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if opts.record_stride == 0 {
        return Err(Error::domain("record stride must be at least 1"));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut rng = path_rng(seed);
    let mut times = vec![0.0];
    let mut values = vec![a0];
    let mut a = a0;
    let mut outcome = PathOutcome::Survived;

    for m in 0..steps {
        let t = m as f64 * dt;
        let h = if m + 1 == steps { t_end - t } else { dt };
        let z: f64 = rng.sample(StandardNormal);
        let next = a + model.drift(a) * h + model.diffusion(a) * h.sqrt() * z;
        let t_next = if m + 1 == steps { t_end } else { (m + 1) as f64 * dt };
        if !next.is_finite() || next > opts.threshold {
            outcome = PathOutcome::Exploded { t: t_next };
            break;
        }
        if next <= 0.0 {
            outcome = PathOutcome::Absorbed { t: t_next };
            break;
        }
        a = next;
        if (m + 1) % opts.record_stride == 0 || m + 1 == steps {
            times.push(t_next);
            values.push(a);
        }
    }
    Ok(PathResult {
        times,
        values,
        outcome,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub transform_exists: bool,
    /// The transformation `u(A)`, normalized so that `b_u = 1`.
    pub u_of_a: String,
    pub grid: Vec<f64>,
    /// Drift `a_u` of `u` at each grid point.
    pub drift_of_u: Vec<f64>,
    /// `max |a_u - mean(a_u)| / |mean(a_u)|` over the grid.
    pub constancy_score: f64,
    pub tolerance: f64,
    pub reason: Option<String>,
}

pub const ERGODICITY_TOLERANCE: f64 = 1e-6;

fn central_diff(f: &dyn Fn(f64) -> f64, a: f64) -> f64 {
    let h = DIFF_STEP * a.abs().max(f64::MIN_POSITIVE);
    (f(a + h) - f(a - h)) / (2.0 * h)
}

/// Looks for `u(A)` with `du = a_u dt + b_u dW`, `a_u` and `b_u` constant.
///
/// With `b_u = 1`, `u' = 1 / b(A)` and Itô's formula gives
/// `a_u = u' a(A) + u'' b(A)^2 / 2`. The transformation exists when this
/// drift is constant over the grid.
pub fn ergodicity_check(model: &StochasticModel, grid: &[f64], tolerance: f64) -> Result<ErgodicityReport> {
    if grid.len() < 3 {
        return Err(Error::domain(format!(
            "ergodicity grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if let Some(a) = grid.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::domain(format!(
            "ergodicity grid must be strictly positive, got {a}"
        )));
    }
    let u_of_a = model
        .transform
        .clone()
        .unwrap_or_else(|| "u = integral of dA / b(A)".to_string());

    if let Some(a) = grid.iter().find(|&&a| model.diffusion(a) == 0.0) {
        return Ok(ErgodicityReport {
            transform_exists: false,
            u_of_a,
            grid: grid.to_vec(),
            drift_of_u: Vec::new(),
            constancy_score: f64::INFINITY,
            tolerance,
            reason: Some(format!("diffusion vanishes at A = {a}; no transformation is defined")),
        });
    }

    let du = |a: f64| 1.0 / model.diffusion(a);
    let drift_of_u: Vec<f64> = grid
        .iter()
        .map(|&a| {
            let b = model.diffusion(a);
            du(a) * model.drift(a) + 0.5 * central_diff(&du, a) * b * b
        })
        .collect();

    let mean = drift_of_u.iter().sum::<f64>() / drift_of_u.len() as f64;
    let spread = drift_of_u.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    let magnitude = drift_of_u.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let constancy_score = if magnitude == 0.0 {
        0.0
    } else if mean.abs() > 1e-12 * magnitude {
        spread / mean.abs()
    } else {
        spread / magnitude
    };
    let transform_exists = constancy_score < tolerance;
    let reason = (!transform_exists).then(|| "drift of u depends on A".to_string());
    Ok(ErgodicityReport {
        transform_exists,
        u_of_a,
        grid: grid.to_vec(),
        drift_of_u,
        constancy_score,
        tolerance,
        reason,
    })
}

/// Drift `a(A) = (a_u / b_u) b(A) + b(A) b'(A) / 2` for which the process
/// with diffusion `b` has an exact ergodicity transformation.
pub fn ergodic_drift(diffusion: Coefficient, a_u: f64, b_u: f64) -> Result<Coefficient> {
    if b_u == 0.0 || !b_u.is_finite() || !a_u.is_finite() {
        return Err(Error::domain(format!(
            "need finite a_u and non-zero b_u, got a_u = {a_u}, b_u = {b_u}"
        )));
    }
    let ratio = a_u / b_u;
    Ok(Arc::new(move |a| {
        let b = diffusion(a);
        ratio * b + 0.5 * b * central_diff(&*diffusion, a)
    }))
}
