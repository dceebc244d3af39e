//! Closed-form solutions and blow-up times of the deterministic growth laws.
//!
//! Two clocks are used throughout. `t1` runs from `A = 1` during the
//! exponential phase `dA = k I A dt`; `t2` runs from `A = I` during the
//! self-improvement phase. A total singularity time is the sum of the two.
//!
//! These functions are the analytic oracle for the numerical engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annual growth factor of machine performance (doubling every ~1.5 years).
pub const DEFAULT_GROWTH_FACTOR: f64 = 1.5872;
/// Ratio of engineer intelligence to current machine intelligence.
pub const DEFAULT_INTELLIGENCE_RATIO: f64 = 100.0;

/// Relative distance from `t_star` inside which closed forms refuse to evaluate.
const BLOWUP_GUARD: f64 = 1e-12;

/// Named scenario parameters. Rates are per year (or per period).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Growth coefficient `k`.
    pub k: f64,
    /// Engineer-to-machine intelligence ratio `I`.
    #[serde(rename = "I")]
    pub intelligence: f64,
    /// Annual growth factor `R`.
    #[serde(rename = "R")]
    pub growth_factor: f64,
    /// Coupling exponent of the power law `dA = k A^n dt`.
    pub n_exp: f64,
    pub sigma: f64,
    /// Integration constant of the exponential and log-law solutions.
    pub c: f64,
    pub k1: f64,
    pub k2: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "Y0")]
    pub y0: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        let growth_factor = DEFAULT_GROWTH_FACTOR;
        let intelligence = DEFAULT_INTELLIGENCE_RATIO;
        Self {
            k: growth_factor.ln() / intelligence,
            intelligence,
            growth_factor,
            n_exp: 2.0,
            sigma: 0.0,
            c: 1.0,
            k1: 0.05,
            k2: 0.1,
            a0: 1.0,
            y0: 0.5,
        }
    }
}

impl ScenarioParams {
    /// Log growth rate `r = ln R`.
    pub fn log_rate(&self) -> f64 {
        self.growth_factor.ln()
    }

    /// Replaces `k` with the value calibrated from `R` and `I`.
    pub fn calibrated(mut self) -> Result<Self> {
        self.k = calibrate_k(self.growth_factor, self.intelligence)?;
        Ok(self)
    }
}

/// Blow-up time measured from the start of the phase it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t_star", rename_all = "snake_case")]
pub enum BlowUpTime {
    Finite(f64),
    Never,
}

impl BlowUpTime {
    pub fn is_finite(&self) -> bool {
        matches!(self, BlowUpTime::Finite(_))
    }

    pub fn t_star(&self) -> Option<f64> {
        match *self {
            BlowUpTime::Finite(t) => Some(t),
            BlowUpTime::Never => None,
        }
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

fn guard_blowup(t: f64, t_star: f64) -> Result<()> {
    if t >= t_star * (1.0 - BLOWUP_GUARD) {
        Err(Error::BeyondBlowUp { t, t_star })
    } else {
        Ok(())
    }
}

/// `k = ln R / I`: the coefficient reproducing growth factor `R` per year
/// while the engineer has intelligence `I`.
pub fn calibrate_k(growth_factor: f64, intelligence: f64) -> Result<f64> {
    require(growth_factor > 1.0, || {
        format!("growth factor R must exceed 1, got {growth_factor}")
    })?;
    require(intelligence > 0.0, || {
        format!("intelligence ratio I must be positive, got {intelligence}")
    })?;
    Ok(growth_factor.ln() / intelligence)
}

/// `A = c exp(k I t1)`.
pub fn exp_phase_solution(params: &ScenarioParams, t1: f64) -> Result<f64> {
    require(t1 >= 0.0, || format!("t1 must be non-negative, got {t1}"))?;
    require(params.intelligence > 0.0, || {
        "intelligence ratio I must be positive".into()
    })?;
    let level = params.c * (params.k * params.intelligence * t1).exp();
    if !level.is_finite() {
        return Err(Error::Overflow { t: t1 });
    }
    Ok(level)
}

/// Years needed to grow from `A = 1` to `A = I` at growth factor `R`.
pub fn phase1_duration(growth_factor: f64, intelligence: f64) -> Result<f64> {
    require(growth_factor > 1.0, || {
        format!("growth factor R must exceed 1, got {growth_factor}")
    })?;
    require(intelligence >= 1.0, || {
        format!("intelligence ratio I = {intelligence} < 1: the exponential phase is already over")
    })?;
    Ok(intelligence.ln() / growth_factor.ln())
}

/// Solution of `dA = k A^2 dt` with `A(0) = I`, written as `I / (1 - k I t2)`.
pub fn hyperbolic_solution(k: f64, intelligence: f64, t2: f64) -> Result<f64> {
    require(k > 0.0, || format!("k must be positive, got {k}"))?;
    require(intelligence > 0.0, || {
        format!("intelligence ratio I must be positive, got {intelligence}")
    })?;
    require(t2 >= 0.0, || format!("t2 must be non-negative, got {t2}"))?;
    let t_star = 1.0 / (k * intelligence);
    guard_blowup(t2, t_star)?;
    Ok(intelligence / (1.0 - k * intelligence * t2))
}

pub fn hyperbolic_blowup_time(k: f64, intelligence: f64) -> Result<BlowUpTime> {
    require(k > 0.0 && intelligence > 0.0, || {
        format!("k and I must be positive, got k = {k}, I = {intelligence}")
    })?;
    Ok(BlowUpTime::Finite(1.0 / (k * intelligence)))
}

/// Phase-1 duration plus the hyperbolic blow-up time with calibrated `k`,
/// i.e. `(ln I + 1) / ln R`.
pub fn total_singularity_time(growth_factor: f64, intelligence: f64) -> Result<f64> {
    let t1 = phase1_duration(growth_factor, intelligence)?;
    let k = calibrate_k(growth_factor, intelligence)?;
    let t2 = hyperbolic_blowup_time(k, intelligence)?
        .t_star()
        .expect("hyperbolic blow-up is always finite");
    Ok(t1 + t2)
}

/// Solution of `dA = k A^n dt` with `A(0) = I` for `n > 1`:
/// `A = (I^(1-n) - (n-1) k t2)^(-1/(n-1))`.
pub fn powerlaw_solution(k: f64, intelligence: f64, n_exp: f64, t2: f64) -> Result<f64> {
    require(n_exp > 1.0, || {
        format!("power law needs n > 1 for finite-time blow-up, got n = {n_exp}; use the exponential or log law")
    })?;
    require(t2 >= 0.0, || format!("t2 must be non-negative, got {t2}"))?;
    let t_star = match powerlaw_blowup_time(k, intelligence, n_exp)? {
        BlowUpTime::Finite(t) => t,
        BlowUpTime::Never => unreachable!("n > 1 checked above"),
    };
    guard_blowup(t2, t_star)?;
    let m = n_exp - 1.0;
    // (1 - t2/t*) keeps the base exact at t2 = 0 and accurate near t*.
    let base = intelligence.powf(-m) * (1.0 - t2 / t_star);
    let level = base.powf(-1.0 / m);
    if !level.is_finite() {
        return Err(Error::Overflow { t: t2 });
    }
    Ok(level)
}

/// `t* = 1 / ((n-1) k I^(n-1))`; `Never` for `n <= 1`.
pub fn powerlaw_blowup_time(k: f64, intelligence: f64, n_exp: f64) -> Result<BlowUpTime> {
    require(k > 0.0 && intelligence > 0.0, || {
        format!("k and I must be positive, got k = {k}, I = {intelligence}")
    })?;
    if n_exp <= 1.0 {
        return Ok(BlowUpTime::Never);
    }
    let m = n_exp - 1.0;
    Ok(BlowUpTime::Finite(1.0 / (m * k * intelligence.powf(m))))
}

/// Double exponential `A = exp(exp(c + k t))`, the solution of
/// `dA = k ln(A) A dt`. It never blows up; overflow is reported separately.
pub fn loglaw_solution(c: f64, k: f64, t: f64) -> Result<f64> {
    require(c.is_finite() && k.is_finite() && t.is_finite(), || {
        format!("log law needs finite inputs, got c = {c}, k = {k}, t = {t}")
    })?;
    let level = (c + k * t).exp().exp();
    if !level.is_finite() {
        return Err(Error::Overflow { t });
    }
    Ok(level)
}

/// Level `A = 1 / (1 - k1 t)` of the coupled system `dY = k1 Y A`,
/// `dA = k2 Y A` with `A(0) = 1` and `Y(0) = k1 / k2`.
pub fn coupled_gdp_solution(k1: f64, t: f64) -> Result<f64> {
    require(k1 > 0.0, || format!("k1 must be positive, got {k1}"))?;
    require(t >= 0.0, || format!("t must be non-negative, got {t}"))?;
    guard_blowup(t, 1.0 / k1)?;
    Ok(1.0 / (1.0 - k1 * t))
}
