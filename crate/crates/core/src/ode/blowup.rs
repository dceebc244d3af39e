//! Blow-up time refinement by reciprocal-power extrapolation.
//!
//! Near a singularity of a field that behaves like `F(A) ~ A^n`, the
//! quantity `A^(1-n)` is asymptotically linear in `t` and vanishes at `t*`.
//! Linearizing it at the current point gives the remaining time
//! `tau = A / ((n - 1) F)`, with `n` taken from a secant of `ln F` against
//! `ln A` over the recent past of the fastest-growing component.
//!
//! For pure power laws `tau` is exact. When `F` carries logarithmic factors
//! the true remaining time is `c * tau` for a constant `c != 1`, so the
//! refinement keeps integrating through a ladder of thresholds and
//! estimates `c` from how fast `tau` shrinks between rungs. A blow-up is
//! confirmed once successive estimates agree to within the tolerance. Laws
//! that cross the threshold without blowing up (`A ln A`, exponentials)
//! show a remaining time that never shrinks and are reported as escapes.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::rk45::Stepper;
use super::IntegrationOptions;

/// Ratio between successive refinement thresholds.
const RUNG_FACTOR: f64 = 1e3;
/// Levels beyond this are treated as the end of the representable range.
const CEILING: f64 = 1e300;
/// The exponent secant spans at least this factor in level (`e^0.5`).
const SECANT_SPAN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowUpMethod {
    /// The remaining time at the first threshold crossing was already
    /// within tolerance.
    ThresholdCrossing,
    ReciprocalExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpEvent {
    pub t_low: f64,
    pub t_high: f64,
    pub estimate: f64,
    pub method: BlowUpMethod,
    /// Component whose growth was extrapolated.
    pub component: usize,
    /// Local growth exponent `n` at the last refinement rung.
    pub local_exponent: f64,
}

impl BlowUpEvent {
    pub fn width(&self) -> f64 {
        self.t_high - self.t_low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoBlowUp {
    HorizonReached,
    /// The state left the representable range (or the field stopped being
    /// finite) without a converging blow-up estimate.
    RangeExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowUpSearch {
    Found(BlowUpEvent),
    NotFound { reason: NoBlowUp, t_reached: f64 },
}

impl BlowUpSearch {
    pub fn event(&self) -> Option<&BlowUpEvent> {
        match self {
            BlowUpSearch::Found(ev) => Some(ev),
            BlowUpSearch::NotFound { .. } => None,
        }
    }

    pub fn estimate(&self) -> Option<f64> {
        self.event().map(|ev| ev.estimate)
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    t: f64,
    level: f64,
    rate: f64,
}

#[derive(Debug, Clone, Copy)]
struct Rung {
    t: f64,
    tau: f64,
    estimate: Option<f64>,
}

fn fastest_component(state: &[f64], rate: &[f64]) -> usize {
    state
        .iter()
        .zip(rate)
        .map(|(a, f)| f / a)
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (i, g)| if g > best.1 { (i, g) } else { best },
        )
        .0
}

/// Local exponent and linearized remaining time at the newest probe, or
/// `None` while the history does not yet span [`SECANT_SPAN`].
fn extrapolate(history: &VecDeque<Probe>) -> Option<(f64, f64)> {
    let cur = history.back()?;
    let limit = cur.level * (-SECANT_SPAN).exp();
    let reference = history.iter().rev().find(|p| p.level <= limit)?;
    if !(cur.rate > 0.0 && reference.rate > 0.0) {
        return Some((f64::NAN, f64::INFINITY));
    }
    let n = (cur.rate / reference.rate).ln() / (cur.level / reference.level).ln();
    let tau = if n - 1.0 > 1e-9 {
        cur.level / ((n - 1.0) * cur.rate)
    } else {
        f64::INFINITY
    };
    Some((n, tau))
}

fn prune(history: &mut VecDeque<Probe>) {
    let Some(cur) = history.back().copied() else { return };
    let limit = cur.level * (-SECANT_SPAN).exp();
    // Keep the newest probe below the secant limit and everything after it.
    while history.len() > 2 && history[1].level <= limit {
        history.pop_front();
    }
}

/// Blow-up check for a stepper whose step size underflowed.
///
/// Close enough to a singularity the remaining time falls below the time
/// resolution and no step can make progress, even though the level is
/// still under the threshold. The local exponent comes from one extra
/// field evaluation a small distance along the flow.
pub(super) fn singular_stop(stepper: &Stepper<'_>, opts: &IntegrationOptions) -> Option<BlowUpEvent> {
    let y = stepper.state();
    let f = stepper.rate();
    let comp = fastest_component(y, f);
    let (a, rate) = (y[comp], f[comp]);
    if !(rate > 0.0 && a > 0.0) {
        return None;
    }
    let eps = 1e-6 * a / rate;
    let shifted: Vec<f64> = y.iter().zip(f).map(|(yi, fi)| yi + eps * fi).collect();
    let mut f2 = vec![0.0; y.len()];
    stepper.field().eval(&shifted, &mut f2).ok()?;
    let exponent = (f2[comp] / rate).ln() / (shifted[comp] / a).ln();
    if !(exponent.is_finite() && exponent > 1.0) {
        return None;
    }
    let tau = a / ((exponent - 1.0) * rate);
    let estimate = stepper.t() + tau;
    let tol = opts.blowup_tol.unwrap_or(1e-3 * estimate);
    (tau <= 0.5 * tol).then(|| BlowUpEvent {
        t_low: stepper.t(),
        t_high: stepper.t() + 2.0 * tau.max(stepper.min_step()),
        estimate,
        method: BlowUpMethod::ReciprocalExtrapolation,
        component: comp,
        local_exponent: exponent,
    })
}

/// Continues from a stepper that has just crossed the blow-up threshold.
pub(super) fn refine(stepper: &mut Stepper<'_>, horizon: f64, opts: &IntegrationOptions) -> BlowUpSearch {
    let comp = fastest_component(stepper.state(), stepper.rate());
    let probe = |s: &Stepper<'_>| Probe {
        t: s.t(),
        level: s.state()[comp],
        rate: s.rate()[comp],
    };

    let mut history = VecDeque::new();
    history.push_back(probe(stepper));
    let mut rungs: Vec<Rung> = Vec::new();
    let mut next_level = stepper.state()[comp];

    loop {
        let cur = *history.back().expect("history is never empty");
        if cur.level >= next_level {
            if let Some((exponent, tau)) = extrapolate(&history) {
                let mut rung = Rung {
                    t: cur.t,
                    tau,
                    estimate: None,
                };
                let c = match rungs.last() {
                    None if tau.is_finite() => Some(1.0),
                    None => None,
                    Some(prev) if prev.tau.is_finite() && tau.is_finite() && prev.tau > tau => {
                        Some((cur.t - prev.t) / (prev.tau - tau))
                    }
                    Some(_) => None,
                };
                if let Some(c) = c.filter(|c| c.is_finite() && *c > 0.0) {
                    let remaining = c * tau;
                    let estimate = cur.t + remaining;
                    rung.estimate = Some(estimate);
                    let tol = opts.blowup_tol.unwrap_or(1e-3 * estimate);

                    if remaining <= 0.5 * tol {
                        let method = if rungs.is_empty() {
                            BlowUpMethod::ThresholdCrossing
                        } else {
                            BlowUpMethod::ReciprocalExtrapolation
                        };
                        return BlowUpSearch::Found(BlowUpEvent {
                            t_low: cur.t,
                            t_high: cur.t + 2.0 * remaining,
                            estimate,
                            method,
                            component: comp,
                            local_exponent: exponent,
                        });
                    }
                    if let Some(prev) = rungs.last().and_then(|r| r.estimate) {
                        let d = (estimate - prev).abs();
                        if d <= 0.5 * tol {
                            return BlowUpSearch::Found(BlowUpEvent {
                                t_low: (estimate - d).max(cur.t),
                                t_high: estimate + d,
                                estimate,
                                method: BlowUpMethod::ReciprocalExtrapolation,
                                component: comp,
                                local_exponent: exponent,
                            });
                        }
                    }
                }
                rungs.push(rung);
                next_level = cur.level * RUNG_FACTOR;
            }
        }

        if cur.level > CEILING {
            return BlowUpSearch::NotFound {
                reason: NoBlowUp::RangeExhausted,
                t_reached: cur.t,
            };
        }
        if stepper.t() >= horizon {
            return BlowUpSearch::NotFound {
                reason: NoBlowUp::HorizonReached,
                t_reached: cur.t,
            };
        }
        if stepper.step(horizon).is_err() {
            if let Some(ev) = singular_stop(stepper, opts) {
                return BlowUpSearch::Found(ev);
            }
            return BlowUpSearch::NotFound {
                reason: NoBlowUp::RangeExhausted,
                t_reached: stepper.t(),
            };
        }
        history.push_back(probe(stepper));
        prune(&mut history);
    }
}
