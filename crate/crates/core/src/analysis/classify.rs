//! Does `dA = F(A) dt` reach infinity in finite time?
//!
//! The time to climb from `A0` to infinity is `\int_{A0}^inf dA / F(A)`, so
//! the question is whether this integral converges. Two independent tests
//! look at it:
//!
//! - quadrature: integrate over a geometric ladder of upper limits and
//!   watch how the increments decay;
//! - tail exponent: measure the local log-slope `p(A) = ln(F(eA) / F(A))`
//!   and the logarithmic power `q = (p - 1) / ln(1 + 1 / ln A)`. For
//!   `A (ln A)^b` this gives `q = b` exactly, and such laws converge
//!   exactly when `b > 1`; for power laws `q` grows like `ln A`.
//!
//! The verdict is the common answer of both, or inconclusive.

use serde::{Deserialize, Serialize};

use super::quad;
use crate::error::{Error, Result};
use crate::law::GrowthLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FiniteTime,
    InfiniteTime,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOptions {
    /// The ladder of upper limits is `A0 * 10^j` for `j = 1..=decades`.
    pub decades: u32,
    /// Increments must shrink by at least this ratio to count as converging.
    pub ratio: f64,
    /// Margin `s` above the borderline exponent.
    pub margin: f64,
    /// Levels at which the tail exponent is measured.
    pub tail_grid: Vec<f64>,
    pub quad_rtol: f64,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        Self {
            decades: 8,
            ratio: 0.9,
            margin: 0.05,
            tail_grid: vec![1e4, 1e5, 1e6, 1e7, 1e8],
            quad_rtol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEvidence {
    pub verdict: Verdict,
    /// Upper limits `L_j`.
    pub ladder: Vec<f64>,
    /// `\int_{L_(j-1)}^{L_j} dA / F`, with `L_0 = A0`.
    pub increments: Vec<f64>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
    /// Integral up to the top of the ladder.
    pub integral: f64,
    /// Extrapolated remainder beyond the ladder (finite verdicts only).
    pub tail: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEvidence {
    pub verdict: Verdict,
    pub grid: Vec<f64>,
    /// Local log-slope `ln(F(eA) / F(A))`.
    pub p: Vec<f64>,
    /// `(p - 1) / ln(1 + 1 / ln A)`.
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    pub a0: f64,
    /// Time to reach infinity starting from `A0`; set for finite-time only.
    pub singularity_time_estimate: Option<f64>,
    /// Local exponent `p` at the top of the tail grid.
    pub tail_exponent: f64,
    pub monotone: bool,
    pub quadrature: QuadratureEvidence,
    pub tail: TailEvidence,
}

fn checked_rate(law: &GrowthLaw, a: f64) -> Result<f64> {
    let f = law.rate(a)?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::domain(format!(
            "growth law must be positive and finite; F({a}) = {f}"
        )));
    }
    Ok(f)
}

/// Smallest of `1, e, 10` at which `F` is positive, for laws such as
/// `A ln A` that vanish at 1.
pub fn default_lower_limit(law: &GrowthLaw) -> f64 {
    [1.0, std::f64::consts::E, 10.0]
        .into_iter()
        .find(|&a| matches!(law.rate(a), Ok(f) if f > 0.0 && f.is_finite()))
        .unwrap_or(1.0)
}

/// Samples `F` on a log grid and reports whether it never decreases.
fn sample_law(law: &GrowthLaw, a0: f64, top: f64) -> Result<bool> {
    let n = 400;
    let (lo, hi) = (a0.ln(), top.ln());
    let mut prev = 0.0;
    let mut monotone = true;
    for i in 0..=n {
        let a = (lo + (hi - lo) * i as f64 / n as f64).exp();
        let f = checked_rate(law, a)?;
        if f < prev * (1.0 - 1e-12) {
            monotone = false;
        }
        prev = f;
    }
    Ok(monotone)
}

/// Local exponent `d ln F / d ln A` by a central difference.
fn local_exponent(law: &GrowthLaw, a: f64) -> Result<f64> {
    let h: f64 = 1e-3;
    let up = checked_rate(law, a * h.exp())?;
    let down = checked_rate(law, a * (-h).exp())?;
    Ok((up / down).ln() / (2.0 * h))
}

/// Linearized remaining integral `A / ((n - 1) F)`; exact for power laws.
fn linear_tail(law: &GrowthLaw, a: f64) -> Result<f64> {
    let n = local_exponent(law, a)?;
    if n <= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(a / ((n - 1.0) * checked_rate(law, a)?))
}

fn quadrature_test(law: &GrowthLaw, a0: f64, opts: &ClassifierOptions) -> Result<QuadratureEvidence> {
    let integrand = |x: f64| {
        let a = x.exp();
        checked_rate(law, a).map(|f| a / f)
    };
    let ladder: Vec<f64> = (1..=opts.decades).map(|j| a0 * 10f64.powi(j as i32)).collect();
    let mut increments = Vec::with_capacity(ladder.len());
    let mut lower = a0;
    for &upper in &ladder {
        increments.push(quad::integrate(&integrand, lower.ln(), upper.ln(), opts.quad_rtol)?);
        lower = upper;
    }
    let ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    let integral: f64 = increments.iter().sum();

    // Harmonic comparison: `I_j ln(L_(j-1))` stays bounded away from zero
    // (or grows) exactly when the increments decay no faster than those of
    // `1 / (A ln A)`.
    let lowers: Vec<f64> = std::iter::once(a0).chain(ladder.iter().copied()).collect();
    let harmonic: Vec<f64> = increments
        .iter()
        .zip(&lowers)
        .map(|(inc, l)| inc * l.ln().max(1.0))
        .collect();

    let last = 3.min(ratios.len());
    let tail_ratios = &ratios[ratios.len() - last..];
    let tail_harm = &harmonic[harmonic.len() - last - 1..];
    let non_decreasing = tail_ratios.iter().all(|r| *r >= 1.0 - 1e-9);
    let slower_than_harmonic = tail_harm.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    let geometric = tail_ratios.iter().all(|r| *r < opts.ratio);
    let below_harmonic = tail_harm.windows(2).all(|w| w[1] < w[0]);

    let (verdict, tail) = if non_decreasing || slower_than_harmonic {
        (Verdict::InfiniteTime, None)
    } else if geometric && below_harmonic {
        let n = ladder.len();
        let (l_prev, l_top) = (if n >= 2 { ladder[n - 2] } else { a0 }, ladder[n - 1]);
        let (tau_prev, tau_top) = (linear_tail(law, l_prev)?, linear_tail(law, l_top)?);
        let tail = if tau_top.is_finite() && tau_prev > tau_top {
            let c = increments[n - 1] / (tau_prev - tau_top);
            Some(c * tau_top)
        } else {
            None
        };
        match tail {
            Some(t) if t.is_finite() => (Verdict::FiniteTime, Some(t)),
            _ => (Verdict::Inconclusive, None),
        }
    } else {
        (Verdict::Inconclusive, None)
    };
    Ok(QuadratureEvidence {
        verdict,
        ladder,
        increments,
        ratios,
        integral,
        tail,
    })
}

fn tail_exponent_test(law: &GrowthLaw, opts: &ClassifierOptions) -> Result<TailEvidence> {
    let e = std::f64::consts::E;
    let mut p = Vec::with_capacity(opts.tail_grid.len());
    let mut q = Vec::with_capacity(opts.tail_grid.len());
    for &a in &opts.tail_grid {
        let pa = (checked_rate(law, e * a)? / checked_rate(law, a)?).ln();
        p.push(pa);
        q.push((pa - 1.0) / (1.0 / a.ln()).ln_1p());
    }
    let s = opts.margin;
    let min_p = p.iter().copied().fold(f64::INFINITY, f64::min);
    let min_q = q.iter().copied().fold(f64::INFINITY, f64::min);
    let max_q = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (q_first, q_last) = (q[0], q[q.len() - 1]);
    let verdict = if min_q >= 1.0 + s || (min_p >= 1.0 + s && q_first > 0.0 && q_last / q_first >= 1.5) {
        Verdict::FiniteTime
    } else if max_q <= 1.0 + 1e-6 {
        Verdict::InfiniteTime
    } else {
        Verdict::Inconclusive
    };
    Ok(TailEvidence {
        verdict,
        grid: opts.tail_grid.clone(),
        p,
        q,
    })
}

/// Classifies the growth law from the lower limit `a0` upwards.
pub fn classify_growth_law(law: &GrowthLaw, a0: f64, opts: &ClassifierOptions) -> Result<ConvergenceVerdict> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::domain(format!("lower limit must be positive, got {a0}")));
    }
    if opts.tail_grid.len() < 2 || opts.decades < 2 {
        return Err(Error::domain("classifier needs at least 2 tail points and 2 decades"));
    }
    let top = (a0 * 10f64.powi(opts.decades as i32))
        .max(std::f64::consts::E * opts.tail_grid.iter().copied().fold(0.0, f64::max));
    let monotone = sample_law(law, a0, top)?;
    let quadrature = quadrature_test(law, a0, opts)?;
    let tail = tail_exponent_test(law, opts)?;

    let verdict = if !monotone || quadrature.verdict != tail.verdict {
        Verdict::Inconclusive
    } else {
        tail.verdict
    };
    let singularity_time_estimate = match (verdict, quadrature.tail) {
        (Verdict::FiniteTime, Some(t)) => Some(quadrature.integral + t),
        _ => None,
    };
    let verdict = if verdict == Verdict::FiniteTime && singularity_time_estimate.is_none() {
        Verdict::Inconclusive
    } else {
        verdict
    };
    Ok(ConvergenceVerdict {
        verdict,
        a0,
        singularity_time_estimate,
        tail_exponent: *tail.p.last().expect("grid is non-empty"),
        monotone,
        quadrature,
        tail,
    })
}
