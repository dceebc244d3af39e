//! Regime barometer: curvature of `ln A` against `t`.
//!
//! Exponential growth is a straight line in log scale. A significantly
//! positive quadratic coefficient means the growth is running ahead of any
//! exponential trend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::quadratic_fit;

pub const MIN_WINDOW: usize = 8;
pub const DEFAULT_Z_THRESHOLD: f64 = 3.0;

/// Relative size, in the fit's scaled units, below which the quadratic
/// term is indistinguishable from rounding.
const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarometerReport {
    /// First sample index of the window.
    pub start: usize,
    /// One past the last sample index of the window.
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Coefficient of `t^2` in the fit of `ln A`.
    pub quadratic_coeff: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub flagged: bool,
}

fn check_series(times: &[f64], values: &[f64], window: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::domain(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if window < MIN_WINDOW {
        return Err(Error::domain(format!(
            "window must be at least {MIN_WINDOW}, got {window}"
        )));
    }
    if values.len() < window {
        return Err(Error::InsufficientData(format!(
            "need at least {window} samples, got {}",
            values.len()
        )));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!(
            "value at sample {i} (t = {}) is not positive: {v}",
            times[i]
        )));
    }
    Ok(())
}

fn fit_window(times: &[f64], values: &[f64], start: usize, end: usize, z_threshold: f64) -> Result<BarometerReport> {
    let t = &times[start..end];
    let y: Vec<f64> = values[start..end].iter().map(|v| v.ln()).collect();
    let fit = quadratic_fit(t, &y)?;

    let (lo, hi) = (t[0].min(t[t.len() - 1]), t[0].max(t[t.len() - 1]));
    let half = 0.5 * (hi - lo);
    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut q = fit.coeffs[2];
    let mut z = if fit.quad_stderr > 0.0 {
        q / fit.quad_stderr
    } else {
        q.signum() * f64::INFINITY
    };
    if (q * half * half).abs() <= NOISE_FLOOR * scale {
        q = 0.0;
        z = 0.0;
    }
    Ok(BarometerReport {
        start,
        end,
        t_start: t[0],
        t_end: t[t.len() - 1],
        quadratic_coeff: q,
        stderr: fit.quad_stderr,
        z_score: z,
        flagged: q > 0.0 && z > z_threshold,
    })
}

/// Fits the trailing `window` samples.
pub fn barometer(times: &[f64], values: &[f64], window: usize, z_threshold: f64) -> Result<BarometerReport> {
    check_series(times, values, window)?;
    let n = values.len();
    fit_window(times, values, n - window, n, z_threshold)
}

/// Fits every window of `window` consecutive samples, in order.
pub fn barometer_scan(times: &[f64], values: &[f64], window: usize, z_threshold: f64) -> Result<Vec<BarometerReport>> {
    check_series(times, values, window)?;
    (window..=values.len())
        .map(|end| fit_window(times, values, end - window, end, z_threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exponential_is_never_flagged() {
        let t = grid(100, 30.0);
        let a: Vec<f64> = t.iter().map(|t| 1.5872f64.powf(*t)).collect();
        for r in barometer_scan(&t, &a, 16, DEFAULT_Z_THRESHOLD).unwrap() {
            assert!(!r.flagged, "{r:?}");
            assert!(r.quadratic_coeff.abs() <= 1e-9);
        }
    }

    #[test]
    fn hyperbola_is_flagged() {
        let t = grid(81, 80.0);
        let a: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 - 0.01 * t)).collect();
        let r = barometer(&t, &a, 32, DEFAULT_Z_THRESHOLD).unwrap();
        assert!(r.flagged);
        assert!(r.z_score > 20.0, "{r:?}");
        // Oracle: second derivative of -ln(1 - 0.01 t) is 1e-4 / (1 - 0.01 t)^2,
        // so the fitted coefficient lies between half its values at the window ends.
        let lo = 0.5e-4 / (1.0 - 0.01 * r.t_start).powi(2);
        let hi = 0.5e-4 / (1.0 - 0.01 * r.t_end).powi(2);
        assert!(
            lo < r.quadratic_coeff && r.quadratic_coeff < hi,
            "{lo} {} {hi}",
            r.quadratic_coeff
        );
        assert_eq!((r.start, r.end), (49, 81));
    }

    #[test]
    fn double_exponential_is_flagged() {
        let t = grid(60, 3.0);
        let a: Vec<f64> = t.iter().map(|t| (0.2 + 0.5 * t).exp().exp()).collect();
        assert!(barometer(&t, &a, 20, DEFAULT_Z_THRESHOLD).unwrap().flagged);
    }

    #[test]
    fn concave_logs_are_not_flagged() {
        let t = grid(40, 10.0);
        let a: Vec<f64> = t.iter().map(|t| 1.0 + t).collect();
        let r = barometer(&t, &a, 20, DEFAULT_Z_THRESHOLD).unwrap();
        assert!(r.quadratic_coeff < 0.0 && !r.flagged);
    }

    #[test]
    fn input_errors() {
        let t = grid(10, 1.0);
        let a = vec![1.0; 10];
        assert!(matches!(barometer(&t, &a, 12, 3.0), Err(Error::InsufficientData(_))));
        assert!(matches!(barometer(&t, &a, 4, 3.0), Err(Error::Domain(_))));
        let mut bad = a.clone();
        bad[9] = 0.0;
        assert!(matches!(barometer(&t, &bad, 8, 3.0), Err(Error::Domain(_))));
        assert!(matches!(
            barometer(&[2.0; 10], &a, 8, 3.0),
            Err(Error::InsufficientData(_))
        ));
    }
}
