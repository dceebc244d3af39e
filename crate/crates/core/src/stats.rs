//! Least-squares fits and order statistics shared by the analysis code.

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 paired samples, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// Quadratic least-squares fit with the standard error of the quadratic
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    /// Coefficients of `1, x, x^2`.
    pub coeffs: [f64; 3],
    pub quad_stderr: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

/// Fits `y = b0 + b1 x + b2 x^2`. The abscissa is centered and scaled
/// internally to keep the normal equations well conditioned.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<QuadraticFit> {
    let m = x.len();
    if m != y.len() || m < 4 {
        return Err(Error::InsufficientData(format!(
            "quadratic fit needs at least 4 samples, got {m}"
        )));
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !(hi > lo) {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let s: Vec<f64> = x.iter().map(|v| (v - mid) / half).collect();

    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (si, yi) in s.iter().zip(y) {
        let row = [1.0, *si, si * si];
        for r in 0..3 {
            aty[r] += row[r] * yi;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let inv = invert3(&ata).ok_or_else(|| Error::InsufficientData("degenerate design matrix".into()))?;
    let mut b = [0.0; 3];
    for r in 0..3 {
        b[r] = (0..3).map(|c| inv[r][c] * aty[c]).sum();
    }
    let rss: f64 = s
        .iter()
        .zip(y)
        .map(|(si, yi)| {
            let r = yi - (b[0] + b[1] * si + b[2] * si * si);
            r * r
        })
        .sum();
    let sigma2 = rss / (m as f64 - 3.0);
    let se_scaled = (sigma2 * inv[2][2]).sqrt();

    // Back to the original abscissa: x = mid + half * s.
    let q = b[2] / (half * half);
    let l = b[1] / half - 2.0 * q * mid;
    let c = b[0] - b[1] * mid / half + q * mid * mid;
    Ok(QuadraticFit {
        coeffs: [c, l, q],
        quad_stderr: se_scaled / (half * half),
        rss,
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    // Adjugate: the (r, c) entry is the cofactor of m[c][r].
    Some(std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det
        })
    }))
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    Some(sorted[lo] + w * (sorted[hi] - sorted[lo]))
}

pub fn mean_and_std(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}
