//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Panel budget of the global subdivision.
const MAX_PANELS: usize = 2000;

/// One G7K15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

#[derive(PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    est: f64,
    err: f64,
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to a relative accuracy of about `rtol`,
/// always splitting the panel with the largest error estimate.
pub fn integrate(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, rtol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("quadrature limits must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (est, err) = panel(f, a, b)?;
    let mut heap = BinaryHeap::from([Panel { a, b, est, err }]);
    let (mut total, mut total_err) = (est, err);
    while total_err > rtol * total.abs() && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        let (l, le) = panel(f, worst.a, m)?;
        let (r, re) = panel(f, m, worst.b)?;
        total += l + r - worst.est;
        total_err += le + re - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: m,
            est: l,
            err: le,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            est: r,
            err: re,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let total: f64 = heap.iter().map(|p| p.est).sum();
    if !total.is_finite() {
        return Err(Error::domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(total)
}
