//! Dormand–Prince 5(4) stepper with first-same-as-last stage reuse.

use crate::error::{Error, Result};

use super::{IntegrationOptions, VectorField};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

pub(crate) struct Stepper<'a> {
    field: &'a dyn VectorField,
    rtol: f64,
    atol: f64,
    max_step: f64,
    min_step: f64,
    max_steps: usize,
    steps: usize,
    t: f64,
    h: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    k: [Vec<f64>; 6],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

enum Trial {
    Accepted { err: f64 },
    Rejected { err: f64 },
    Failed(String),
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(
        field: &'a dyn VectorField,
        y0: &[f64],
        t0: f64,
        t_end: f64,
        opts: &IntegrationOptions,
    ) -> Result<Self> {
        let n = y0.len();
        let span = t_end - t0;
        let mut f = vec![0.0; n];
        field.eval(y0, &mut f).map_err(|e| Error::Field {
            t: t0,
            detail: e.to_string(),
        })?;
        if let Some(x) = f.iter().find(|x| !x.is_finite()) {
            return Err(Error::Field {
                t: t0,
                detail: format!("non-finite derivative {x}"),
            });
        }
        let mut s = Self {
            field,
            rtol: opts.rtol,
            atol: opts.atol,
            max_step: opts.max_step.unwrap_or(span).min(span),
            min_step: 1e-14 * span,
            max_steps: opts.max_steps,
            steps: 0,
            t: t0,
            h: 0.0,
            y: y0.to_vec(),
            f,
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
        };
        s.h = match opts.initial_step {
            Some(h) => h.min(s.max_step),
            None => s.initial_step(),
        };
        Ok(s)
    }

    pub(crate) fn t(&self) -> f64 {
        self.t
    }

    pub(crate) fn state(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn field(&self) -> &dyn VectorField {
        self.field
    }

    pub(crate) fn min_step(&self) -> f64 {
        self.min_step
    }

    /// Derivative at the current state.
    pub(crate) fn rate(&self) -> &[f64] {
        &self.f
    }

    fn scale(&self, i: usize, other: f64) -> f64 {
        self.atol + self.rtol * self.y[i].abs().max(other.abs())
    }

    fn rms(&self, v: &[f64], other: &[f64]) -> f64 {
        let n = v.len() as f64;
        (v.iter()
            .enumerate()
            .map(|(i, x)| (x / self.scale(i, other[i])).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.rms(&self.y, &self.y);
        let d1 = self.rms(&self.f, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.max_step);
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + h0 * self.f[i];
        }
        let mut f1 = vec![0.0; self.y.len()];
        let d2 = match self.field.eval(&self.ytmp, &mut f1) {
            Ok(()) if f1.iter().all(|x| x.is_finite()) => {
                let diff: Vec<f64> = f1.iter().zip(&self.f).map(|(a, b)| a - b).collect();
                self.rms(&diff, &self.y) / h0
            }
            _ => f64::INFINITY,
        };
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    fn stage(&mut self, idx: usize, coeffs: &[(usize, f64)], h: f64) -> std::result::Result<(), String> {
        for i in 0..self.y.len() {
            let mut acc = 0.0;
            for &(j, a) in coeffs {
                let kj = if j == 0 { self.f[i] } else { self.k[j - 1][i] };
                acc += a * kj;
            }
            self.ytmp[i] = self.y[i] + h * acc;
        }
        let (ytmp, out) = (&self.ytmp, &mut self.k[idx]);
        self.field.eval(ytmp, out).map_err(|e| e.to_string())?;
        if out.iter().any(|x| !x.is_finite()) || ytmp.iter().any(|x| !x.is_finite()) {
            return Err("non-finite derivative".into());
        }
        Ok(())
    }

    fn trial(&mut self, h: f64) -> Trial {
        let stages: [&[(usize, f64)]; 6] = [
            &[(0, A21)],
            &[(0, A31), (1, A32)],
            &[(0, A41), (1, A42), (2, A43)],
            &[(0, A51), (1, A52), (2, A53), (3, A54)],
            &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)],
            &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)],
        ];
        // k[0..5] hold stages 2..7; stage 7 is evaluated at the 5th-order result.
        for (idx, coeffs) in stages.iter().enumerate() {
            if let Err(e) = self.stage(idx, coeffs, h) {
                return Trial::Failed(e);
            }
        }
        self.ynew.copy_from_slice(&self.ytmp);
        let mut err = vec![0.0; self.y.len()];
        for (i, e) in err.iter_mut().enumerate() {
            *e = h
                * (E1 * self.f[i]
                    + E3 * self.k[1][i]
                    + E4 * self.k[2][i]
                    + E5 * self.k[3][i]
                    + E6 * self.k[4][i]
                    + E7 * self.k[5][i]);
        }
        let err = self.rms(&err, &self.ynew);
        if err <= 1.0 {
            Trial::Accepted { err }
        } else if err.is_finite() {
            Trial::Rejected { err }
        } else {
            Trial::Failed("non-finite error estimate".into())
        }
    }

    /// Takes one accepted step that does not pass `stop`.
    pub(crate) fn step(&mut self, stop: f64) -> Result<()> {
        if self.steps >= self.max_steps {
            return Err(Error::StepBudget {
                t: self.t,
                steps: self.steps,
            });
        }
        let mut last_failure: Option<String> = None;
        let mut rejected = false;
        loop {
            let remaining = stop - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if h < self.min_step || self.t + h == self.t {
                return Err(match last_failure {
                    Some(detail) => Error::Field { t: self.t, detail },
                    None => Error::Stiff { t: self.t, h },
                });
            }
            match self.trial(h) {
                Trial::Accepted { err } => {
                    let mut factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                    };
                    if rejected {
                        factor = factor.min(1.0);
                    }
                    self.t = if clipped { stop } else { self.t + h };
                    std::mem::swap(&mut self.y, &mut self.ynew);
                    std::mem::swap(&mut self.f, &mut self.k[5]);
                    let proposal = (h * factor).min(self.max_step);
                    // A clipped step says little about the natural step size.
                    self.h = if clipped {
                        proposal.max(self.h.min(self.max_step))
                    } else {
                        proposal
                    };
                    self.steps += 1;
                    return Ok(());
                }
                Trial::Rejected { err } => {
                    rejected = true;
                    self.h = h * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                }
                Trial::Failed(detail) => {
                    rejected = true;
                    last_failure = Some(detail);
                    self.h = h * MIN_FACTOR;
                }
            }
        }
    }
}
