//! Seeded Monte Carlo ensembles of Euler–Maruyama paths.
//!
//! Path `i` draws its noise from `path_seed(master_seed, i)` and results are
//! gathered in index order, so statistics do not depend on scheduling or on
//! whether the ensemble runs in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{barometer, BarometerReport, MIN_WINDOW};
use crate::error::{Error, Result};
use crate::rng::path_seed;
use crate::sde::{em_path, hyperbolic_sde_model, EmOptions, PathOutcome, PathResult, StochasticModel};
use crate::stats::{linear_fit, mean_and_std, quantile_sorted};

pub const MIN_SLOPE_SAMPLES: usize = 10;

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub model: StochasticModel,
    pub a0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub em: EmOptions,
}

impl EnsembleSpec {
    pub fn new(model: StochasticModel, t_end: f64, n_paths: usize, master_seed: u64) -> Self {
        Self {
            model,
            a0: 1.0,
            dt: 0.01,
            t_end,
            n_paths,
            master_seed,
            em: EmOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::domain("an ensemble needs at least one path"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::domain(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Serial,
    Parallel,
}

/// Runs `f` on every path of the ensemble; results come back in path order.
pub fn map_paths<T, F>(spec: &EnsembleSpec, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, PathResult) -> T + Send + Sync,
{
    spec.validate()?;
    let one = |i: usize| -> Result<T> {
        let seed = path_seed(spec.master_seed, i as u64);
        let path = em_path(&spec.model, spec.a0, spec.dt, spec.t_end, seed, &spec.em)?;
        Ok(f(i, path))
    };
    match exec {
        Execution::Serial => (0..spec.n_paths).map(one).collect(),
        Execution::Parallel => (0..spec.n_paths).into_par_iter().map(one).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub index: usize,
    pub seed: u64,
    pub outcome: PathOutcome,
    /// Last recorded level.
    pub terminal_value: f64,
    /// Log-growth slope over the recorded prefix, when long enough.
    pub slope: Option<f64>,
}

impl PathSummary {
    pub fn of(index: usize, path: &PathResult) -> Self {
        Self {
            index,
            seed: path.seed,
            outcome: path.outcome,
            terminal_value: path.terminal_value().unwrap_or(f64::NAN),
            slope: pathwise_growth_slope(path).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

impl Quantiles {
    fn of_sorted(v: &[f64]) -> Option<Self> {
        Some(Self {
            p05: quantile_sorted(v, 0.05)?,
            p25: quantile_sorted(v, 0.25)?,
            p50: quantile_sorted(v, 0.50)?,
            p75: quantile_sorted(v, 0.75)?,
            p95: quantile_sorted(v, 0.95)?,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.p75 - self.p25
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_paths: usize,
    pub exploded_fraction: f64,
    pub absorbed_fraction: f64,
    pub survived_fraction: f64,
    /// Explosion times of exploded paths, ascending.
    pub blowup_times: Vec<f64>,
    pub blowup_quantiles: Option<Quantiles>,
    /// Last levels of the paths that reached `t_end`.
    pub terminal_values: Vec<f64>,
    pub slope_mean: Option<f64>,
    pub slope_std: Option<f64>,
    pub paths: Vec<PathSummary>,
}

impl EnsembleStats {
    pub fn from_summaries(paths: Vec<PathSummary>) -> Self {
        let n = paths.len();
        let count = |pred: fn(&PathOutcome) -> bool| paths.iter().filter(|p| pred(&p.outcome)).count();
        let exploded = count(|o| matches!(o, PathOutcome::Exploded { .. }));
        let absorbed = count(|o| matches!(o, PathOutcome::Absorbed { .. }));
        let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };

        let mut blowup_times: Vec<f64> = paths
            .iter()
            .filter_map(|p| match p.outcome {
                PathOutcome::Exploded { t } => Some(t),
                _ => None,
            })
            .collect();
        blowup_times.sort_by(f64::total_cmp);
        let terminal_values = paths
            .iter()
            .filter(|p| p.outcome == PathOutcome::Survived)
            .map(|p| p.terminal_value)
            .collect();
        let slopes: Vec<f64> = paths.iter().filter_map(|p| p.slope).collect();
        let spread = mean_and_std(&slopes);

        Self {
            n_paths: n,
            exploded_fraction: frac(exploded),
            absorbed_fraction: frac(absorbed),
            survived_fraction: frac(n - exploded - absorbed),
            blowup_quantiles: Quantiles::of_sorted(&blowup_times),
            blowup_times,
            terminal_values,
            slope_mean: spread.map(|s| s.0),
            slope_std: spread.map(|s| s.1),
            paths,
        }
    }
}

pub fn run_ensemble_with(spec: &EnsembleSpec, exec: Execution) -> Result<EnsembleStats> {
    let paths = map_paths(spec, exec, |i, path| PathSummary::of(i, &path))?;
    Ok(EnsembleStats::from_summaries(paths))
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleStats> {
    run_ensemble_with(spec, Execution::Parallel)
}

/// Least-squares slope of `ln A` against `t` over the recorded samples.
pub fn pathwise_growth_slope(path: &PathResult) -> Result<f64> {
    let usable: Vec<(f64, f64)> = path
        .times
        .iter()
        .zip(&path.values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if usable.len() < MIN_SLOPE_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "growth slope needs at least {MIN_SLOPE_SAMPLES} positive samples, got {}",
            usable.len()
        )));
    }
    let (t, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    Ok(linear_fit(&t, &y)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingTemplate {
    pub a0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Barometer sampling interval, in steps.
    pub record_stride: usize,
    /// Trailing window in samples; `None` uses the whole path.
    pub window: Option<usize>,
    pub z_threshold: f64,
    pub threshold: f64,
}

impl Default for MaskingTemplate {
    fn default() -> Self {
        Self {
            a0: 1.0,
            dt: 0.01,
            t_end: 50.0,
            n_paths: 500,
            master_seed: 42,
            record_stride: 100,
            window: None,
            z_threshold: crate::analysis::DEFAULT_Z_THRESHOLD,
            threshold: 1e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingRow {
    pub sigma: f64,
    pub n_paths: usize,
    /// Non-exploded paths long enough for the barometer window.
    pub evaluated: usize,
    pub flagged: usize,
    pub flagged_fraction: f64,
    pub exploded_fraction: f64,
}

/// For each volatility, the share of non-exploded hyperbolic paths whose
/// log-trajectory the barometer flags as superexponential. Every volatility
/// reuses the same path seeds.
pub fn volatility_masking_scan(k: f64, sigmas: &[f64], template: &MaskingTemplate) -> Result<Vec<MaskingRow>> {
    if sigmas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("volatilities must be ascending"));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let spec = EnsembleSpec {
                model: hyperbolic_sde_model(k, sigma)?,
                a0: template.a0,
                dt: template.dt,
                t_end: template.t_end,
                n_paths: template.n_paths,
                master_seed: template.master_seed,
                em: EmOptions {
                    threshold: template.threshold,
                    record_stride: template.record_stride,
                },
            };
            let reports: Vec<(bool, Option<BarometerReport>)> = map_paths(&spec, Execution::Parallel, |_, path| {
                if path.exploded() {
                    return (true, None);
                }
                let window = template.window.unwrap_or(path.values.len());
                let report = (window >= MIN_WINDOW)
                    .then(|| barometer(&path.times, &path.values, window, template.z_threshold).ok())
                    .flatten();
                (false, report)
            })?;
            let exploded = reports.iter().filter(|r| r.0).count();
            let evaluated = reports.iter().filter(|r| r.1.is_some()).count();
            let flagged = reports.iter().filter(|r| r.1.is_some_and(|b| b.flagged)).count();
            Ok(MaskingRow {
                sigma,
                n_paths: template.n_paths,
                evaluated,
                flagged,
                flagged_fraction: if evaluated == 0 {
                    0.0
                } else {
                    flagged as f64 / evaluated as f64
                },
                exploded_fraction: exploded as f64 / template.n_paths as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::gbm_model;

    #[test]
    fn degenerate_noise_collapses_blowup_times() {
        let spec = EnsembleSpec::new(hyperbolic_sde_model(0.01, 0.0).unwrap(), 200.0, 20, 3);
        let stats = run_ensemble(&spec).unwrap();
        assert_eq!(stats.exploded_fraction, 1.0);
        let (lo, hi) = (stats.blowup_times[0], *stats.blowup_times.last().unwrap());
        assert_eq!(lo, hi);
        // Oracle: the noiseless Euler map a += k a^2 dt, iterated to the threshold.
        let (mut a, mut steps) = (1.0f64, 0u32);
        while a <= 1e9 {
            a += 0.01 * a * a * 0.01;
            steps += 1;
        }
        assert!((lo - f64::from(steps) * 0.01).abs() < 1e-9, "{lo} vs {steps} steps");
        // Explicit Euler lags the exact blow-up at 100 by O(dt).
        assert!(lo > 100.0 && lo - 100.0 < 0.2, "{lo}");
    }

    #[test]
    fn single_path_stats_match_the_path() {
        let model = gbm_model(0.01, 1.0, 0.1).unwrap();
        let spec = EnsembleSpec::new(model.clone(), 10.0, 1, 99);
        let stats = run_ensemble(&spec).unwrap();
        let path = em_path(&model, 1.0, 0.01, 10.0, path_seed(99, 0), &EmOptions::default()).unwrap();
        assert_eq!(stats.paths, vec![PathSummary::of(0, &path)]);
        assert_eq!(stats.terminal_values, vec![path.terminal_value().unwrap()]);
        assert_eq!(stats.slope_mean, Some(pathwise_growth_slope(&path).unwrap()));
        assert_eq!(stats.survived_fraction, 1.0);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let spec = EnsembleSpec::new(hyperbolic_sde_model(0.05, 0.05).unwrap(), 50.0, 64, 11);
        let a = run_ensemble_with(&spec, Execution::Serial).unwrap();
        let b = run_ensemble_with(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fractions_and_quantiles_are_consistent() {
        let spec = EnsembleSpec::new(hyperbolic_sde_model(0.05, 0.05).unwrap(), 60.0, 200, 5);
        let s = run_ensemble(&spec).unwrap();
        let total = s.exploded_fraction + s.absorbed_fraction + s.survived_fraction;
        assert!((total - 1.0).abs() < 1e-12);
        if let Some(q) = s.blowup_quantiles {
            assert!(q.p05 <= q.p25 && q.p25 <= q.p50 && q.p50 <= q.p75 && q.p75 <= q.p95);
        }
        assert!(s.blowup_times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn slope_examples() {
        let flat = PathResult {
            times: (0..20).map(f64::from).collect(),
            values: vec![3.0; 20],
            outcome: PathOutcome::Survived,
            seed: 0,
        };
        assert_eq!(pathwise_growth_slope(&flat).unwrap(), 0.0);

        let det = gbm_model(0.462, 1.0, 0.0).unwrap();
        let path = em_path(
            &det,
            1.0,
            0.001,
            10.0,
            0,
            &EmOptions {
                threshold: f64::MAX,
                record_stride: 100,
            },
        )
        .unwrap();
        // Euler steps grow by exactly (1 + 0.462 dt) each.
        let expected = (1.0f64 + 0.462 * 0.001).ln() / 0.001;
        assert!((pathwise_growth_slope(&path).unwrap() - expected).abs() < 1e-9);

        let short = PathResult {
            times: vec![0.0, 1.0],
            values: vec![1.0, 2.0],
            ..flat
        };
        assert!(matches!(pathwise_growth_slope(&short), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn zero_noise_paths_are_flagged() {
        let template = MaskingTemplate {
            n_paths: 4,
            ..Default::default()
        };
        let rows = volatility_masking_scan(0.01, &[0.0], &template).unwrap();
        assert_eq!(rows[0].flagged_fraction, 1.0);
        assert_eq!(rows[0].evaluated, 4);
        assert!(volatility_masking_scan(0.01, &[0.1, 0.0], &template).is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut spec = EnsembleSpec::new(hyperbolic_sde_model(0.05, 0.05).unwrap(), 10.0, 0, 1);
        assert!(run_ensemble(&spec).is_err());
        spec.n_paths = 1;
        spec.dt = 0.0;
        assert!(run_ensemble(&spec).is_err());
    }
}
