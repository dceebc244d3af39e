use std::collections::BTreeMap;

use blowup_core::dsl::{parse_expr, Compiled};
use blowup_core::ensemble::{run_ensemble_with, EnsembleSpec, EnsembleStats, Execution, Quantiles};
use blowup_core::sde::{gbm_model, hyperbolic_sde_model, EmOptions, PathOutcome, StochasticModel};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Sink, Table};
use crate::params::{parse_assignments, ModelFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdeModel {
    /// dA = k A^2 dt + sigma A^2 dW
    HyperbolicSde,
    /// dA = k I A dt + sigma I A dW
    Gbm,
    /// Coefficients given by --drift and --diffusion
    Custom,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, default_value = "hyperbolic-sde")]
    pub model: SdeModel,
    #[command(flatten)]
    pub params: ModelFlags,
    /// Drift a(A) of the custom model, e.g. "k*A^2"
    #[arg(long, requires = "diffusion")]
    pub drift: Option<String>,
    /// Diffusion b(A) of the custom model, e.g. "sigma*A^2"
    #[arg(long, requires = "drift")]
    pub diffusion: Option<String>,
    /// Parameter binding NAME=VALUE for the custom coefficients
    #[arg(long = "param", value_delimiter = ',')]
    pub extra: Vec<String>,
    /// Simulated horizon
    #[arg(long, default_value_t = 200.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Level counted as an explosion
    #[arg(long, default_value_t = 1e9)]
    pub threshold: f64,
    /// Run paths on one thread (results are identical)
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    model: SdeModel,
    k: f64,
    #[serde(rename = "I", skip_serializing_if = "Option::is_none")]
    intelligence: Option<f64>,
    sigma: f64,
    #[serde(rename = "A0")]
    a0: f64,
    dt: f64,
    periods: f64,
    threshold: f64,
    master_seed: u64,
    n_paths: usize,
    exploded_fraction: f64,
    absorbed_fraction: f64,
    survived_fraction: f64,
    blowup_quantiles: Option<Quantiles>,
    blowup_iqr: Option<f64>,
    slope_mean: Option<f64>,
    slope_std: Option<f64>,
    blowup_times: &'a [f64],
}

/// A coefficient that fails to evaluate yields NaN, which ends the path
/// as exploded.
fn coefficient(text: &str, params: &BTreeMap<String, f64>) -> CliResult<impl Fn(f64) -> f64 + Send + Sync> {
    let compiled = Compiled::compile(&parse_expr(text)?, params, &["A".to_string()])?;
    Ok(move |a: f64| compiled.eval(&[a]).unwrap_or(f64::NAN))
}

fn custom_model(args: &EnsembleArgs) -> CliResult<StochasticModel> {
    let (Some(drift), Some(diffusion)) = (&args.drift, &args.diffusion) else {
        return Err(CliError::usage("--model custom needs --drift and --diffusion"));
    };
    let mut params = args.params.bindings();
    params.extend(parse_assignments(&args.extra, "--param")?);
    Ok(StochasticModel::custom(
        coefficient(drift, &params)?,
        coefficient(diffusion, &params)?,
    ))
}

pub fn run(args: &EnsembleArgs, seed: u64, sink: &mut Sink) -> CliResult {
    let p = args.params.scenario()?;
    if args.drift.is_some() && args.model != SdeModel::Custom {
        return Err(CliError::usage("--drift and --diffusion need --model custom"));
    }
    let model = match args.model {
        SdeModel::HyperbolicSde => hyperbolic_sde_model(p.k, p.sigma)?,
        SdeModel::Gbm => gbm_model(p.k, p.intelligence, p.sigma)?,
        SdeModel::Custom => custom_model(args)?,
    };
    let spec = EnsembleSpec {
        model,
        a0: p.a0,
        dt: args.dt,
        t_end: args.periods,
        n_paths: args.paths,
        master_seed: seed,
        em: EmOptions {
            threshold: args.threshold,
            ..Default::default()
        },
    };
    let exec = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let stats: EnsembleStats = run_ensemble_with(&spec, exec)?;

    let report = Report {
        model: args.model,
        k: p.k,
        intelligence: (args.model == SdeModel::Gbm).then_some(p.intelligence),
        sigma: p.sigma,
        a0: p.a0,
        dt: args.dt,
        periods: args.periods,
        threshold: args.threshold,
        master_seed: seed,
        n_paths: stats.n_paths,
        exploded_fraction: stats.exploded_fraction,
        absorbed_fraction: stats.absorbed_fraction,
        survived_fraction: stats.survived_fraction,
        blowup_quantiles: stats.blowup_quantiles,
        blowup_iqr: stats.blowup_quantiles.map(|q| q.iqr()),
        slope_mean: stats.slope_mean,
        slope_std: stats.slope_std,
        blowup_times: &stats.blowup_times,
    };
    sink.json("stats", &report, true)?;

    let mut table = Table::new(["path", "seed", "outcome", "t_event", "terminal_value", "slope"]);
    for s in &stats.paths {
        let (outcome, t_event) = match s.outcome {
            PathOutcome::Survived => ("survived", Cell::Empty),
            PathOutcome::Exploded { t } => ("exploded", t.into()),
            PathOutcome::Absorbed { t } => ("absorbed", t.into()),
        };
        table.push(vec![
            s.index.into(),
            s.seed.into(),
            outcome.into(),
            t_event,
            s.terminal_value.into(),
            s.slope.map_or(Cell::Empty, Cell::Num),
        ]);
    }
    sink.table("paths", &table, false)
}
