use blowup_core::analysis::{compose_phases, PhaseOptions};
use blowup_core::ensemble::{map_paths, EnsembleSpec, Execution};
use blowup_core::model::{
    calibrate_k, exp_phase_solution, hyperbolic_blowup_time, hyperbolic_solution, phase1_duration,
    total_singularity_time, ScenarioParams,
};
use blowup_core::sde::{hyperbolic_sde_model, EmOptions, PathOutcome};
use blowup_core::GrowthLaw;
use clap::{Args, ValueEnum};
use serde::Serialize;

use super::uniform_grid;
use crate::error::{CliError, CliResult};
use crate::output::{Sink, Table};
use crate::params::ModelFlags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Exponential phase, linear and log columns
    Fig1,
    /// Hyperbolic phase up to just before the singularity
    Fig2,
    /// Stochastic hyperbolic paths for (k, sigma) = (0.05, 0.05) and (0.01, 0.1)
    Fig3,
    /// Phase durations, calibrated k and singularity time
    Headline,
    /// Everything (needs --out)
    All,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Only R and I are used, for the deterministic targets
    #[command(flatten)]
    pub params: ModelFlags,
    /// Samples per deterministic series
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Paths per fig3 setting
    #[arg(long, default_value_t = 10)]
    pub paths: usize,
}

/// The two stochastic settings of the third figure: (k, sigma).
pub const FIG3_SETTINGS: [(f64, f64); 2] = [(0.05, 0.05), (0.01, 0.1)];
const FIG3_PERIODS: f64 = 200.0;
const FIG3_DT: f64 = 0.01;
/// One recorded sample per period.
const FIG3_STRIDE: usize = 100;
/// fig2 stops where the remaining time is this fraction of `t_star`.
const FIG2_GAP: f64 = 1e-4;

#[derive(Debug, Serialize)]
struct Formulas {
    k: &'static str,
    t1: &'static str,
    t2: &'static str,
    t_s: &'static str,
    t_s_numerical: &'static str,
}

#[derive(Debug, Serialize)]
struct Headline {
    #[serde(rename = "R")]
    growth_factor: f64,
    #[serde(rename = "I")]
    intelligence: f64,
    k: f64,
    t1: f64,
    t2: f64,
    t_s: f64,
    t_s_numerical: Option<f64>,
    formula: Formulas,
}

fn headline(p: &ScenarioParams) -> CliResult<Headline> {
    let k = calibrate_k(p.growth_factor, p.intelligence)?;
    let t2 = hyperbolic_blowup_time(k, p.intelligence)?
        .t_star()
        .expect("hyperbolic blow-up is finite");
    let plan = compose_phases(
        p.growth_factor,
        p.intelligence,
        &GrowthLaw::power(k, 2.0),
        &PhaseOptions::default(),
    )?;
    Ok(Headline {
        growth_factor: p.growth_factor,
        intelligence: p.intelligence,
        k,
        t1: phase1_duration(p.growth_factor, p.intelligence)?,
        t2,
        t_s: total_singularity_time(p.growth_factor, p.intelligence)?,
        t_s_numerical: plan.total_blowup_time,
        formula: Formulas {
            k: "k = ln(R) / I",
            t1: "t1 = ln(I) / ln(R), exponential phase dA = k I A dt from A = 1 to A = I",
            t2: "t2 = 1 / (k I) = 1 / ln(R), hyperbolic phase dA = k A^2 dt from A = I",
            t_s: "t_s = t1 + t2 = (ln(I) + 1) / ln(R)",
            t_s_numerical: "t1 plus the integrated blow-up time of dA = k A^2 dt from A = I",
        },
    })
}

fn fig1(p: &ScenarioParams, samples: usize) -> CliResult<Table> {
    let t1 = phase1_duration(p.growth_factor, p.intelligence)?;
    let params = ScenarioParams { c: 1.0, ..*p };
    let mut table = Table::new(["t", "A", "ln_A"]);
    for t in uniform_grid(t1, samples) {
        let a = exp_phase_solution(&params, t)?;
        table.push(vec![t.into(), a.into(), a.ln().into()]);
    }
    Ok(table)
}

/// Remaining time shrinks geometrically towards `t_star`, so `ln_A` is
/// evenly spaced.
fn fig2(p: &ScenarioParams, samples: usize) -> CliResult<Table> {
    let t_star = hyperbolic_blowup_time(p.k, p.intelligence)?
        .t_star()
        .expect("hyperbolic blow-up is finite");
    let mut table = Table::new(["t", "A", "ln_A"]);
    for s in uniform_grid(1.0, samples) {
        let t = t_star * (1.0 - FIG2_GAP.powf(s));
        let a = hyperbolic_solution(p.k, p.intelligence, t)?;
        table.push(vec![t.into(), a.into(), a.ln().into()]);
    }
    Ok(table)
}

fn fig3(seed: u64, paths: usize) -> CliResult<Table> {
    let mut table = Table::new(["setting", "k", "sigma", "path", "seed", "outcome", "t", "A", "ln_A"]);
    for (setting, &(k, sigma)) in FIG3_SETTINGS.iter().enumerate() {
        let spec = EnsembleSpec {
            em: EmOptions {
                record_stride: FIG3_STRIDE,
                ..Default::default()
            },
            dt: FIG3_DT,
            ..EnsembleSpec::new(hyperbolic_sde_model(k, sigma)?, FIG3_PERIODS, paths, seed)
        };
        let results = map_paths(&spec, Execution::Parallel, |i, path| (i, path))?;
        for (i, path) in results {
            let outcome = match path.outcome {
                PathOutcome::Survived => "survived",
                PathOutcome::Exploded { .. } => "exploded",
                PathOutcome::Absorbed { .. } => "absorbed",
            };
            for (t, a) in path.times.iter().zip(&path.values) {
                table.push(vec![
                    (setting + 1).into(),
                    k.into(),
                    sigma.into(),
                    i.into(),
                    path.seed.into(),
                    outcome.into(),
                    (*t).into(),
                    (*a).into(),
                    a.ln().into(),
                ]);
            }
        }
    }
    Ok(table)
}

pub fn run(args: &ReproduceArgs, seed: u64, has_out: bool, sink: &mut Sink) -> CliResult {
    if args.samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    let flags = ModelFlags {
        k: None,
        ..args.params.clone()
    };
    let p = flags.scenario()?;
    let one = |t: Target| args.target == t || args.target == Target::All;
    if args.target == Target::All && !has_out {
        return Err(CliError::usage("`reproduce all` writes several files; give --out DIR"));
    }
    if one(Target::Headline) {
        sink.json("headline", &headline(&p)?, true)?;
    }
    if one(Target::Fig1) {
        sink.table("fig1", &fig1(&p, args.samples)?, true)?;
    }
    if one(Target::Fig2) {
        sink.table("fig2", &fig2(&p, args.samples)?, true)?;
    }
    if one(Target::Fig3) {
        sink.table("fig3", &fig3(seed, args.paths)?, true)?;
    }
    Ok(())
}
