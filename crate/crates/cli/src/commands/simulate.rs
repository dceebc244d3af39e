use std::collections::BTreeMap;

use blowup_core::dsl::{parse, Parsed, SystemSpec};
use blowup_core::ode::{integrate, BlowUpEvent, IntegrationOptions, TrajectoryEnd};
use clap::{Args, ValueEnum};
use serde::Serialize;

use super::uniform_grid;
use crate::error::{CliError, CliResult};
use crate::output::{Sink, Table};
use crate::params::{parse_assignments, DslSource, ModelFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinModel {
    /// dA = k I A
    Exponential,
    /// dA = k A^2
    Hyperbolic,
    /// dA = k A^n
    Powerlaw,
    /// dA = k ln(A) A
    Loglaw,
    /// dY = k1 Y A; dA = k2 Y A
    Coupled,
}

impl BuiltinModel {
    fn text(self) -> &'static str {
        match self {
            BuiltinModel::Exponential => "dA = k*I*A",
            BuiltinModel::Hyperbolic => "dA = k*A^2",
            BuiltinModel::Powerlaw => "dA = k*A^n",
            BuiltinModel::Loglaw => "dA = k*ln(A)*A",
            BuiltinModel::Coupled => "dY = k1*Y*A; dA = k2*Y*A",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in model (alternative to --dsl / --dsl-file)
    #[arg(long, value_enum, conflicts_with_all = ["dsl", "dsl_file"])]
    pub model: Option<BuiltinModel>,
    #[command(flatten)]
    pub source: DslSource,
    #[command(flatten)]
    pub params: ModelFlags,
    /// Initial values VAR=VALUE, comma separated (A defaults to --A0, else 1)
    #[arg(long, value_delimiter = ',')]
    pub init: Vec<String>,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    /// Sample on this many evenly spaced times instead of every accepted step
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Level that triggers blow-up refinement
    #[arg(long, default_value_t = 1e9)]
    pub threshold: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    model: String,
    variables: Vec<String>,
    parameters: &'a BTreeMap<String, f64>,
    initial: Vec<f64>,
    t_max: f64,
    samples: usize,
    t_last: f64,
    final_state: Vec<f64>,
    end: &'a TrajectoryEnd,
    blowup: Option<&'a BlowUpEvent>,
}

/// Model text as given, turning a bare expression into `dA = expr`.
pub(crate) fn load_system(text: &str) -> CliResult<SystemSpec> {
    Ok(match parse(text)? {
        Parsed::System(spec) => spec,
        Parsed::Expr(expr) => SystemSpec {
            equations: vec![("A".into(), expr)],
            ..Default::default()
        },
    })
}

pub fn run(args: &SimulateArgs, sink: &mut Sink) -> CliResult {
    let (text, mut spec) = match (args.model, args.source.text()?) {
        (Some(m), _) => {
            let mut spec = load_system(m.text())?;
            let p = args.params.scenario()?;
            for (name, v) in [
                ("k", p.k),
                ("I", p.intelligence),
                ("n", p.n_exp),
                ("k1", p.k1),
                ("k2", p.k2),
            ] {
                spec.parameters.insert(name.into(), v);
            }
            spec.initial.insert("Y".into(), p.y0);
            (m.text().to_string(), spec)
        }
        (None, Some(text)) => {
            let spec = load_system(&text)?;
            (text, spec)
        }
        (None, None) => return Err(CliError::usage("give a model with --model, --dsl or --dsl-file")),
    };
    spec.parameters.extend(args.params.bindings());
    spec.parameters.extend(args.source.bindings()?);

    let vars = spec.variables();
    if vars.iter().any(|v| v == "A") {
        spec.initial.entry("A".into()).or_insert(1.0);
        if let Some(a0) = args.params.a0 {
            spec.initial.insert("A".into(), a0);
        }
    }
    if let Some(y0) = args.params.y0 {
        if vars.iter().any(|v| v == "Y") {
            spec.initial.insert("Y".into(), y0);
        }
    }
    for (var, v) in parse_assignments(&args.init, "--init")? {
        if !vars.contains(&var) {
            return Err(CliError::usage(format!(
                "--init names `{var}`, which has no rate equation"
            )));
        }
        spec.initial.insert(var, v);
    }

    let state0 = spec.initial_state()?;
    let field = spec.to_field()?;
    let mut opts = IntegrationOptions::default().with_tolerances(args.rtol, args.atol);
    opts.blowup_threshold = args.threshold;
    if let Some(n) = args.steps {
        if n < 2 {
            return Err(CliError::usage("--steps must be at least 2"));
        }
        opts.output_times = Some(uniform_grid(args.t_max, n).into_iter().skip(1).collect());
    }
    let traj = integrate(&field, &state0, args.t_max, &opts)?;

    let mut table = Table::new(std::iter::once("t".to_string()).chain(vars.iter().cloned()));
    for (t, state) in traj.times.iter().zip(&traj.states) {
        table.push(
            std::iter::once(*t)
                .chain(state.iter().copied())
                .map(Into::into)
                .collect(),
        );
    }
    let summary = Summary {
        model: text.trim().to_string(),
        variables: vars,
        parameters: &spec.parameters,
        initial: state0,
        t_max: args.t_max,
        samples: traj.len(),
        t_last: *traj.times.last().expect("trajectory starts with the initial state"),
        final_state: traj.last_state().to_vec(),
        end: &traj.end,
        blowup: traj.blowup(),
    };
    sink.json("summary", &summary, true)?;
    sink.table("trajectory", &table, false)
}
