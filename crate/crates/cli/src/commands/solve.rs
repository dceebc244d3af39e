use blowup_core::model::{
    coupled_gdp_solution, exp_phase_solution, hyperbolic_blowup_time, hyperbolic_solution, loglaw_solution,
    powerlaw_blowup_time, powerlaw_solution,
};
use blowup_core::Error;
use clap::{Args, ValueEnum};

use super::uniform_grid;
use crate::error::{CliError, CliResult};
use crate::output::{Sink, Table};
use crate::params::ModelFlags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedForm {
    /// A = c exp(k I t), from A = c
    Exponential,
    /// A = I / (1 - k I t), from A = I
    Hyperbolic,
    /// dA = k A^n dt, from A = I
    Powerlaw,
    /// A = exp(exp(c + k t))
    Loglaw,
    /// dY = k1 Y A, dA = k2 Y A with A(0) = 1, Y(0) = k1 / k2
    Coupled,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub model: ClosedForm,
    /// End of the time grid
    #[arg(long)]
    pub t_max: f64,
    /// Number of grid points, including t = 0 and t = t-max
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub params: ModelFlags,
}

pub fn run(args: &SolveArgs, sink: &mut Sink) -> CliResult {
    if !(args.t_max > 0.0 && args.t_max.is_finite()) {
        return Err(CliError::usage(format!("--t-max must be positive, got {}", args.t_max)));
    }
    if args.steps < 2 {
        return Err(CliError::usage("--steps must be at least 2"));
    }
    let p = args.params.scenario()?;
    let t_star = match args.model {
        ClosedForm::Hyperbolic => hyperbolic_blowup_time(p.k, p.intelligence)?.t_star(),
        ClosedForm::Powerlaw => powerlaw_blowup_time(p.k, p.intelligence, p.n_exp)?.t_star(),
        ClosedForm::Coupled => Some(1.0 / p.k1),
        _ => None,
    };
    if let Some(t_star) = t_star {
        if args.t_max >= t_star {
            return Err(Error::BeyondBlowUp { t: args.t_max, t_star }.into());
        }
    }

    let columns: &[&str] = if args.model == ClosedForm::Coupled {
        &["t", "Y", "A"]
    } else {
        &["t", "A"]
    };
    let mut table = Table::new(columns.iter().copied());
    for t in uniform_grid(args.t_max, args.steps) {
        let a = match args.model {
            ClosedForm::Exponential => exp_phase_solution(&p, t)?,
            ClosedForm::Hyperbolic => hyperbolic_solution(p.k, p.intelligence, t)?,
            ClosedForm::Powerlaw => powerlaw_solution(p.k, p.intelligence, p.n_exp, t)?,
            ClosedForm::Loglaw => loglaw_solution(p.c, p.k, t)?,
            ClosedForm::Coupled => coupled_gdp_solution(p.k1, t)?,
        };
        if args.model == ClosedForm::Coupled {
            table.push(vec![t.into(), (p.k1 / p.k2 * a).into(), a.into()]);
        } else {
            table.push(vec![t.into(), a.into()]);
        }
    }
    sink.table("solution", &table, true)
}
