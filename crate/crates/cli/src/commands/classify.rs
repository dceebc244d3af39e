use blowup_core::analysis::{classify_growth_law, default_lower_limit, ClassifierOptions, ConvergenceVerdict};
use blowup_core::dsl::{parse, Parsed};
use blowup_core::GrowthLaw;
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::params::{DslSource, ModelFlags};

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Growth law F(A) as an expression in A, or a single equation `dA = ...`
    #[command(flatten)]
    pub source: DslSource,
    #[command(flatten)]
    pub params: ModelFlags,
    /// Decades of upper limits in the quadrature ladder
    #[arg(long, default_value_t = 8)]
    pub decades: u32,
}

#[derive(Debug, Serialize)]
struct Report {
    law: String,
    #[serde(flatten)]
    result: ConvergenceVerdict,
}

pub fn run(args: &ClassifyArgs, sink: &mut Sink) -> CliResult {
    let text = args
        .source
        .text()?
        .ok_or_else(|| CliError::usage("give the growth law with --dsl or --dsl-file"))?;
    let (expr, mut bound) = match parse(&text)? {
        Parsed::Expr(e) => (e, Default::default()),
        Parsed::System(spec) => match (spec.equations.as_slice(), spec.variables().as_slice()) {
            ([(_, e)], [v]) if v == "A" => (e.clone(), spec.parameters.clone()),
            _ => return Err(CliError::usage("classify takes one rate equation in A")),
        },
    };
    bound.extend(args.params.bindings());
    bound.extend(args.source.bindings()?);
    let law = GrowthLaw::from_expr(&expr, "A", &bound)?;
    let a0 = args.params.a0.unwrap_or_else(|| default_lower_limit(&law));
    let opts = ClassifierOptions {
        decades: args.decades,
        ..Default::default()
    };
    let result = classify_growth_law(&law, a0, &opts)?;
    sink.json(
        "verdict",
        &Report {
            law: law.label().to_string(),
            result,
        },
        true,
    )
}
