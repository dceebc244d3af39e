use std::collections::BTreeMap;
use std::path::PathBuf;

use blowup_core::model::{calibrate_k, ScenarioParams};
use clap::Args;

use crate::error::{CliError, CliResult};

/// Scenario parameters; any flag left out keeps its default.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// Growth coefficient (defaults to ln(R) / I)
    #[arg(long)]
    pub k: Option<f64>,
    /// Engineer-to-machine intelligence ratio
    #[arg(long = "I")]
    pub intelligence: Option<f64>,
    /// Yearly growth factor of the exponential phase
    #[arg(long = "R")]
    pub growth_factor: Option<f64>,
    /// Power-law exponent
    #[arg(long)]
    pub n: Option<f64>,
    /// Volatility
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Integration constant (exponential prefactor, log-law offset)
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    /// Initial level
    #[arg(long = "A0")]
    pub a0: Option<f64>,
    /// Initial output of the coupled system
    #[arg(long = "Y0")]
    pub y0: Option<f64>,
}

impl ModelFlags {
    pub fn scenario(&self) -> CliResult<ScenarioParams> {
        let d = ScenarioParams::default();
        let intelligence = self.intelligence.unwrap_or(d.intelligence);
        let growth_factor = self.growth_factor.unwrap_or(d.growth_factor);
        let k = match self.k {
            Some(k) => k,
            None => calibrate_k(growth_factor, intelligence)?,
        };
        Ok(ScenarioParams {
            k,
            intelligence,
            growth_factor,
            n_exp: self.n.unwrap_or(d.n_exp),
            sigma: self.sigma.unwrap_or(d.sigma),
            c: self.c.unwrap_or(d.c),
            k1: self.k1.unwrap_or(d.k1),
            k2: self.k2.unwrap_or(d.k2),
            a0: self.a0.unwrap_or(d.a0),
            y0: self.y0.unwrap_or(d.y0),
        })
    }

    /// Flags given explicitly, as DSL parameter bindings.
    pub fn bindings(&self) -> BTreeMap<String, f64> {
        [
            ("k", self.k),
            ("I", self.intelligence),
            ("R", self.growth_factor),
            ("n", self.n),
            ("sigma", self.sigma),
            ("c", self.c),
            ("k1", self.k1),
            ("k2", self.k2),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.map(|v| (name.to_string(), v)))
        .collect()
    }
}

/// Text model source.
#[derive(Debug, Clone, Default, Args)]
pub struct DslSource {
    /// Model text, e.g. "dA = k*A^2"
    #[arg(long, conflicts_with = "dsl_file")]
    pub dsl: Option<String>,
    /// File holding the model text
    #[arg(long)]
    pub dsl_file: Option<PathBuf>,
    /// Parameter binding NAME=VALUE (repeatable, or comma separated)
    #[arg(long = "param", value_delimiter = ',')]
    pub params: Vec<String>,
}

impl DslSource {
    pub fn text(&self) -> CliResult<Option<String>> {
        match (&self.dsl, &self.dsl_file) {
            (Some(s), _) => Ok(Some(s.clone())),
            (None, Some(path)) => Ok(Some(std::fs::read_to_string(path)?)),
            (None, None) => Ok(None),
        }
    }

    pub fn bindings(&self) -> CliResult<BTreeMap<String, f64>> {
        parse_assignments(&self.params, "--param")
    }
}

/// Parses `NAME=VALUE` pairs.
pub fn parse_assignments(items: &[String], flag: &str) -> CliResult<BTreeMap<String, f64>> {
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("{flag} expects NAME=VALUE, got '{item}'")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{flag}: '{value}' is not a number")))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}
