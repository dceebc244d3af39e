//! A small language for growth laws and rate systems.
//!
//! Expressions use `+ - * / ^`, unary minus, `ln(...)` and `exp(...)`.
//! `^` binds tightest and is right-associative, so `-A^2` is `-(A^2)` and
//! `2^3^2` is `2^(3^2)`. A system is a `;`-separated list of rate equations
//! `dX = expr`, one per state variable:
//!
//! ```
//! use blowup_core::dsl::{parse_system, SystemSpec};
//!
//! let spec = parse_system("dY = k1*Y*A; dA = k2*Y*A").unwrap()
//!     .with_parameter("k1", 0.05)
//!     .with_parameter("k2", 0.1);
//! assert_eq!(spec.variables(), ["Y", "A"]);
//! ```

mod ast;
mod eval;
mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::ode::VectorField;

pub use ast::{BinOp, Expr, Func};
pub use eval::{evaluate, Compiled};
pub use parser::{parse, parse_expr, parse_system, Parsed};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at line {line}, column {col} near `{token}`: {message}")]
    Syntax {
        line: usize,
        col: usize,
        token: String,
        message: String,
    },

    #[error("variable `{0}` has more than one rate equation")]
    DuplicateEquation(String),

    #[error("unbound name `{0}`")]
    Unbound(String),

    #[error("missing initial value for `{0}`")]
    MissingInitial(String),

    #[error("ln of non-positive value {value} in ln({arg})")]
    LogDomain { arg: String, value: f64 },

    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },

    #[error("in equation for d{var}: {source}")]
    InEquation { var: String, source: Box<DslError> },
}

/// Rate equations plus parameter and initial-value bindings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub equations: Vec<(String, Expr)>,
    pub parameters: BTreeMap<String, f64>,
    pub initial: BTreeMap<String, f64>,
}

impl SystemSpec {
    /// State variables in declaration order.
    pub fn variables(&self) -> Vec<String> {
        self.equations.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn with_initial(mut self, var: &str, value: f64) -> Self {
        self.initial.insert(var.to_string(), value);
        self
    }

    /// Checks that every name is a state variable or a bound parameter.
    pub fn validate(&self) -> Result<(), DslError> {
        let vars = self.variables();
        for (var, rate) in &self.equations {
            for name in rate.names() {
                if !vars.contains(&name) && !self.parameters.contains_key(&name) {
                    return Err(DslError::InEquation {
                        var: var.clone(),
                        source: Box::new(DslError::Unbound(name)),
                    });
                }
            }
        }
        Ok(())
    }

    /// Initial state in declaration order.
    pub fn initial_state(&self) -> Result<Vec<f64>, DslError> {
        self.variables()
            .into_iter()
            .map(|v| self.initial.get(&v).copied().ok_or(DslError::MissingInitial(v)))
            .collect()
    }

    pub fn to_field(&self) -> Result<DslField, DslError> {
        self.validate()?;
        let vars = self.variables();
        let rates = self
            .equations
            .iter()
            .map(|(v, e)| {
                Compiled::compile(e, &self.parameters, &vars).map_err(|err| DslError::InEquation {
                    var: v.clone(),
                    source: Box::new(err),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(DslField { vars, rates })
    }
}

/// Compiled rate system. Every rate reads the same pre-step state.
#[derive(Debug, Clone)]
pub struct DslField {
    vars: Vec<String>,
    rates: Vec<Compiled>,
}

impl DslField {
    pub fn variables(&self) -> &[String] {
        &self.vars
    }
}

impl VectorField for DslField {
    fn dim(&self) -> usize {
        self.vars.len()
    }

    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        for ((r, c), v) in rate.iter_mut().zip(&self.rates).zip(&self.vars) {
            *r = c.eval(state).map_err(|e| {
                Error::Dsl(DslError::InEquation {
                    var: v.clone(),
                    source: Box::new(e),
                })
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
