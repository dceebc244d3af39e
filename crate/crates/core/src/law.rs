use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::dsl::{Compiled, Expr};
use crate::error::{Error, Result};
use crate::ode::VectorField;

type RateFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// An autonomous scalar growth law `dA = F(A) dt`.
#[derive(Clone)]
pub struct GrowthLaw {
    label: String,
    rate: Arc<RateFn>,
}

impl fmt::Debug for GrowthLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthLaw").field("label", &self.label).finish()
    }
}

impl GrowthLaw {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            rate: Arc::new(move |a| Ok(f(a))),
        }
    }

    pub fn try_new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            rate: Arc::new(f),
        }
    }

    /// `F(A) = rate * A`.
    pub fn exponential(rate: f64) -> Self {
        Self::new(format!("{rate}*A"), move |a| rate * a)
    }

    /// `F(A) = k * A^n`.
    pub fn power(k: f64, n: f64) -> Self {
        Self::new(format!("{k}*A^{n}"), move |a| k * a.powf(n))
    }

    /// `F(A) = k * ln(A) * A`.
    pub fn log_law(k: f64) -> Self {
        Self::new(format!("{k}*ln(A)*A"), move |a| k * a.ln() * a)
    }

    /// Compiles an expression in the single state variable `var`.
    pub fn from_expr(expr: &Expr, var: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let compiled = Compiled::compile(expr, params, &[var.to_string()])?;
        let label = expr.to_string();
        Ok(Self::try_new(label, move |a| compiled.eval(&[a]).map_err(Error::from)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rate(&self, a: f64) -> Result<f64> {
        (self.rate)(a)
    }

    /// `c * F(A)`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = Arc::clone(&self.rate);
        Self::try_new(format!("{c}*({})", self.label), move |a| inner(a).map(|f| c * f))
    }
}

impl VectorField for GrowthLaw {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, state: &[f64], rate: &mut [f64]) -> Result<()> {
        rate[0] = self.rate(state[0])?;
        Ok(())
    }
}
