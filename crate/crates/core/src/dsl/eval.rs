use std::collections::BTreeMap;
use std::sync::Arc;

use super::ast::{BinOp, Expr, Func};
use super::DslError;

/// Evaluates `expr` with every name looked up in `bindings`.
pub fn evaluate(expr: &Expr, bindings: &BTreeMap<String, f64>) -> Result<f64, DslError> {
    Compiled::compile(expr, bindings, &[])?.eval(&[])
}

/// An expression with names resolved to constants or state slots.
#[derive(Debug, Clone)]
pub enum Compiled {
    Const(f64),
    Slot(usize),
    Neg(Box<Compiled>),
    Binary(BinOp, Box<Compiled>, Box<Compiled>, Arc<str>),
    Call(Func, Box<Compiled>, Arc<str>),
}

impl Compiled {
    /// Resolves names: state variables take precedence over parameters.
    pub fn compile(expr: &Expr, params: &BTreeMap<String, f64>, state_vars: &[String]) -> Result<Self, DslError> {
        Ok(match expr {
            Expr::Num(x) => Compiled::Const(*x),
            Expr::Name(n) => {
                if let Some(i) = state_vars.iter().position(|v| v == n) {
                    Compiled::Slot(i)
                } else if let Some(&v) = params.get(n) {
                    Compiled::Const(v)
                } else {
                    return Err(DslError::Unbound(n.clone()));
                }
            }
            Expr::Neg(e) => Compiled::Neg(Box::new(Self::compile(e, params, state_vars)?)),
            Expr::Binary(op, l, r) => Compiled::Binary(
                *op,
                Box::new(Self::compile(l, params, state_vars)?),
                Box::new(Self::compile(r, params, state_vars)?),
                expr.to_string().into(),
            ),
            Expr::Call(f, arg) => Compiled::Call(
                *f,
                Box::new(Self::compile(arg, params, state_vars)?),
                arg.to_string().into(),
            ),
        })
    }

    pub fn eval(&self, state: &[f64]) -> Result<f64, DslError> {
        Ok(match self {
            Compiled::Const(x) => *x,
            Compiled::Slot(i) => state[*i],
            Compiled::Neg(e) => -e.eval(state)?,
            Compiled::Binary(op, l, r, src) => {
                let a = l.eval(state)?;
                let b = r.eval(state)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(DslError::DivisionByZero { expr: src.to_string() });
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Compiled::Call(f, arg, src) => {
                let x = arg.eval(state)?;
                match f {
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(DslError::LogDomain {
                                arg: src.to_string(),
                                value: x,
                            });
                        }
                        x.ln()
                    }
                    Func::Exp => x.exp(),
                }
            }
        })
    }
}
