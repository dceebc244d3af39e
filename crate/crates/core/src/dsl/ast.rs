use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Ln,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ln" => Some(Func::Ln),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

/// Expression tree. Literals are always non-negative; a leading minus is a
/// [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Name(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Binding strength used by the printer; mirrors the grammar levels.
const SUM: u8 = 1;
const TERM: u8 = 2;
const FACTOR: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn name(s: impl Into<String>) -> Self {
        Expr::Name(s.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Every identifier referenced by the expression.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Name(n) => {
                out.insert(n.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_names(out),
            Expr::Binary(_, l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
        }
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Name(_) | Expr::Call(..) => ATOM,
            Expr::Neg(_) => FACTOR,
            Expr::Binary(BinOp::Pow, ..) => POWER,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => TERM,
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.write_at(f, SUM)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Name(n) => f.write_str(n),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_at(f, POWER)
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.write_at(f, SUM)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (SUM, TERM),
                    BinOp::Mul | BinOp::Div => (TERM, FACTOR),
                    BinOp::Pow => (ATOM, FACTOR),
                };
                l.write_at(f, lmin)?;
                if *op == BinOp::Pow {
                    f.write_str("^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                r.write_at(f, rmin)
            }
        }
    }
}

/// Prints with the fewest parentheses that parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, SUM)
    }
}
