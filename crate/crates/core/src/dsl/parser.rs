//! Tokenizer and recursive-descent parser.
//!
//! ```text
//! system   := equation (";" equation)* ;
//! equation := "d" IDENT "=" expr ;
//! expr     := term (("+"|"-") term)* ;
//! term     := factor (("*"|"/") factor)* ;
//! factor   := ("-")? power ;
//! power    := atom ("^" factor)? ;
//! atom     := NUMBER | IDENT | func | "(" expr ")" ;
//! func     := ("ln"|"exp") "(" expr ")" ;
//! ```

use super::ast::{BinOp, Expr, Func};
use super::{DslError, SystemSpec};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let start_col = col;
        let tok = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Tok::Num(x),
                _ => {
                    return Err(DslError::Syntax {
                        line,
                        col: start_col,
                        token: text,
                        message: "malformed number".into(),
                    })
                }
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if "+-*/^()=;".contains(c) {
            i += 1;
            Tok::Op(c)
        } else {
            return Err(DslError::Syntax {
                line,
                col,
                token: c.to_string(),
                message: "unexpected character".into(),
            });
        };
        col += i - start;
        out.push(Token {
            tok,
            text: chars[start..i].iter().collect(),
            line,
            col: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        text: "end of input".into(),
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        let t = self.peek();
        DslError::Syntax {
            line: t.line,
            col: t.col,
            token: t.text.clone(),
            message: message.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek().tok == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), DslError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn expect_eof(&self) -> Result<(), DslError> {
        match self.peek().tok {
            Tok::Eof => Ok(()),
            _ => Err(self.error("unexpected trailing input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.power()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            Ok(Expr::binary(BinOp::Pow, base, exponent))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        match self.peek().tok.clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.bump();
                    if !self.eat('(') {
                        return Err(self.error(format!("`{name}` must be followed by `(`")));
                    }
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.bump();
                Ok(Expr::Name(name))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.error("expected a number, name, function or `(`")),
        }
    }

    fn equation(&mut self) -> Result<(String, Expr), DslError> {
        let var = match &self.peek().tok {
            Tok::Ident(s) if s.len() > 1 && s.starts_with('d') => {
                let v = &s[1..];
                if v.starts_with(|c: char| c.is_ascii_digit()) {
                    return Err(self.error("state variable names cannot start with a digit"));
                }
                v.to_string()
            }
            _ => return Err(self.error("expected a rate equation `dX = ...`")),
        };
        self.bump();
        self.expect('=')?;
        Ok((var, self.expr()?))
    }

    fn system(&mut self) -> Result<SystemSpec, DslError> {
        let mut spec = SystemSpec::default();
        loop {
            let (var, rate) = self.equation()?;
            if spec.equations.iter().any(|(v, _)| *v == var) {
                return Err(DslError::DuplicateEquation(var));
            }
            spec.equations.push((var, rate));
            if !self.eat(';') {
                break;
            }
        }
        self.expect_eof()?;
        Ok(spec)
    }
}

/// Result of [`parse`]: either a system of rate equations or a bare
/// expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    System(SystemSpec),
    Expr(Expr),
}

/// Parses a system when the text starts with `dX =`, an expression otherwise.
pub fn parse(text: &str) -> Result<Parsed, DslError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let is_system = matches!(p.peek().tok, Tok::Ident(_)) && p.peek_at(1).tok == Tok::Op('=');
    if is_system {
        p.system().map(Parsed::System)
    } else {
        let e = p.expr()?;
        p.expect_eof()?;
        Ok(Parsed::Expr(e))
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_system(text: &str) -> Result<SystemSpec, DslError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    p.system()
}
