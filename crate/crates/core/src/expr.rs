//! Density expressions: lexer, recursive-descent parser, evaluator.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expression = term , { ( "+" | "-" ) , term } ;
//! term       = power , { ( "*" | "/" ) , power } ;
//! power      = unary , [ "^" , power ] ;          (* right-associative *)
//! unary      = "-" , unary | primary ;           (* -x^2 is (-x)^2 *)
//! primary    = number
//!            | "x" | "pi" | "e" | parameter
//!            | function , "(" , expression , ")"
//!            | "(" , expression , ")" ;
//! function   = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs" ;
//! number     = digit , { digit } , [ "." , { digit } ] , [ exponent ]
//!            | "." , digit , { digit } , [ exponent ] ;
//! exponent   = ( "e" | "E" ) , [ "+" | "-" ] , digit , { digit } ;
//! ```
//!
//! Parameters are identifiers declared up front via [`parse_with_params`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("parameter '{0}' has no value")]
    UnboundParameter(String),
    #[error("non-finite result at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }

    /// Value, first and second derivative at `v`.
    fn jet(self, v: f64) -> (f64, f64, f64) {
        match self {
            Func::Sin => (v.sin(), v.cos(), -v.sin()),
            Func::Cos => (v.cos(), -v.sin(), -v.cos()),
            Func::Tan => {
                let t = v.tan();
                let s = 1.0 + t * t;
                (t, s, 2.0 * t * s)
            }
            Func::Exp => {
                let e = v.exp();
                (e, e, e)
            }
            Func::Log => (v.ln(), 1.0 / v, -1.0 / (v * v)),
            Func::Sqrt => {
                let s = v.sqrt();
                (s, 0.5 / s, -0.25 / (s * v))
            }
            Func::Abs => (v.abs(), v.signum(), 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    X,
    Pi,
    E,
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// Integer exponent of a literal (possibly negated), if it has one.
fn integer_exponent(e: &Expr) -> Option<i32> {
    match e {
        Expr::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Some(*v as i32),
        Expr::Neg(inner) => integer_exponent(inner).map(|n| -n),
        _ => None,
    }
}

impl Expr {
    /// Evaluates at `x`; parameters are looked up in `params`.
    pub fn eval(&self, x: f64, params: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
        let v = self.eval_raw(x, &|name| params.get(name).copied())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite(x))
        }
    }

    fn eval_raw(&self, x: f64, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Param(p) => lookup(p).ok_or_else(|| ExprError::UnboundParameter(p.clone()))?,
            Expr::Neg(e) => -e.eval_raw(x, lookup)?,
            Expr::Call(func, e) => func.apply(e.eval_raw(x, lookup)?),
            Expr::Bin(op, l, r) => {
                let lv = l.eval_raw(x, lookup)?;
                if *op == BinOp::Pow {
                    if let Some(n) = integer_exponent(r) {
                        return Ok(lv.powi(n));
                    }
                }
                let rv = r.eval_raw(x, lookup)?;
                match op {
                    BinOp::Add => lv + rv,
                    BinOp::Sub => lv - rv,
                    BinOp::Mul => lv * rv,
                    BinOp::Div => lv / rv,
                    BinOp::Pow => lv.powf(rv),
                }
            }
        })
    }

    /// Replaces parameter references by their values.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Expr, ExprError> {
        Ok(match self {
            Expr::Param(p) => Expr::Num(
                *params
                    .get(p)
                    .ok_or_else(|| ExprError::UnboundParameter(p.clone()))?,
            ),
            Expr::Neg(e) => Expr::Neg(Box::new(e.bind(params)?)),
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.bind(params)?)),
            Expr::Bin(op, l, r) => {
                Expr::Bin(*op, Box::new(l.bind(params)?), Box::new(r.bind(params)?))
            }
            other => other.clone(),
        })
    }

    /// Names of all parameters referenced.
    pub fn parameters(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(p) => {
                    if !out.contains(p) {
                        out.push(p.clone())
                    }
                }
                Expr::Neg(e) | Expr::Call(_, e) => walk(e, out),
                Expr::Bin(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Value with first and second x-derivatives; parameters must be bound.
    pub fn eval_jet(&self, x: f64) -> Result<Jet2, ExprError> {
        Ok(match self {
            Expr::Num(v) => Jet2::constant(*v),
            Expr::X => Jet2::variable(x),
            Expr::Pi => Jet2::constant(std::f64::consts::PI),
            Expr::E => Jet2::constant(std::f64::consts::E),
            Expr::Param(p) => return Err(ExprError::UnboundParameter(p.clone())),
            Expr::Neg(e) => -e.eval_jet(x)?,
            Expr::Call(func, e) => e.eval_jet(x)?.compose(*func),
            Expr::Bin(op, l, r) => {
                let lv = l.eval_jet(x)?;
                if *op == BinOp::Pow {
                    if let Some(n) = integer_exponent(r) {
                        return Ok(lv.powi(n));
                    }
                }
                let rv = r.eval_jet(x)?;
                match op {
                    BinOp::Add => lv + rv,
                    BinOp::Sub => lv - rv,
                    BinOp::Mul => lv * rv,
                    BinOp::Div => lv / rv,
                    BinOp::Pow => (rv * lv.compose(Func::Log)).compose(Func::Exp),
                }
            }
        })
    }
}

/// Second-order forward-mode jet: value, d/dx, d²/dx².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, d1: 0.0, d2: 0.0 }
    }

    pub fn variable(x: f64) -> Self {
        Jet2 { v: x, d1: 1.0, d2: 0.0 }
    }

    fn compose(self, f: Func) -> Self {
        let (g, g1, g2) = f.jet(self.v);
        Jet2 {
            v: g,
            d1: g1 * self.d1,
            d2: g2 * self.d1 * self.d1 + g1 * self.d2,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let nf = n as f64;
                let p2 = self.v.powi(n - 2);
                let p1 = p2 * self.v;
                Jet2 {
                    v: p1 * self.v,
                    d1: nf * p1 * self.d1,
                    d2: nf * (nf - 1.0) * p2 * self.d1 * self.d1 + nf * p1 * self.d2,
                }
            }
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let q = self.v / o.v;
        let q1 = (self.d1 - q * o.d1) / o.v;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v;
        Jet2 { v: q, d1: q1, d2: q2 }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::End => "end of input".to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("malformed number '{s}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax {
                offset: i,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expression(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.power()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.peek() == &Tok::Sym('^') {
            self.bump();
            let exp = self.power()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == &Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expression()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != &Tok::Sym('(') {
                        return self.fail("'(' after function name");
                    }
                    self.bump();
                    let arg = self.expression()?;
                    self.close()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Pi),
                    "e" => Ok(Expr::E),
                    _ if self.params.contains(&name.as_str()) => Ok(Expr::Param(name)),
                    _ => Err(ExprError::UnknownIdentifier { offset: at, name }),
                }
            }
            _ => self.fail("number, identifier, '-' or '('"),
        }
    }

    fn close(&mut self) -> Result<(), ExprError> {
        if self.peek() == &Tok::Sym(')') {
            self.bump();
            Ok(())
        } else {
            self.fail("')'")
        }
    }
}

/// Parses an expression in `x` with no free parameters.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    parse_with_params(text, &[])
}

/// Parses an expression whose free identifiers may include `params`.
pub fn parse_with_params(text: &str, params: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        params,
    };
    let e = p.expression()?;
    if p.peek() != &Tok::End {
        return p.fail("operator or end of input");
    }
    Ok(e)
}

/// Evaluates `ast` at `x` with the given parameter values.
pub fn eval_ast(ast: &Expr, x: f64, params: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
    ast.eval(x, params)
}
