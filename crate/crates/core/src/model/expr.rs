//! Entry expressions over the parameters and their parser.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ['-'] atom ['^' uint]
//! atom   := number | ident | '(' expr ')'
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{exact_decimal, Interval, Rounding};
use crate::raf::{MulMode, RevisedAffineForm};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    /// Literal, widened outward when its decimal is not representable.
    Const(Interval),
    /// Parameter with a 1-based index.
    Param(usize),
    Neg(Box<ParamExpr>),
    Add(Box<ParamExpr>, Box<ParamExpr>),
    Sub(Box<ParamExpr>, Box<ParamExpr>),
    Mul(Box<ParamExpr>, Box<ParamExpr>),
    Div(Box<ParamExpr>, Box<ParamExpr>),
    Pow(Box<ParamExpr>, u32),
}

use ParamExpr::*;

impl ParamExpr {
    pub fn constant(c: f64) -> Self {
        Const(Interval::point(c))
    }

    pub fn param(k: usize) -> Self {
        Param(k)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Const(c) if c.lo() == 0.0 && c.hi() == 0.0)
    }

    /// Sum that drops literal zeros.
    pub fn add(a: ParamExpr, b: ParamExpr) -> Self {
        match (a.is_zero(), b.is_zero()) {
            (true, _) => b,
            (_, true) => a,
            _ => Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: ParamExpr, b: ParamExpr) -> Self {
        match (a.is_zero(), b.is_zero()) {
            (_, true) => a,
            (true, _) => Self::neg(b),
            _ => Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: ParamExpr, b: ParamExpr) -> Self {
        if a.is_zero() || b.is_zero() {
            return Self::zero();
        }
        Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: ParamExpr, b: ParamExpr) -> Self {
        Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: ParamExpr) -> Self {
        match a {
            Const(c) => Const(-c),
            Neg(inner) => *inner,
            other => Neg(Box::new(other)),
        }
    }

    pub fn pow(a: ParamExpr, e: u32) -> Self {
        Pow(Box::new(a), e)
    }

    /// Largest parameter index referenced (0 if none).
    pub fn max_param(&self) -> usize {
        match self {
            Const(_) => 0,
            Param(k) => *k,
            Neg(a) | Pow(a, _) => a.max_param(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.max_param().max(b.max_param()),
        }
    }

    pub fn has_params(&self) -> bool {
        self.max_param() > 0
    }

    /// Value at a parameter point (midpoints of literal intervals).
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Const(c) => c.mid(),
            Param(k) => p[k - 1],
            Neg(a) => -a.eval(p),
            Add(a, b) => a.eval(p) + b.eval(p),
            Sub(a, b) => a.eval(p) - b.eval(p),
            Mul(a, b) => a.eval(p) * b.eval(p),
            Div(a, b) => a.eval(p) / b.eval(p),
            Pow(a, e) => a.eval(p).powi(*e as i32),
        }
    }

    /// Evaluation in revised affine arithmetic over the parameter forms.
    pub fn eval_raf(&self, params: &[RevisedAffineForm], mul: MulMode, mode: Rounding) -> Result<RevisedAffineForm> {
        let k = params.first().map_or(0, RevisedAffineForm::len);
        Ok(match self {
            Const(c) => {
                if c.is_point() {
                    RevisedAffineForm::constant(c.lo(), k)
                } else {
                    RevisedAffineForm::from_interval(*c, k)
                }
            }
            Param(i) => params.get(i - 1).cloned().ok_or(Error::IndexOutOfRange { index: *i, len: params.len() })?,
            Neg(a) => a.eval_raf(params, mul, mode)?.neg(),
            Add(a, b) => a.eval_raf(params, mul, mode)?.add(&b.eval_raf(params, mul, mode)?, mode)?,
            Sub(a, b) => a.eval_raf(params, mul, mode)?.sub(&b.eval_raf(params, mul, mode)?, mode)?,
            Mul(a, b) => {
                let (x, y) = (a.eval_raf(params, mul, mode)?, b.eval_raf(params, mul, mode)?);
                if y.is_constant() {
                    x.scale(y.center(), mode)
                } else if x.is_constant() {
                    y.scale(x.center(), mode)
                } else {
                    x.mul(&y, mul, mode)?
                }
            }
            Div(a, b) => a.eval_raf(params, mul, mode)?.div(&b.eval_raf(params, mul, mode)?, mul, mode)?,
            Pow(a, e) => a.eval_raf(params, mul, mode)?.powi(*e, mul, mode)?,
        })
    }

    /// Exact affine decomposition `c0 + Σ c_k p_k`, if the expression is
    /// structurally of degree at most one.
    pub fn affine_coeffs(&self, k: usize) -> Option<(f64, Vec<f64>)> {
        match self {
            Const(c) => Some((c.mid(), vec![0.0; k])),
            Param(i) => {
                let mut v = vec![0.0; k];
                *v.get_mut(i - 1)? = 1.0;
                Some((0.0, v))
            }
            Neg(a) => a.affine_coeffs(k).map(|(c, v)| (-c, v.iter().map(|x| -x).collect())),
            Add(a, b) | Sub(a, b) => {
                let s = if matches!(self, Add(..)) { 1.0 } else { -1.0 };
                let (ca, va) = a.affine_coeffs(k)?;
                let (cb, vb) = b.affine_coeffs(k)?;
                Some((ca + s * cb, va.iter().zip(&vb).map(|(x, y)| x + s * y).collect()))
            }
            Mul(a, b) => {
                let (ca, va) = a.affine_coeffs(k)?;
                let (cb, vb) = b.affine_coeffs(k)?;
                if !a.has_params() {
                    Some((ca * cb, vb.iter().map(|x| ca * x).collect()))
                } else if !b.has_params() {
                    Some((ca * cb, va.iter().map(|x| cb * x).collect()))
                } else {
                    None
                }
            }
            Div(a, b) => {
                if b.has_params() {
                    return None;
                }
                let d = b.eval(&[]);
                if d == 0.0 {
                    return None;
                }
                let (ca, va) = a.affine_coeffs(k)?;
                Some((ca / d, va.iter().map(|x| x / d).collect()))
            }
            Pow(a, e) => match e {
                0 => Some((1.0, vec![0.0; k])),
                1 => a.affine_coeffs(k),
                _ if !a.has_params() => Some((a.eval(&[]).powi(*e as i32), vec![0.0; k])),
                _ => None,
            },
        }
    }

    /// Rebuilds `c0 + Σ c_k p_k` as an expression.
    pub fn from_affine(c0: f64, coeffs: &[f64]) -> Self {
        let mut e = Self::constant(c0);
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = if c == 1.0 { Param(i + 1) } else { Self::mul(Self::constant(c), Param(i + 1)) };
            e = Self::add(e, term);
        }
        e
    }

    /// Renders with the given parameter names; re-parses to the same tree.
    pub fn render(&self, names: &[String]) -> String {
        match self {
            Const(c) if c.is_point() => exact_decimal(c.lo()),
            Const(c) => render_number(c.mid()),
            Param(k) => names[k - 1].clone(),
            Neg(a) => format!("-{}", a.render_atom(names)),
            Add(a, b) => format!("{} + {}", a.render(names), b.render_term(names)),
            Sub(a, b) => format!("{} - {}", a.render(names), b.render_term(names)),
            Mul(a, b) => format!("{} * {}", a.render_term(names), b.render_factor(names)),
            Div(a, b) => format!("{} / {}", a.render_term(names), b.render_factor(names)),
            Pow(a, e) => format!("{}^{e}", a.render_atom(names)),
        }
    }

    fn render_term(&self, names: &[String]) -> String {
        match self {
            Add(..) | Sub(..) => format!("({})", self.render(names)),
            _ => self.render(names),
        }
    }

    fn render_factor(&self, names: &[String]) -> String {
        match self {
            Add(..) | Sub(..) | Mul(..) | Div(..) => format!("({})", self.render(names)),
            _ => self.render(names),
        }
    }

    fn render_atom(&self, names: &[String]) -> String {
        match self {
            Param(_) => self.render(names),
            Const(c) if c.mid() >= 0.0 => self.render(names),
            _ => format!("({})", self.render(names)),
        }
    }
}

fn render_number(x: f64) -> String {
    if x < 0.0 {
        format!("-{}", render_number(-x))
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.max_param();
        let names: Vec<String> = (1..=k).map(|i| format!("p{i}")).collect();
        f.write_str(&self.render(&names))
    }
}

/// Parses an entry expression; identifiers resolve against `names`.
pub fn parse_expr(text: &str, names: &[String], mode: Rounding) -> Result<ParamExpr> {
    let mut p = Parser { src: text, bytes: text.as_bytes(), pos: 0, names, mode };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    names: &'a [String],
    mode: Rounding,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ParamExpr> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { Add(Box::new(acc), Box::new(rhs)) } else { Sub(Box::new(acc), Box::new(rhs)) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ParamExpr> {
        let mut acc = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if op == b'*' { Mul(Box::new(acc), Box::new(rhs)) } else { Div(Box::new(acc), Box::new(rhs)) };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ParamExpr> {
        let negate = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected an unsigned integer exponent"));
            }
            let e = self.src[start..self.pos].parse().map_err(|_| self.error("exponent too large"))?;
            base = Pow(Box::new(base), e);
        }
        Ok(match (negate, base) {
            (true, Const(c)) => Const(-c),
            (true, base) => Neg(Box::new(base)),
            (false, base) => base,
        })
    }

    fn atom(&mut self) -> Result<ParamExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match self.names.iter().position(|n| n == name) {
                    Some(i) => Ok(Param(i + 1)),
                    None => Err(Error::UnknownParameter(name.to_string())),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<ParamExpr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let value = Interval::parse_decimal(text, text, self.mode).map_err(|_| Error::Parse {
            position: start,
            message: format!("bad number `{text}`"),
        })?;
        Ok(Const(value))
    }
}
