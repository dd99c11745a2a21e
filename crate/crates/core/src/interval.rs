//! Closed intervals, interval vectors and interval matrices.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::realmat::Matrix;

/// Rounding discipline for endpoint arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Round to nearest, no inflation.
    Fast,
    /// Every endpoint is rounded outward.
    #[default]
    Rigorous,
}

impl Rounding {
    pub fn is_rigorous(self) -> bool {
        self == Rounding::Rigorous
    }

    pub fn add_down(self, a: f64, b: f64) -> f64 {
        let s = a + b;
        match self {
            Rounding::Fast => s,
            Rounding::Rigorous if two_sum_err(a, b, s) < 0.0 => s.next_down(),
            Rounding::Rigorous => s,
        }
    }

    pub fn add_up(self, a: f64, b: f64) -> f64 {
        let s = a + b;
        match self {
            Rounding::Fast => s,
            Rounding::Rigorous if two_sum_err(a, b, s) > 0.0 => s.next_up(),
            Rounding::Rigorous => s,
        }
    }

    pub fn sub_down(self, a: f64, b: f64) -> f64 {
        self.add_down(a, -b)
    }

    pub fn sub_up(self, a: f64, b: f64) -> f64 {
        self.add_up(a, -b)
    }

    pub fn mul_down(self, a: f64, b: f64) -> f64 {
        let p = a * b;
        match self {
            Rounding::Fast => p,
            Rounding::Rigorous => match mul_err(a, b, p) {
                Some(e) if e >= 0.0 => p,
                _ => p.next_down(),
            },
        }
    }

    pub fn mul_up(self, a: f64, b: f64) -> f64 {
        let p = a * b;
        match self {
            Rounding::Fast => p,
            Rounding::Rigorous => match mul_err(a, b, p) {
                Some(e) if e <= 0.0 => p,
                _ => p.next_up(),
            },
        }
    }

    pub fn div_down(self, a: f64, b: f64) -> f64 {
        let q = a / b;
        match self {
            Rounding::Fast => q,
            Rounding::Rigorous => match div_err_sign(a, b, q) {
                Some(s) if s >= 0.0 => q,
                _ => q.next_down(),
            },
        }
    }

    pub fn div_up(self, a: f64, b: f64) -> f64 {
        let q = a / b;
        match self {
            Rounding::Fast => q,
            Rounding::Rigorous => match div_err_sign(a, b, q) {
                Some(s) if s <= 0.0 => q,
                _ => q.next_up(),
            },
        }
    }

    /// Upper bound on the rounding error of a floating-point sum of `terms`
    /// products whose absolute values sum to `abs_sum`. Zero in fast mode.
    pub fn dot_error(self, terms: usize, abs_sum: f64) -> f64 {
        match self {
            Rounding::Fast => 0.0,
            Rounding::Rigorous => {
                let u = f64::EPSILON / 2.0;
                let m = (terms + 1) as f64;
                let gamma = (m * u / (1.0 - m * u)).next_up();
                (gamma * abs_sum).next_up() * (1.0 + 4.0 * u) + f64::MIN_POSITIVE * m
            }
        }
    }
}

/// `fl(a + b)` and the magnitude of its rounding error.
pub(crate) fn add_with_err(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, two_sum_err(a, b, s).abs())
}

/// `fl(a * b)` and an upper bound on the magnitude of its rounding error.
pub(crate) fn mul_with_err(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, mul_err(a, b, p).map_or(f64::MIN_POSITIVE, f64::abs))
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    if !s.is_finite() {
        return 0.0;
    }
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

// exact error of a*b when it is representable, None near underflow
fn mul_err(a: f64, b: f64, p: f64) -> Option<f64> {
    if p == 0.0 && a != 0.0 && b != 0.0 {
        return None;
    }
    if p != 0.0 && p.abs() < 1e-290 {
        return None;
    }
    Some(a.mul_add(b, -p))
}

// sign of a/b - q, None near underflow
fn div_err_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if q.abs() < 1e-290 && a != 0.0 {
        return None;
    }
    let r = (-q).mul_add(b, a);
    Some(if b > 0.0 { r } else { -r })
}

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval. Panics on a non-finite value.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite interval endpoint {x}");
        Interval { lo: x, hi: x }
    }

    /// `[-r, r]`. Panics on negative or non-finite `r`.
    pub fn symmetric(r: f64) -> Self {
        assert!(r.is_finite() && r >= 0.0, "bad radius {r}");
        Interval { lo: -r, hi: r }
    }

    /// `c ± r` rounded outward.
    pub fn from_mid_rad(c: f64, r: f64, mode: Rounding) -> Result<Self> {
        if r < 0.0 {
            return Err(Error::InvalidInterval { lo: c, hi: r });
        }
        Interval::new(mode.sub_down(c, r), mode.add_up(c, r))
    }

    pub(crate) fn checked(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "[{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Midpoint, guaranteed to lie in the interval.
    pub fn mid(&self) -> f64 {
        let m = if (self.hi - self.lo).is_finite() {
            self.lo + 0.5 * (self.hi - self.lo)
        } else {
            0.5 * self.lo + 0.5 * self.hi
        };
        m.clamp(self.lo, self.hi)
    }

    /// Radius about [`Interval::mid`], rounded up.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        Rounding::Rigorous.sub_up(self.hi, m).max(Rounding::Rigorous.sub_up(m, self.lo))
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn midpoint_radius_magnitude(&self) -> (f64, f64, f64) {
        (self.mid(), self.rad(), self.mag())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(self, y: Interval, mode: Rounding) -> Interval {
        Interval::checked(mode.add_down(self.lo, y.lo), mode.add_up(self.hi, y.hi))
    }

    pub fn sub(self, y: Interval, mode: Rounding) -> Interval {
        Interval::checked(mode.sub_down(self.lo, y.hi), mode.sub_up(self.hi, y.lo))
    }

    pub fn mul(self, y: Interval, mode: Rounding) -> Interval {
        let pairs = [(self.lo, y.lo), (self.lo, y.hi), (self.hi, y.lo), (self.hi, y.hi)];
        let lo = pairs.iter().map(|&(a, b)| mode.mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| mode.mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::checked(lo, hi)
    }

    pub fn div(self, y: Interval, mode: Rounding) -> Result<Interval> {
        if y.contains(0.0) {
            return Err(Error::DivisionByZeroInterval);
        }
        let pairs = [(self.lo, y.lo), (self.lo, y.hi), (self.hi, y.lo), (self.hi, y.hi)];
        let lo = pairs.iter().map(|&(a, b)| mode.div_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| mode.div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    pub fn scale(self, s: f64, mode: Rounding) -> Interval {
        self.mul(Interval::point(s), mode)
    }

    pub fn binary_op(op: BinOp, x: Interval, y: Interval, mode: Rounding) -> Result<Interval> {
        let r = match op {
            BinOp::Add => x.add(y, mode),
            BinOp::Sub => x.sub(y, mode),
            BinOp::Mul => x.mul(y, mode),
            BinOp::Div => return x.div(y, mode),
        };
        Interval::new(r.lo, r.hi)
    }

    /// Parses decimal endpoints, widening outward in rigorous mode unless the
    /// decimal is exactly representable.
    pub fn parse_decimal(lo: &str, hi: &str, mode: Rounding) -> Result<Interval> {
        let l = parse_endpoint(lo, mode, false)?;
        let h = parse_endpoint(hi, mode, true)?;
        Interval::new(l, h)
    }
}

/// Parses a decimal literal, rounding it down (`up == false`) or up in
/// rigorous mode.
pub fn parse_endpoint(text: &str, mode: Rounding, up: bool) -> Result<f64> {
    let t = text.trim();
    let x: f64 = t
        .parse()
        .map_err(|_| Error::Parse { position: 0, message: format!("bad number `{t}`") })?;
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite number `{t}`")));
    }
    if mode == Rounding::Fast || decimal_is_exact(t, x) {
        return Ok(x);
    }
    Ok(if up { x.next_up() } else { x.next_down() })
}

/// Shortest decimal text that parses back to exactly `x` without widening.
pub fn exact_decimal(x: f64) -> String {
    let short = format!("{x:?}");
    if decimal_is_exact(&short, x) {
        return short;
    }
    let full = format!("{x:.800e}");
    let (mantissa, exp) = full.split_once('e').expect("exponent");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

// Compares the normalized digits of `text` with the exact expansion of `x`.
fn decimal_is_exact(text: &str, x: f64) -> bool {
    let Some(want) = normalize_decimal(text) else { return false };
    let Some(have) = normalize_decimal(&format!("{x:.800e}")) else { return false };
    want == have
}

// (negative, significant digits, exponent of the first digit)
fn normalize_decimal(text: &str) -> Option<(bool, String, i64)> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: String = format!("{int}{frac}");
    let lead = digits.find(|c| c != '0');
    let Some(lead) = lead else { return Some((false, String::new(), 0)) };
    let sig = digits[lead..].trim_end_matches('0').to_string();
    let e = exp + int.len() as i64 - lead as i64 - 1;
    Some((neg, sig, e))
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "[{:.*}, {:.*}]", p, self.lo, p, self.hi),
            None => write!(f, "[{}, {}]", self.lo, self.hi),
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs, Rounding::Rigorous)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs, Rounding::Rigorous)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(self, rhs, Rounding::Rigorous)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[serde_json::Number; 2]>::deserialize(d)?;
        Interval::parse_decimal(&lo.to_string(), &hi.to_string(), Rounding::Rigorous)
            .map_err(D::Error::custom)
    }
}

/// Column of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(items: Vec<Interval>) -> Self {
        IntervalVector(items)
    }

    pub fn from_points(x: &[f64]) -> Self {
        IntervalVector(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn from_mid_rad(c: &[f64], r: &[f64], mode: Rounding) -> Result<Self> {
        if c.len() != r.len() {
            return Err(Error::dims("midpoint and radius lengths differ"));
        }
        c.iter().zip(r).map(|(&c, &r)| Interval::from_mid_rad(c, r, mode)).collect::<Result<_>>().map(IntervalVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn rad(&self) -> Vec<f64> {
        self.0.iter().map(Interval::rad).collect()
    }

    pub fn mag(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mag).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(i, v)| i.contains(*v))
    }

    pub fn is_subset_of(&self, other: &IntervalVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset_of(b))
    }

    /// Smallest box containing every input box.
    pub fn hull<'a>(boxes: impl IntoIterator<Item = &'a IntervalVector>) -> Result<IntervalVector> {
        let mut it = boxes.into_iter();
        let mut acc = it.next().ok_or(Error::EmptySet)?.clone();
        for b in it {
            if b.len() != acc.len() {
                return Err(Error::dims("boxes of different dimension"));
            }
            for (a, x) in acc.0.iter_mut().zip(&b.0) {
                *a = a.hull(x);
            }
        }
        Ok(acc)
    }

    /// Extends the box to contain the point `x`.
    pub fn include_point(&mut self, x: &[f64]) {
        for (a, &v) in self.0.iter_mut().zip(x) {
            *a = a.hull(&Interval::point(v));
        }
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

impl IntoIterator for IntervalVector {
    type Item = Interval;
    type IntoIter = std::vec::IntoIter<Interval>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for IntervalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| format!("{x}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Row-major matrix of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Interval>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::dims("interval matrix storage"));
        }
        Ok(IntervalMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        IntervalMatrix { rows, cols, data }
    }

    pub fn from_real(m: &Matrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| Interval::point(m[(i, j)]))
    }

    pub fn from_mid_rad(c: &Matrix, r: &Matrix, mode: Rounding) -> Result<Self> {
        if c.shape() != r.shape() {
            return Err(Error::dims("midpoint and radius shapes differ"));
        }
        let mut data = Vec::with_capacity(c.rows() * c.cols());
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                data.push(Interval::from_mid_rad(c[(i, j)], r[(i, j)], mode)?);
            }
        }
        Ok(IntervalMatrix { rows: c.rows(), cols: c.cols(), data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    fn real(&self, f: impl Fn(&Interval) -> f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| f(&self.get(i, j)))
    }

    pub fn mid(&self) -> Matrix {
        self.real(Interval::mid)
    }

    pub fn rad(&self) -> Matrix {
        self.real(Interval::rad)
    }

    pub fn abs(&self) -> Matrix {
        self.real(Interval::mag)
    }

    pub fn lower(&self) -> Matrix {
        self.real(Interval::lo)
    }

    pub fn upper(&self) -> Matrix {
        self.real(Interval::hi)
    }

    pub fn is_subset_of(&self, other: &IntervalMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.is_subset_of(b))
    }

    pub fn add(&self, other: &IntervalMatrix, mode: Rounding) -> Result<IntervalMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims("interval matrix sum"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(*b, mode)).collect();
        Ok(IntervalMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn matvec(&self, x: &IntervalVector, mode: Rounding) -> Result<IntervalVector> {
        if self.cols != x.len() {
            return Err(Error::dims(format!("{}x{} times vector of {}", self.rows, self.cols, x.len())));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(Interval::ZERO, |acc, j| acc.add(self.get(i, j).mul(x[j], mode), mode)))
            .collect())
    }

    pub fn matmat(&self, other: &IntervalMatrix, mode: Rounding) -> Result<IntervalMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims("interval matrix product"));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Interval::ZERO, |acc, k| acc.add(self.get(i, k).mul(other.get(k, j), mode), mode))
        }))
    }
}

/// Real matrix times interval vector.
pub fn real_matvec(m: &Matrix, x: &IntervalVector, mode: Rounding) -> Result<IntervalVector> {
    IntervalMatrix::from_real(m).matvec(x, mode)
}
