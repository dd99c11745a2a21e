//! Revised affine forms `x0 + Σ x_k ε_k + x_r [-1, 1]` over a fixed set of noise symbols.

use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{add_with_err, mul_with_err, Interval, Rounding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MulMode {
    /// Bound the quadratic part by the product of the two radii.
    Trivial,
    /// Minimum-error product from the exact range of the quadratic part.
    #[default]
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisedAffineForm {
    center: f64,
    deviations: Vec<f64>,
    err: f64,
}

const U: f64 = f64::EPSILON / 2.0;

fn gamma(n: usize) -> f64 {
    let m = n as f64 * U;
    (m / (1.0 - m)).next_up()
}

// upward-rounded sum of nonnegative terms
fn sum_up(terms: impl IntoIterator<Item = f64>) -> f64 {
    terms.into_iter().fold(0.0, |acc, t| Rounding::Rigorous.add_up(acc, t))
}

// folds exact rounding losses into the error term in rigorous mode
fn absorb(err: f64, lost: &[f64], mode: Rounding) -> f64 {
    match mode {
        Rounding::Fast => err,
        Rounding::Rigorous => Rounding::Rigorous.add_up(err, sum_up(lost.iter().copied())),
    }
}

impl RevisedAffineForm {
    pub fn new(center: f64, deviations: Vec<f64>, err: f64) -> Result<Self> {
        if !center.is_finite() || deviations.iter().any(|d| !d.is_finite()) || !(err >= 0.0 && err.is_finite()) {
            return Err(Error::InvalidInput("revised affine form needs finite fields and err >= 0".into()));
        }
        Ok(RevisedAffineForm { center, deviations, err })
    }

    pub fn constant(c: f64, k: usize) -> Self {
        RevisedAffineForm { center: c, deviations: vec![0.0; k], err: 0.0 }
    }

    /// `p^c + p^Δ ε_k` for the 1-based symbol index `k`.
    pub fn from_parameter(k: usize, p: Interval, count: usize) -> Result<Self> {
        if k == 0 || k > count {
            return Err(Error::IndexOutOfRange { index: k, len: count });
        }
        let mut deviations = vec![0.0; count];
        deviations[k - 1] = p.rad();
        Ok(RevisedAffineForm { center: p.mid(), deviations, err: 0.0 })
    }

    /// Form with only an error term, enclosing `x`.
    pub fn from_interval(x: Interval, count: usize) -> Self {
        RevisedAffineForm { center: x.mid(), deviations: vec![0.0; count], err: x.rad() }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn deviations(&self) -> &[f64] {
        &self.deviations
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.err == 0.0 && self.deviations.iter().all(|d| *d == 0.0)
    }

    /// `Σ|x_k| + x_r`, rounded up.
    pub fn radius(&self) -> f64 {
        Rounding::Rigorous.add_up(sum_up(self.deviations.iter().map(|d| d.abs())), self.err)
    }

    pub fn to_interval(&self, mode: Rounding) -> Interval {
        let r = match mode {
            Rounding::Fast => self.deviations.iter().map(|d| d.abs()).sum::<f64>() + self.err,
            Rounding::Rigorous => self.radius(),
        };
        Interval::checked(mode.sub_down(self.center, r), mode.add_up(self.center, r))
    }

    /// Value at a noise vector, with the error term at `t` in [-1, 1].
    pub fn eval(&self, e: &[f64], t: f64) -> f64 {
        self.center + self.deviations.iter().zip(e).map(|(d, x)| d * x).sum::<f64>() + self.err * t
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::dims(format!("forms over {} and {} symbols", self.len(), other.len())));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self, mode: Rounding) -> Result<Self> {
        self.same_len(other)?;
        self.combine(1.0, other, mode)
    }

    pub fn sub(&self, other: &Self, mode: Rounding) -> Result<Self> {
        self.same_len(other)?;
        self.combine(-1.0, other, mode)
    }

    pub fn neg(&self) -> Self {
        RevisedAffineForm {
            center: -self.center,
            deviations: self.deviations.iter().map(|d| -d).collect(),
            err: self.err,
        }
    }

    pub fn scale(&self, s: f64, mode: Rounding) -> Self {
        let mut lost = Vec::with_capacity(self.len() + 1);
        let (center, e) = mul_with_err(s, self.center);
        lost.push(e);
        let deviations = self
            .deviations
            .iter()
            .map(|d| {
                let (p, e) = mul_with_err(s, *d);
                lost.push(e);
                p
            })
            .collect();
        let err = Rounding::Rigorous.mul_up(s.abs(), self.err);
        RevisedAffineForm { center, deviations, err: absorb(err, &lost, mode) }
    }

    pub fn translate(&self, c: f64, mode: Rounding) -> Self {
        let (center, e) = add_with_err(self.center, c);
        RevisedAffineForm { center, deviations: self.deviations.clone(), err: absorb(self.err, &[e], mode) }
    }

    // self ± other
    fn combine(&self, sign: f64, other: &Self, mode: Rounding) -> Result<Self> {
        let mut lost = Vec::with_capacity(self.len() + 1);
        let (center, e) = add_with_err(self.center, sign * other.center);
        lost.push(e);
        let deviations = self
            .deviations
            .iter()
            .zip(&other.deviations)
            .map(|(x, y)| {
                let (s, e) = add_with_err(*x, sign * y);
                lost.push(e);
                s
            })
            .collect();
        let err = Rounding::Rigorous.add_up(self.err, other.err);
        Ok(RevisedAffineForm { center, deviations, err: absorb(err, &lost, mode) })
    }

    pub fn mul(&self, other: &Self, mul_mode: MulMode, mode: Rounding) -> Result<Self> {
        self.same_len(other)?;
        let (x0, y0) = (self.center, other.center);
        let (dc, dd) = match mul_mode {
            MulMode::Trivial => (0.0, Rounding::Rigorous.mul_up(self.radius(), other.radius())),
            MulMode::Chebyshev => {
                let gens = self
                    .deviations
                    .iter()
                    .zip(&other.deviations)
                    .map(|(x, y)| (*x, *y))
                    .chain([(self.err, 0.0), (0.0, other.err)]);
                let (mut lo, mut hi) = bilinear_range(gens);
                let triv = Rounding::Rigorous.mul_up(self.radius(), other.radius());
                if mode.is_rigorous() && hi > lo {
                    let slack = Rounding::Rigorous.mul_up(gamma(2 * self.len() + 12), triv);
                    lo = Rounding::Rigorous.sub_down(lo, slack);
                    hi = Rounding::Rigorous.add_up(hi, slack);
                }
                // both bounds enclose the quadratic part, so their intersection does
                let (lo, hi) = (lo.max(-triv), hi.min(triv));
                let dc = 0.5 * (lo + hi);
                let dd = if mode.is_rigorous() {
                    Rounding::Rigorous.sub_up(hi, dc).max(Rounding::Rigorous.sub_up(dc, lo))
                } else {
                    0.5 * (hi - lo)
                };
                (dc, dd)
            }
        };
        let mut lost = Vec::with_capacity(3 * self.len() + 2);
        let (p, e1) = mul_with_err(x0, y0);
        let (center, e2) = add_with_err(p, dc);
        lost.extend([e1, e2]);
        let deviations = self
            .deviations
            .iter()
            .zip(&other.deviations)
            .map(|(x, y)| {
                let (a, ea) = mul_with_err(x0, *y);
                let (b, eb) = mul_with_err(y0, *x);
                let (s, es) = add_with_err(a, b);
                lost.extend([ea, eb, es]);
                s
            })
            .collect();
        let err = sum_up([
            Rounding::Rigorous.mul_up(x0.abs(), other.err),
            Rounding::Rigorous.mul_up(y0.abs(), self.err),
            dd,
        ]);
        Ok(RevisedAffineForm { center, deviations, err: absorb(err, &lost, mode) })
    }

    /// Min-range linear enclosure of `1 / x`.
    pub fn reciprocal(&self, mode: Rounding) -> Result<Self> {
        let range = self.to_interval(Rounding::Rigorous);
        if range.contains(0.0) {
            return Err(Error::ZeroInRange);
        }
        if range.lo() < 0.0 {
            return Ok(self.neg().reciprocal(mode)?.neg());
        }
        let (a, b) = (range.lo(), range.hi());
        if self.is_constant() {
            let q = 1.0 / self.center;
            let err = match mode {
                Rounding::Fast => 0.0,
                Rounding::Rigorous => (Rounding::Rigorous.div_up(1.0, self.center) - q)
                    .max(q - Rounding::Rigorous.div_down(1.0, self.center)),
            };
            return Ok(RevisedAffineForm { center: q, deviations: vec![0.0; self.len()], err });
        }
        // 1/t - alpha t is decreasing on [a, b] for alpha = -1/b²
        let alpha = -1.0 / (b * b);
        let g_hi = 1.0 / a + a / (b * b);
        let g_lo = 2.0 / b;
        let (g_hi, g_lo) = match mode {
            Rounding::Fast => (g_hi, g_lo),
            Rounding::Rigorous => {
                let r = Rounding::Rigorous;
                let bb_lo = r.mul_down(b, b);
                (r.add_up(r.div_up(1.0, a), r.div_up(a, bb_lo)), r.div_down(2.0, b))
            }
        };
        let zeta = 0.5 * (g_hi + g_lo);
        let delta = Rounding::Rigorous.sub_up(g_hi, zeta).max(Rounding::Rigorous.sub_up(zeta, g_lo));
        let mut out = self.scale(alpha, mode).translate(zeta, mode);
        out.err = Rounding::Rigorous.add_up(out.err, delta);
        if mode.is_rigorous() {
            // slope rounding: |alpha - fl(alpha)| <= 2u|alpha|
            let slope = Rounding::Rigorous.mul_up(gamma(3) * alpha.abs(), range.mag());
            out.err = Rounding::Rigorous.add_up(out.err, slope);
        }
        Ok(out)
    }

    pub fn div(&self, other: &Self, mul_mode: MulMode, mode: Rounding) -> Result<Self> {
        self.same_len(other)?;
        if other.is_constant() {
            if other.center == 0.0 {
                return Err(Error::ZeroInRange);
            }
            let q = self.scale(1.0 / other.center, mode);
            return Ok(match mode {
                Rounding::Fast => q,
                Rounding::Rigorous => {
                    let slack = Rounding::Rigorous.mul_up(gamma(2), self.to_interval(mode).mag() / other.center.abs());
                    RevisedAffineForm { err: Rounding::Rigorous.add_up(q.err, slack), ..q }
                }
            });
        }
        self.mul(&other.reciprocal(mode)?, mul_mode, mode)
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, e: u32, mul_mode: MulMode, mode: Rounding) -> Result<Self> {
        let mut acc = RevisedAffineForm::constant(1.0, self.len());
        for _ in 0..e {
            acc = acc.mul(self, mul_mode, mode)?;
        }
        Ok(acc)
    }
}

/// Exact range of `u v` over the zonotope `Σ t_i g_i`, `t_i ∈ [-1, 1]`.
pub fn bilinear_range(generators: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut g: Vec<(f64, f64)> = generators
        .into_iter()
        .filter(|&(x, y)| x != 0.0 || y != 0.0)
        .map(|(x, y)| if y < 0.0 || (y == 0.0 && x < 0.0) { (-x, -y) } else { (x, y) })
        .collect();
    if g.is_empty() {
        return (0.0, 0.0);
    }
    g.sort_by(|a, b| a.1.atan2(a.0).total_cmp(&b.1.atan2(b.0)));
    // walk half of the boundary; u v is even so the other half adds nothing
    let mut px = -g.iter().map(|t| t.0).sum::<f64>();
    let mut py = -g.iter().map(|t| t.1).sum::<f64>();
    let mut lo = px * py;
    let mut hi = lo;
    for &(gx, gy) in &g {
        let (ax, ay) = (2.0 * gx, 2.0 * gy);
        let a = ax * ay;
        if a != 0.0 {
            let t = -(px * ay + py * ax) / (2.0 * a);
            if t > 0.0 && t < 1.0 {
                let v = (px + ax * t) * (py + ay * t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        px += ax;
        py += ay;
        lo = lo.min(px * py);
        hi = hi.max(px * py);
    }
    (lo, hi)
}

impl fmt::Display for RevisedAffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.center)?;
        for (k, d) in self.deviations.iter().enumerate() {
            if *d != 0.0 {
                let sign = if *d < 0.0 { '-' } else { '+' };
                write!(f, " {sign} {}·eps_{}", d.abs(), k + 1)?;
            }
        }
        write!(f, " ± {}", self.err)
    }
}
