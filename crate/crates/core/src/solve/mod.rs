//! Enclosure methods producing p-solutions `x(e) ∈ F e + a`.
mod phbr;
mod pki;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{add_with_err, real_matvec, Interval, IntervalVector, Rounding};
use crate::model::{IntervalAffineSystem, ParametricSystem};
use crate::precond::{apply, BuildOptions, Order, Preconditioner, StrategyRegistry};
use crate::raf::MulMode;
use crate::realmat::Matrix;

pub use phbr::Phbr;
pub use pki::{Krawczyk, Pki};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative change of every component radius below which PKI stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Solve for the deviation from `x̃ = C0⁻¹ c0`.
    pub residual_correction: bool,
    pub mul: MulMode,
    pub rounding: Rounding,
    pub order: Order,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-4,
            max_iter: 1000,
            residual_correction: true,
            mul: MulMode::Chebyshev,
            rounding: Rounding::Rigorous,
            order: Order::FactorFirst,
        }
    }
}

/// `x(e) ∈ F e + a` for `e ∈ [-1,1]^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PSolution {
    pub f: Matrix,
    pub a: IntervalVector,
}

impl PSolution {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Range of `F e + a` over the unit box.
    pub fn outer_box(&self, mode: Rounding) -> IntervalVector {
        (0..self.n())
            .map(|i| {
                let s = self.f.row(i).iter().fold(0.0, |acc, x| mode.add_up(acc, x.abs()));
                let a = self.a[i];
                Interval::new(mode.sub_down(a.lo(), s), mode.add_up(a.hi(), s)).expect("ordered")
            })
            .collect()
    }

    /// Componentwise `[a^c - (Σ|F| - a^Δ), a^c + (Σ|F| - a^Δ)]`, rounded
    /// inward; `None` where `Σ|F| < a^Δ`.
    pub fn inner_estimate(&self, mode: Rounding) -> InnerEstimate {
        InnerEstimate(
            (0..self.n())
                .map(|i| {
                    let s = self.f.row(i).iter().fold(0.0, |acc, x| mode.add_down(acc, x.abs()));
                    let a = self.a[i];
                    let (lo, hi) = (mode.sub_up(a.hi(), s), mode.add_down(a.lo(), s));
                    (lo <= hi).then(|| Interval::new(lo, hi).expect("ordered"))
                })
                .collect(),
        )
    }

    /// Enclosure of `x(e)` at one point of the unit box.
    pub fn eval(&self, e: &[f64], mode: Rounding) -> IntervalVector {
        let fe = real_matvec(&self.f, &IntervalVector::from_points(e), mode).expect("dimensions");
        fe.iter().zip(self.a.iter()).map(|(x, a)| x.add(*a, mode)).collect()
    }
}

/// Inner box with per-component empty markers.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerEstimate(pub Vec<Option<Interval>>);

impl InnerEstimate {
    pub fn is_subset_of(&self, outer: &IntervalVector) -> bool {
        self.0.iter().zip(outer.iter()).all(|(x, o)| x.is_none_or(|x| x.is_subset_of(o)))
    }

    pub fn all_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }
}

impl Serialize for InnerEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(serialize_with = "ser_matrix")]
    pub f: Matrix,
    pub a: IntervalVector,
    pub outer: IntervalVector,
    pub inner: InnerEstimate,
    pub iterations: usize,
    /// False when PKI hit `max_iter`; the enclosure is still valid.
    pub converged: bool,
    pub method: String,
    pub preconditioner: String,
    pub rho: f64,
    pub order: Order,
    pub rounding: Rounding,
    pub tol: f64,
}

fn ser_matrix<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.to_rows().serialize(s)
}

impl SolveResult {
    pub fn psolution(&self) -> PSolution {
        PSolution { f: self.f.clone(), a: self.a.clone() }
    }

    fn from_psolution(ps: PSolution, meta: Meta) -> Self {
        let outer = ps.outer_box(meta.rounding);
        let inner = ps.inner_estimate(meta.rounding);
        SolveResult {
            f: ps.f,
            a: ps.a,
            outer,
            inner,
            iterations: meta.iterations,
            converged: meta.converged,
            method: meta.method,
            preconditioner: meta.preconditioner,
            rho: meta.rho,
            order: meta.order,
            rounding: meta.rounding,
            tol: meta.tol,
        }
    }
}

struct Meta {
    iterations: usize,
    converged: bool,
    method: String,
    preconditioner: String,
    rho: f64,
    order: Order,
    rounding: Rounding,
    tol: f64,
}

/// A named enclosure method.
pub trait EnclosureMethod: Send + Sync {
    fn name(&self) -> String;
    fn solve(&self, sys: &IntervalAffineSystem, pc: &Preconditioner, opts: &SolveOptions) -> Result<SolveResult>;
}

#[derive(Clone)]
pub struct MethodRegistry {
    map: BTreeMap<String, Arc<dyn EnclosureMethod>>,
}

impl MethodRegistry {
    pub fn standard() -> Self {
        let mut r = MethodRegistry { map: BTreeMap::new() };
        r.register(Arc::new(Pki));
        r.register(Arc::new(Phbr));
        r
    }

    pub fn register(&mut self, m: Arc<dyn EnclosureMethod>) {
        self.map.insert(m.name(), m);
    }

    pub fn names(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn EnclosureMethod>> {
        let key = name.trim().to_ascii_lowercase();
        self.map.get(&key).cloned().ok_or(Error::UnknownMethod(key))
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

/// Affine transformation, preconditioner construction and solve in one call.
pub fn solve_parametric(
    sys: &ParametricSystem,
    method: &str,
    strategy: &str,
    opts: &SolveOptions,
    build: &BuildOptions,
) -> Result<SolveResult> {
    let affine = sys.affine_transform(opts.mul, opts.rounding)?;
    let pc = StrategyRegistry::standard().build(strategy, &affine, build)?;
    MethodRegistry::standard().get(method)?.solve(&affine, &pc, opts)
}

/// `(1 - x^Δ / y^Δ) · 100` for `x ⊆ y`.
pub fn overestimation(x: &Interval, y: &Interval) -> Result<f64> {
    if !x.is_subset_of(y) {
        return Err(Error::NotNested);
    }
    width_gain(x, y)
}

/// `(1 - x^Δ / y^Δ) · 100` without the nesting requirement; negative when
/// `x` is wider.
pub fn width_gain(x: &Interval, y: &Interval) -> Result<f64> {
    if y.width() == 0.0 {
        return Err(Error::ZeroWidthReference);
    }
    Ok((1.0 - x.width() / y.width()) * 100.0)
}

// The residual-corrected, preconditioned system in `y` together with the
// Krawczyk data `G = I - L C R` and its radius bound.
struct Prepared {
    x_tilde: Vec<f64>,
    pre: IntervalAffineSystem,
    g0: Matrix,
    gr: Matrix,
    hd: Matrix,
    rho: f64,
    order: Order,
}

fn prepare(sys: &IntervalAffineSystem, pc: &Preconditioner, opts: &SolveOptions) -> Result<Prepared> {
    let n = sys.n();
    let mode = opts.rounding;
    let x_tilde = if opts.residual_correction {
        sys.midpoint().solve_vec(&sys.vectors()[0]).map_err(|e| match e {
            Error::SingularMatrix => Error::SingularMidpoint,
            e => e,
        })?
    } else {
        vec![0.0; n]
    };
    let resid = if opts.residual_correction {
        let xa: Vec<f64> = x_tilde.iter().map(|x| x.abs()).collect();
        let mut rhs = Vec::with_capacity(sys.k() + 1);
        let mut err: Vec<f64> = sys.matrix_radius().matvec(&xa);
        for (ck, vk) in sys.matrices().iter().zip(sys.vectors()) {
            let cx = ck.matvec(&x_tilde);
            rhs.push(vk.iter().zip(&cx).map(|(v, c)| v - c).collect::<Vec<f64>>());
            let mag = ck.abs().matvec(&xa);
            for i in 0..n {
                err[i] += mode.dot_error(n + 1, mag[i] + vk[i].abs());
            }
        }
        let rhs_r: Vec<f64> = err
            .iter()
            .zip(sys.vector_radius())
            .map(|(e, r)| {
                let s = e + r;
                s + mode.dot_error(n + 1, s)
            })
            .collect();
        IntervalAffineSystem::new(sys.matrices().to_vec(), sys.matrix_radius().clone(), rhs, rhs_r)?
    } else {
        sys.clone()
    };
    let order = opts.order.resolve(pc, sys);
    let pre = apply(pc, &resid, order, mode)?;
    let mut g0 = Matrix::zeros(n, n);
    let mut gr = pre.matrix_radius().clone();
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let (v, e) = add_with_err(delta, -pre.midpoint()[(i, j)]);
            g0[(i, j)] = v;
            if mode.is_rigorous() {
                gr[(i, j)] = mode.add_up(gr[(i, j)], e);
            }
        }
    }
    let mut hd = &g0.abs() + &gr;
    for ck in &pre.matrices()[1..] {
        hd = &hd + &ck.abs();
    }
    if mode.is_rigorous() {
        hd = hd.map(|x| x + mode.dot_error(pre.k() + 2, x));
    }
    let rho = hd.perron_root()?;
    if !(rho < 1.0) {
        return Err(Error::NotStronglyRegular { rho });
    }
    Ok(Prepared { x_tilde, pre, g0, gr, hd, rho, order })
}

// x = x̃ + R (c + D e ± r)
fn back_transform(x_tilde: &[f64], r: &Matrix, c: &[f64], d: &Matrix, rad: &[f64], mode: Rounding) -> Result<PSolution> {
    let n = x_tilde.len();
    let y = IntervalVector::from_mid_rad(c, rad, mode)?;
    let (f, ry, f_err) = if r.is_identity() {
        (d.clone(), y, vec![0.0; n])
    } else {
        let f = r * d;
        let f_err = if mode.is_rigorous() {
            let mag = &r.abs() * &d.abs();
            (0..n).map(|i| mag.row(i).iter().fold(0.0, |acc, m| mode.add_up(acc, mode.dot_error(n, *m)))).collect()
        } else {
            vec![0.0; n]
        };
        (f, real_matvec(r, &y, mode)?, f_err)
    };
    let a = (0..n)
        .map(|i| {
            let x = Interval::point(x_tilde[i]).add(ry[i], mode);
            Interval::new(mode.sub_down(x.lo(), f_err[i]), mode.add_up(x.hi(), f_err[i]))
        })
        .collect::<Result<IntervalVector>>()?;
    Ok(PSolution { f, a })
}
