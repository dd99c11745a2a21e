//! Left, right and double preconditioning of interval-affine systems.
mod strategies;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Rounding;
use crate::model::IntervalAffineSystem;
use crate::realmat::Matrix;

pub use strategies::{
    build_s0, BuildOptions, DoubleLu, DoubleQr, DoubleSvd, FixedStrategy, Left, PreconditionStrategy, Refined,
    Refinement, Right, StrategyRegistry,
};

/// The pair `(L, R)`: the system `C(e) x = c(e)` becomes
/// `L C(e) R y = L c(e)` with `x = R y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner {
    pub l: Matrix,
    pub r: Matrix,
    pub strategy: String,
}

impl Preconditioner {
    pub fn new(l: Matrix, r: Matrix, strategy: impl Into<String>) -> Result<Self> {
        if !l.is_square() || l.shape() != r.shape() {
            return Err(Error::dims("L and R must be square and of equal size"));
        }
        Ok(Preconditioner { l, r, strategy: strategy.into() })
    }

    pub fn identity(n: usize) -> Self {
        Preconditioner { l: Matrix::identity(n), r: Matrix::identity(n), strategy: "none".into() }
    }

    pub fn n(&self) -> usize {
        self.l.rows()
    }

    fn check(&self, sys: &IntervalAffineSystem) -> Result<()> {
        if self.n() != sys.n() {
            return Err(Error::dims(format!("preconditioner is {0}x{0}, system has n = {1}", self.n(), sys.n())));
        }
        Ok(())
    }
}

/// When to relax the parameter dependencies of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `Σ (L C_k R) e_k`, then relax.
    #[default]
    FactorFirst,
    /// Relax `Σ C_k e_k` to an interval matrix, then multiply.
    RelaxFirst,
    /// Relax first when that loses nothing (column-one for left,
    /// row-one for right preconditioning), else factor first.
    Auto,
}

impl Order {
    pub fn resolve(self, pc: &Preconditioner, sys: &IntervalAffineSystem) -> Order {
        match self {
            Order::Auto => {
                let mats = &sys.matrices()[1..];
                let lossless = (pc.r.is_identity() && mats.iter().all(column_one))
                    || (pc.l.is_identity() && mats.iter().all(|m| column_one(&m.transpose())));
                if lossless {
                    Order::RelaxFirst
                } else {
                    Order::FactorFirst
                }
            }
            o => o,
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factor_first" => Ok(Order::FactorFirst),
            "relax_first" => Ok(Order::RelaxFirst),
            "auto" => Ok(Order::Auto),
            _ => Err(Error::InvalidInput(format!("unknown evaluation order `{s}`"))),
        }
    }
}

/// At most one nonzero entry in every column.
pub fn column_one(m: &Matrix) -> bool {
    (0..m.cols()).all(|j| m.column(j).iter().filter(|x| **x != 0.0).count() <= 1)
}

// l·m·r together with a bound on its rounding error (zero in fast mode)
fn product(l: &Matrix, m: &Matrix, r: &Matrix, mode: Rounding) -> (Matrix, Matrix) {
    let value = &(l * m) * r;
    let err = if mode.is_rigorous() {
        let mag = &(&l.abs() * &m.abs()) * &r.abs();
        mag.map(|x| mode.dot_error(2 * m.rows() + 1, x))
    } else {
        Matrix::zeros(value.rows(), value.cols())
    };
    (value, err)
}

fn matvec_with_error(l: &Matrix, v: &[f64], mode: Rounding) -> (Vec<f64>, Vec<f64>) {
    let value = l.matvec(v);
    let mag = l.abs().matvec(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let err = mag.iter().map(|x| mode.dot_error(l.cols(), *x)).collect();
    (value, err)
}

// nonnegative product rounded up
fn nonneg_up(m: &Matrix, mode: Rounding) -> Matrix {
    m.map(|x| x + mode.dot_error(2 * m.rows() + 1, x))
}

/// Preconditioned system. Encloses `{L C(e) R}` and `{L c(e)}`; the
/// unknown of the result is `y` with `x = R y`.
pub fn apply(pc: &Preconditioner, sys: &IntervalAffineSystem, order: Order, mode: Rounding) -> Result<IntervalAffineSystem> {
    pc.check(sys)?;
    let order = order.resolve(pc, sys);
    let n = sys.n();
    let (l, r) = (&pc.l, &pc.r);
    let (la, ra) = (l.abs(), r.abs());
    let mut err = Matrix::zeros(n, n);
    let mut mats = Vec::with_capacity(sys.k() + 1);
    let (c0, e0) = product(l, sys.midpoint(), r, mode);
    mats.push(c0);
    err = &err + &e0;
    let relaxed = match order {
        Order::RelaxFirst => {
            mats.extend(std::iter::repeat_n(Matrix::zeros(n, n), sys.k()));
            sys.radius()
        }
        _ => {
            for ck in &sys.matrices()[1..] {
                let (v, e) = product(l, ck, r, mode);
                mats.push(v);
                err = &err + &e;
            }
            sys.matrix_radius().clone()
        }
    };
    let cr = &nonneg_up(&(&(&la * &relaxed) * &ra), mode) + &err;

    let mut rhs = Vec::with_capacity(sys.k() + 1);
    let mut rhs_err = vec![0.0; n];
    for ck in sys.vectors() {
        let (v, e) = matvec_with_error(l, ck, mode);
        rhs.push(v);
        for (a, b) in rhs_err.iter_mut().zip(e) {
            *a += b;
        }
    }
    let lr = la.matvec(sys.vector_radius());
    let rhs_r: Vec<f64> = lr
        .iter()
        .zip(&rhs_err)
        .map(|(x, e)| x + mode.dot_error(n, *x) + e)
        .collect();
    let cr = if mode.is_rigorous() { cr.map(|x| x.next_up()) } else { cr };
    IntervalAffineSystem::new(mats, cr, rhs, rhs_r)
}

/// `H^Δ = Σ_k |L C_k R| + |L| Cr |R|` (the `C_k` already carry `p^Δ_k`).
pub fn radius_matrix(pc: &Preconditioner, sys: &IntervalAffineSystem) -> Result<Matrix> {
    pc.check(sys)?;
    let mut h = &(&pc.l.abs() * sys.matrix_radius()) * &pc.r.abs();
    for ck in &sys.matrices()[1..] {
        h = &h + &(&(&pc.l * ck) * &pc.r).abs();
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub strategy: String,
    pub rho: f64,
    pub strongly_regular: bool,
    #[serde(skip)]
    pub hdelta: Matrix,
}

pub fn strong_regularity(pc: &Preconditioner, sys: &IntervalAffineSystem) -> Result<RegularityReport> {
    let hdelta = radius_matrix(pc, sys)?;
    let rho = hdelta.perron_root()?;
    Ok(RegularityReport { strategy: pc.strategy.clone(), rho, strongly_regular: rho < 1.0, hdelta })
}

#[cfg(test)]
mod tests;
