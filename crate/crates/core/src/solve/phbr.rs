use super::{back_transform, prepare, EnclosureMethod, Meta, SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::interval::{Interval, Rounding};
use crate::model::IntervalAffineSystem;
use crate::precond::Preconditioner;
use crate::realmat::Matrix;

/// Hansen-Bliek-Rohn hull of the relaxed preconditioned system
/// `[I - Δ, I + Δ] y = [b^c - δ, b^c + δ]`, in the form of Ning and
/// Kearfott, mapped back through `x = R y`. The system is not shifted by
/// the midpoint solution: a direct hull of the relaxed system keeps the
/// right-hand side and matrix dependencies apart only when solved as is.
pub struct Phbr;

impl EnclosureMethod for Phbr {
    fn name(&self) -> String {
        "phbr".into()
    }

    fn solve(&self, sys: &IntervalAffineSystem, pc: &Preconditioner, opts: &SolveOptions) -> Result<SolveResult> {
        let opts = &SolveOptions { residual_correction: false, ..*opts };
        let prep = prepare(sys, pc, opts)?;
        let mode = opts.rounding;
        let pre = &prep.pre;
        let n = sys.n();
        let delta = &prep.hd;
        let bc = &pre.vectors()[0];
        let brad: Vec<f64> = (0..n)
            .map(|i| pre.vectors()[1..].iter().fold(pre.vector_radius()[i], |acc, v| mode.add_up(acc, v[i].abs())))
            .collect();
        let (m_lo, m_hi) = inverse_bounds(delta, mode)?;
        let w_hi: Vec<f64> = (0..n).map(|i| mode.add_up(bc[i].abs(), brad[i])).collect();
        let w_lo: Vec<f64> = (0..n).map(|i| mode.add_down(bc[i].abs(), brad[i])).collect();
        let xs_hi = matvec_bound(&m_hi, &w_hi, mode, true);
        let xs_lo = matvec_bound(&m_lo, &w_lo, mode, false);
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            let mu = Interval::new(m_lo[(i, i)].max(1.0), m_hi[(i, i)].max(1.0))?;
            let xs = Interval::new(xs_lo[i].min(xs_hi[i]), xs_hi[i])?;
            let nu = Interval::point(1.0).div(mu.scale(2.0, mode).sub(Interval::point(1.0), mode), mode)?;
            let t = Interval::point(bc[i] + bc[i].abs());
            let s = Interval::point(bc[i] - bc[i].abs());
            let x_low = mu.mul(t, mode).sub(xs, mode);
            let x_up = xs.add(mu.mul(s, mode), mode);
            lo[i] = x_low.lo().min(nu.mul(x_low, mode).lo());
            hi[i] = x_up.hi().max(nu.mul(x_up, mode).hi());
        }
        let c: Vec<f64> = (0..n).map(|i| lo[i] + 0.5 * (hi[i] - lo[i])).collect();
        let rad: Vec<f64> = (0..n).map(|i| mode.sub_up(hi[i], c[i]).max(mode.sub_up(c[i], lo[i]))).collect();
        let ps = back_transform(&prep.x_tilde, &pc.r, &c, &Matrix::zeros(n, sys.k()), &rad, mode)?;
        Ok(SolveResult::from_psolution(
            ps,
            Meta {
                iterations: 1,
                converged: true,
                method: self.name(),
                preconditioner: pc.strategy.clone(),
                rho: prep.rho,
                order: prep.order,
                rounding: mode,
                tol: opts.tol,
            },
        ))
    }
}

fn matvec_bound(m: &Matrix, w: &[f64], mode: Rounding, up: bool) -> Vec<f64> {
    let v = m.matvec(w);
    let mag = m.abs().matvec(&w.iter().map(|x| x.abs()).collect::<Vec<_>>());
    v.iter()
        .zip(&mag)
        .map(|(x, g)| {
            let e = mode.dot_error(w.len(), *g);
            if up { x + e } else { x - e }
        })
        .collect()
}

// Bounds M_lo <= (I - Δ)⁻¹ <= M_hi for Δ >= 0 with ρ(Δ) < 1. With
// T(X) = I + Δ X, X >= T(X) implies X >= M and Y <= T(Y) implies Y <= M.
fn inverse_bounds(delta: &Matrix, mode: Rounding) -> Result<(Matrix, Matrix)> {
    let n = delta.rows();
    let m = (&Matrix::identity(n) - delta).inverse()?;
    if !mode.is_rigorous() {
        let m = m.map(|x| x.max(0.0));
        return Ok((m.clone(), m));
    }
    let rowsum: Vec<f64> = (0..n).map(|i| m.row(i).iter().map(|x| x.abs()).sum()).collect();
    let t = |x: &Matrix| -> (Matrix, Matrix) {
        let dx = delta * x;
        let err = (&delta.abs() * &x.abs()).map(|g| mode.dot_error(n + 1, g));
        (&Matrix::identity(n) + &dx, err)
    };
    let mut tau = 1e-15;
    let mut upper = None;
    let mut lower = None;
    while tau <= 1e-3 && (upper.is_none() || lower.is_none()) {
        if upper.is_none() {
            let x = Matrix::from_fn(n, n, |i, j| m[(i, j)].max(0.0) + tau * rowsum[i]);
            let (tx, err) = t(&x);
            if (&tx + &err).le(&x) {
                upper = Some(x);
            }
        }
        if lower.is_none() {
            let y = Matrix::from_fn(n, n, |i, j| m[(i, j)] - tau * rowsum[i]);
            let (ty, err) = t(&y);
            if y.le(&(&ty - &err)) {
                lower = Some(y.map(|v| v.max(0.0)));
            }
        }
        tau *= 10.0;
    }
    match (lower, upper) {
        (Some(l), Some(u)) => Ok((l, u)),
        _ => Err(Error::ConvergenceFailure("bounds on (I - Δ)⁻¹")),
    }
}
