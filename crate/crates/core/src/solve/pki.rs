use super::{back_transform, prepare, EnclosureMethod, Meta, PSolution, Prepared, SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::interval::Rounding;
use crate::model::IntervalAffineSystem;
use crate::precond::Preconditioner;
use crate::raf::RevisedAffineForm;
use crate::realmat::Matrix;

/// Parametric Krawczyk iteration `v ← g + G v` on revised affine forms,
/// with `g = L (c - C x̃)` and `G = I - L C R`.
pub struct Krawczyk {
    prep: Prepared,
    r: Matrix,
    g: Vec<RevisedAffineForm>,
    gm: Vec<Vec<RevisedAffineForm>>,
    opts: SolveOptions,
    // round-to-nearest twin whose radii drive the stopping rule, so that
    // both rounding modes take the same number of steps
    shadow: Option<Box<Krawczyk>>,
}

impl Krawczyk {
    pub fn new(sys: &IntervalAffineSystem, pc: &Preconditioner, opts: &SolveOptions) -> Result<Self> {
        let prep = prepare(sys, pc, opts)?;
        let (n, k) = (sys.n(), sys.k());
        let pre = &prep.pre;
        let g = (0..n)
            .map(|i| {
                let devs = pre.vectors()[1..].iter().map(|v| v[i]).collect();
                RevisedAffineForm::new(pre.vectors()[0][i], devs, pre.vector_radius()[i])
            })
            .collect::<Result<_>>()?;
        let gm = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let devs: Vec<f64> = pre.matrices()[1..].iter().map(|m| -m[(i, j)]).collect();
                        debug_assert_eq!(devs.len(), k);
                        RevisedAffineForm::new(prep.g0[(i, j)], devs, prep.gr[(i, j)])
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let shadow = if opts.rounding.is_rigorous() {
            let fast = SolveOptions { rounding: Rounding::Fast, ..*opts };
            Some(Box::new(Krawczyk::new(sys, pc, &fast)?))
        } else {
            None
        };
        Ok(Krawczyk { prep, r: pc.r.clone(), g, gm, opts: *opts, shadow })
    }

    pub fn rho(&self) -> f64 {
        self.prep.rho
    }

    /// `v⁰_i = u_i [-1, 1]` with `u = (I - H^Δ)⁻¹ |g|`.
    pub fn initial(&self) -> Result<Vec<RevisedAffineForm>> {
        let mode = self.opts.rounding;
        let n = self.g.len();
        let k = self.prep.pre.k();
        let mag: Vec<f64> = self.g.iter().map(|g| g.to_interval(mode).mag()).collect();
        let a = &Matrix::identity(n) - &self.prep.hd;
        let mut u: Vec<f64> = a.solve_vec(&mag)?.iter().map(|x| x.max(0.0)).collect();
        if mode.is_rigorous() {
            // u is a valid bound once |g| + H^Δ u <= u holds with rounding accounted for
            let mut tau = 1e-15;
            loop {
                let hu = self.prep.hd.matvec(&u);
                let ok = (0..n).all(|i| {
                    let s = mag[i] + hu[i];
                    s + mode.dot_error(n + 1, s) <= u[i]
                });
                if ok {
                    break;
                }
                if tau > 1e-3 {
                    return Err(Error::ConvergenceFailure("initial Krawczyk enclosure"));
                }
                // slack on the right-hand side keeps the inflation along a
                // direction where (I - H^Δ) stays positive
                let top = mag.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let rhs: Vec<f64> = mag.iter().map(|m| m + tau * (m + top)).collect();
                u = a.solve_vec(&rhs)?.iter().map(|x| x.max(0.0)).collect();
                tau *= 10.0;
            }
        }
        u.iter().map(|ui| RevisedAffineForm::new(0.0, vec![0.0; k], *ui)).collect()
    }

    pub fn step(&self, v: &[RevisedAffineForm]) -> Result<Vec<RevisedAffineForm>> {
        let mode = self.opts.rounding;
        self.gm
            .iter()
            .zip(&self.g)
            .map(|(row, gi)| {
                let mut s = gi.clone();
                for (gij, vj) in row.iter().zip(v) {
                    if gij.is_constant() && gij.center() == 0.0 {
                        continue;
                    }
                    s = s.add(&gij.mul(vj, self.opts.mul, mode)?, mode)?;
                }
                if !s.center().is_finite() || !s.err().is_finite() {
                    return Err(Error::ConvergenceFailure("Krawczyk iterate overflowed"));
                }
                Ok(s)
            })
            .collect()
    }

    /// p-solution of the original system from an iterate in `y`.
    pub fn to_psolution(&self, v: &[RevisedAffineForm]) -> Result<PSolution> {
        let n = v.len();
        let k = self.prep.pre.k();
        let c: Vec<f64> = v.iter().map(RevisedAffineForm::center).collect();
        let d = Matrix::from_fn(n, k, |i, j| v[i].deviations()[j]);
        let rad: Vec<f64> = v.iter().map(RevisedAffineForm::err).collect();
        back_transform(&self.prep.x_tilde, &self.r, &c, &d, &rad, self.opts.rounding)
    }

    /// Iterates until every radius changes by at most `tol` relative, or
    /// `max_iter` steps. Returns the last iterate, the step count and
    /// whether the stopping rule fired.
    pub fn run(&self) -> Result<(Vec<RevisedAffineForm>, usize, bool)> {
        let radius = |v: &[RevisedAffineForm]| -> Vec<f64> { v.iter().map(RevisedAffineForm::radius).collect() };
        let mut v = self.initial()?;
        let mut w = match &self.shadow {
            Some(s) => Some(s.initial()?),
            None => None,
        };
        let mut prev: Option<Vec<f64>> = None;
        for it in 1..=self.opts.max_iter.max(1) {
            v = self.step(&v)?;
            let rad = match (&self.shadow, w.as_mut()) {
                (Some(s), Some(w)) => {
                    *w = s.step(w)?;
                    radius(w)
                }
                _ => radius(&v),
            };
            if let Some(p) = &prev {
                if p.iter().zip(&rad).all(|(a, b)| (a - b).abs() <= self.opts.tol * b) {
                    return Ok((v, it, true));
                }
            }
            prev = Some(rad);
        }
        Ok((v, self.opts.max_iter.max(1), false))
    }
}

pub struct Pki;

impl EnclosureMethod for Pki {
    fn name(&self) -> String {
        "pki".into()
    }

    fn solve(&self, sys: &IntervalAffineSystem, pc: &Preconditioner, opts: &SolveOptions) -> Result<SolveResult> {
        let kr = Krawczyk::new(sys, pc, opts)?;
        let (v, iterations, converged) = kr.run()?;
        let ps = kr.to_psolution(&v)?;
        Ok(SolveResult::from_psolution(
            ps,
            Meta {
                iterations,
                converged,
                method: self.name(),
                preconditioner: pc.strategy.clone(),
                rho: kr.rho(),
                order: kr.prep.order,
                rounding: opts.rounding,
                tol: opts.tol,
            },
        ))
    }
}
