use crate::error::{Error, Result};
use crate::interval::{IntervalMatrix, IntervalVector, Rounding};
use crate::model::expr::ParamExpr;
use crate::raf::{MulMode, RevisedAffineForm};
use crate::realmat::Matrix;

/// `A(p) x = b(p)` with `p` ranging over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricSystem {
    a: Vec<Vec<ParamExpr>>,
    b: Vec<ParamExpr>,
    p: IntervalVector,
    names: Vec<String>,
}

impl ParametricSystem {
    pub fn new(a: Vec<Vec<ParamExpr>>, b: Vec<ParamExpr>, p: IntervalVector, names: Vec<String>) -> Result<Self> {
        let n = b.len();
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::dims(format!("matrix must be {n}x{n} to match the right-hand side")));
        }
        if names.len() != p.len() {
            return Err(Error::dims("one name per parameter interval"));
        }
        let used = a.iter().flatten().chain(&b).map(ParamExpr::max_param).max().unwrap_or(0);
        if used > p.len() {
            return Err(Error::IndexOutOfRange { index: used, len: p.len() });
        }
        Ok(ParametricSystem { a, b, p, names })
    }

    /// System with parameters named `p1..pK`.
    pub fn with_default_names(a: Vec<Vec<ParamExpr>>, b: Vec<ParamExpr>, p: IntervalVector) -> Result<Self> {
        let names = (1..=p.len()).map(|k| format!("p{k}")).collect();
        Self::new(a, b, p, names)
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn a(&self) -> &[Vec<ParamExpr>] {
        &self.a
    }

    pub fn b(&self) -> &[ParamExpr] {
        &self.b
    }

    pub fn params(&self) -> &IntervalVector {
        &self.p
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix_at(&self, p: &[f64]) -> Matrix {
        Matrix::from_fn(self.n(), self.n(), |i, j| self.a[i][j].eval(p))
    }

    pub fn rhs_at(&self, p: &[f64]) -> Vec<f64> {
        self.b.iter().map(|e| e.eval(p)).collect()
    }

    pub fn solve_at(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.matrix_at(p).solve_vec(&self.rhs_at(p))
    }

    /// Substitutes `p_k = p^c_k + p^Δ_k ε_k` and evaluates every entry in
    /// revised affine arithmetic.
    pub fn affine_transform(&self, mul: MulMode, mode: Rounding) -> Result<IntervalAffineSystem> {
        let (n, k) = (self.n(), self.k());
        let forms: Vec<RevisedAffineForm> = self
            .p
            .iter()
            .enumerate()
            .map(|(i, p)| RevisedAffineForm::from_parameter(i + 1, *p, k))
            .collect::<Result<_>>()?;
        let mut c = vec![Matrix::zeros(n, n); k + 1];
        let mut cr = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let f = self.a[i][j].eval_raf(&forms, mul, mode)?;
                c[0][(i, j)] = f.center();
                for (m, d) in f.deviations().iter().enumerate() {
                    c[m + 1][(i, j)] = *d;
                }
                cr[(i, j)] = f.err();
            }
        }
        let mut rhs = vec![vec![0.0; n]; k + 1];
        let mut rhs_r = vec![0.0; n];
        for i in 0..n {
            let f = self.b[i].eval_raf(&forms, mul, mode)?;
            rhs[0][i] = f.center();
            for (m, d) in f.deviations().iter().enumerate() {
                rhs[m + 1][i] = *d;
            }
            rhs_r[i] = f.err();
        }
        IntervalAffineSystem::new(c, cr, rhs, rhs_r)
    }

    /// Exact coefficient matrices when every entry is affine in `p`.
    pub fn as_affine_linear(&self) -> Linearity {
        let (n, k) = (self.n(), self.k());
        let mut a = vec![Matrix::zeros(n, n); k + 1];
        let mut b = vec![vec![0.0; n]; k + 1];
        for i in 0..n {
            for j in 0..n {
                let Some((c0, cs)) = self.a[i][j].affine_coeffs(k) else { return Linearity::NotAffine };
                a[0][(i, j)] = c0;
                for (m, c) in cs.iter().enumerate() {
                    a[m + 1][(i, j)] = *c;
                }
            }
            let Some((c0, cs)) = self.b[i].affine_coeffs(k) else { return Linearity::NotAffine };
            b[0][i] = c0;
            for (m, c) in cs.iter().enumerate() {
                b[m + 1][i] = *c;
            }
        }
        Linearity::Affine(AffineLinearSystem { a, b, p: self.p.clone() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Linearity {
    Affine(AffineLinearSystem),
    NotAffine,
}

impl Linearity {
    pub fn affine(self) -> Option<AffineLinearSystem> {
        match self {
            Linearity::Affine(s) => Some(s),
            Linearity::NotAffine => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Linearity::Affine(_))
    }
}

/// `A(p) = A0 + Σ p_k A_k`, `b(p) = b0 + Σ p_k b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLinearSystem {
    a: Vec<Matrix>,
    b: Vec<Vec<f64>>,
    p: IntervalVector,
}

impl AffineLinearSystem {
    pub fn new(a: Vec<Matrix>, b: Vec<Vec<f64>>, p: IntervalVector) -> Result<Self> {
        if a.len() != p.len() + 1 || b.len() != p.len() + 1 {
            return Err(Error::dims("need K+1 coefficient matrices and vectors"));
        }
        let n = a[0].rows();
        if a.iter().any(|m| m.shape() != (n, n)) || b.iter().any(|v| v.len() != n) {
            return Err(Error::dims("coefficient shapes differ"));
        }
        Ok(AffineLinearSystem { a, b, p })
    }

    pub fn n(&self) -> usize {
        self.a[0].rows()
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    /// `A^(0)..A^(K)`.
    pub fn matrices(&self) -> &[Matrix] {
        &self.a
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn params(&self) -> &IntervalVector {
        &self.p
    }

    pub fn matrix_at(&self, p: &[f64]) -> Matrix {
        let mut m = self.a[0].clone();
        for (ak, pk) in self.a[1..].iter().zip(p) {
            m = &m + &ak.scale(*pk);
        }
        m
    }

    pub fn rhs_at(&self, p: &[f64]) -> Vec<f64> {
        let mut v = self.b[0].clone();
        for (bk, pk) in self.b[1..].iter().zip(p) {
            for (x, y) in v.iter_mut().zip(bk) {
                *x += pk * y;
            }
        }
        v
    }

    pub fn solve_at(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.matrix_at(p).solve_vec(&self.rhs_at(p))
    }

    /// Parameter `k` (1-based) touches at most one equation.
    pub fn class_one(&self, k: usize) -> Result<bool> {
        if k == 0 || k > self.k() {
            return Err(Error::IndexOutOfRange { index: k, len: self.k() });
        }
        let (ak, bk) = (&self.a[k], &self.b[k]);
        let rows = (0..self.n()).filter(|&i| bk[i] != 0.0 || ak.row(i).iter().any(|x| *x != 0.0)).count();
        Ok(rows <= 1)
    }

    /// Checks `|A(p^c)x - b(p^c)| <= Σ p^Δ_k |A^(k)x - b^(k)|`, which
    /// characterizes the solution set when every parameter is of class one.
    pub fn class_one_membership(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.n() {
            return Err(Error::dims("point dimension"));
        }
        for k in 1..=self.k() {
            if !self.class_one(k)? {
                return Err(Error::NotClassOne(k));
            }
        }
        let pc = self.p.mid();
        let residual = |m: &Matrix, v: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mx = m.matvec(x);
            let scale = m.abs().matvec(&x.iter().map(|t| t.abs()).collect::<Vec<_>>());
            (mx.iter().zip(v).map(|(a, b)| a - b).collect(), scale.iter().zip(v).map(|(s, b)| s + b.abs()).collect())
        };
        let (lhs, mut scale) = residual(&self.matrix_at(&pc), &self.rhs_at(&pc));
        let mut rhs = vec![0.0; self.n()];
        for k in 1..=self.k() {
            let r = self.p[k - 1].rad();
            let (res, sc) = residual(&self.a[k], &self.b[k]);
            for i in 0..self.n() {
                rhs[i] += r * res[i].abs();
                scale[i] += r * sc[i];
            }
        }
        Ok((0..self.n()).all(|i| lhs[i].abs() <= rhs[i] + 1e-9 * scale[i]))
    }

    /// Exact interval-affine form: `C0 = A(p^c)`, `C_k = p^Δ_k A^(k)`.
    pub fn to_interval_affine(&self, mode: Rounding) -> Result<IntervalAffineSystem> {
        let n = self.n();
        let pc = self.p.mid();
        let pr = self.p.rad();
        let mut c = vec![self.matrix_at(&pc)];
        let mut rhs = vec![self.rhs_at(&pc)];
        for k in 0..self.k() {
            c.push(self.a[k + 1].scale(pr[k]));
            rhs.push(self.b[k + 1].iter().map(|x| x * pr[k]).collect());
        }
        let mut cr = Matrix::zeros(n, n);
        let mut rhs_r = vec![0.0; n];
        if mode.is_rigorous() {
            // bound on rounding in A0 + Σ p^c_k A_k and in the scalings
            let terms = self.k() + 1;
            let mut mag = self.a[0].abs();
            let mut bmag: Vec<f64> = self.b[0].iter().map(|x| x.abs()).collect();
            for k in 0..self.k() {
                mag = &mag + &self.a[k + 1].abs().scale(pc[k].abs() + pr[k]);
                for (m, v) in bmag.iter_mut().zip(&self.b[k + 1]) {
                    *m += v.abs() * (pc[k].abs() + pr[k]);
                }
            }
            cr = mag.map(|m| mode.dot_error(terms, m));
            rhs_r = bmag.iter().map(|m| mode.dot_error(terms, *m)).collect();
        }
        IntervalAffineSystem::new(c, cr, rhs, rhs_r)
    }

    /// Expression-level system with the same coefficients.
    pub fn to_parametric(&self) -> Result<ParametricSystem> {
        let (n, k) = (self.n(), self.k());
        let a = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let cs: Vec<f64> = (1..=k).map(|m| self.a[m][(i, j)]).collect();
                        ParamExpr::from_affine(self.a[0][(i, j)], &cs)
                    })
                    .collect()
            })
            .collect();
        let b = (0..n)
            .map(|i| {
                let cs: Vec<f64> = (1..=k).map(|m| self.b[m][i]).collect();
                ParamExpr::from_affine(self.b[0][i], &cs)
            })
            .collect();
        ParametricSystem::with_default_names(a, b, self.p.clone())
    }
}

/// `C(e) x = c(e)` with `C(e) = C0 + Σ e_k C_k + Cr[-1,1]`,
/// `c(e) = c0 + Σ e_k c_k + cr[-1,1]`, `e ∈ [-1,1]^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalAffineSystem {
    c: Vec<Matrix>,
    cr: Matrix,
    rhs: Vec<Vec<f64>>,
    rhs_r: Vec<f64>,
}

impl IntervalAffineSystem {
    pub fn new(c: Vec<Matrix>, cr: Matrix, rhs: Vec<Vec<f64>>, rhs_r: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c.len() != rhs.len() {
            return Err(Error::dims("need matching C^(k) and c^(k) counts"));
        }
        let n = c[0].rows();
        if c.iter().any(|m| m.shape() != (n, n)) || cr.shape() != (n, n) {
            return Err(Error::dims("coefficient matrices must be square and equal-sized"));
        }
        if rhs.iter().any(|v| v.len() != n) || rhs_r.len() != n {
            return Err(Error::dims("right-hand side length"));
        }
        if !cr.is_nonnegative() || rhs_r.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidInput("error radii must be nonnegative".into()));
        }
        Ok(IntervalAffineSystem { c, cr, rhs, rhs_r })
    }

    pub fn n(&self) -> usize {
        self.c[0].rows()
    }

    pub fn k(&self) -> usize {
        self.c.len() - 1
    }

    pub fn midpoint(&self) -> &Matrix {
        &self.c[0]
    }

    /// `C^(0)..C^(K)`.
    pub fn matrices(&self) -> &[Matrix] {
        &self.c
    }

    pub fn matrix_radius(&self) -> &Matrix {
        &self.cr
    }

    /// `c^(0)..c^(K)`.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.rhs
    }

    pub fn vector_radius(&self) -> &[f64] {
        &self.rhs_r
    }

    /// `C0 + Σ e_k C_k` (error term at zero).
    pub fn matrix_at(&self, e: &[f64]) -> Matrix {
        let mut m = self.c[0].clone();
        for (ck, ek) in self.c[1..].iter().zip(e) {
            m = &m + &ck.scale(*ek);
        }
        m
    }

    pub fn rhs_at(&self, e: &[f64]) -> Vec<f64> {
        let mut v = self.rhs[0].clone();
        for (ck, ek) in self.rhs[1..].iter().zip(e) {
            for (x, y) in v.iter_mut().zip(ck) {
                *x += ek * y;
            }
        }
        v
    }

    /// `Σ_k |C_k| + Cr`.
    pub fn radius(&self) -> Matrix {
        self.c[1..].iter().fold(self.cr.clone(), |acc, m| &acc + &m.abs())
    }

    /// Interval hull of `{C(e)}` (rounded outward).
    pub fn hull(&self) -> Result<IntervalMatrix> {
        IntervalMatrix::from_mid_rad(&self.c[0], &self.radius(), Rounding::Rigorous)
    }

    pub fn rhs_hull(&self) -> Result<IntervalVector> {
        let r: Vec<f64> = (0..self.n())
            .map(|i| self.rhs[1..].iter().map(|v| v[i].abs()).sum::<f64>() + self.rhs_r[i])
            .collect();
        IntervalVector::from_mid_rad(&self.rhs[0], &r, Rounding::Rigorous)
    }
}

/// Realifies `(M_re + i M_im)(x_re + i x_im) = b_re + i b_im` into
/// `[[M_re, -M_im], [M_im, M_re]] (x_re; x_im) = (b_re; b_im)`.
pub fn complex_to_real(
    m_re: &[Vec<ParamExpr>],
    m_im: &[Vec<ParamExpr>],
    b_re: &[ParamExpr],
    b_im: &[ParamExpr],
    p: IntervalVector,
    names: Vec<String>,
) -> Result<ParametricSystem> {
    let n = b_re.len();
    let square = |m: &[Vec<ParamExpr>]| m.len() == n && m.iter().all(|r| r.len() == n);
    if !square(m_re) || !square(m_im) || b_im.len() != n {
        return Err(Error::dims("complex system parts must share one dimension"));
    }
    let mut a = vec![vec![ParamExpr::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m_re[i][j].clone();
            a[i][j + n] = ParamExpr::neg(m_im[i][j].clone());
            a[i + n][j] = m_im[i][j].clone();
            a[i + n][j + n] = m_re[i][j].clone();
        }
    }
    let b = b_re.iter().chain(b_im).cloned().collect();
    ParametricSystem::new(a, b, p, names)
}
