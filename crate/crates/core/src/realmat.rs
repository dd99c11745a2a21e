//! Dense real matrices and the factorizations the preconditioners need.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    data: DMatrix<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { data: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Matrix { data: DMatrix::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Matrix { data: DMatrix::from_fn(rows, cols, |i, j| f(i, j)) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dims("ragged rows"));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self[(i, j)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows()).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix { data: self.data.transpose() }
    }

    pub fn abs(&self) -> Self {
        Matrix { data: self.data.abs() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix { data: &self.data * s }
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Matrix { data: self.data.map(f) }
    }

    pub fn zip_map(&self, other: &Matrix, f: impl FnMut(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        Matrix { data: self.data.zip_map(&other.data, f) }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(Error::dims(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Matrix { data: &self.data * &other.data })
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols(), v.len(), "matvec dimension mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| *x >= 0.0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.rows())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == 0.0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Matrix) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(other.data.iter()).all(|(a, b)| a <= b)
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols())).map(|i| self[(i, i)]).collect()
    }

    /// Solves `self * X = b` by partially pivoted elimination.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if !self.is_square() || b.rows() != self.rows() {
            return Err(Error::dims("solve needs a square matrix and matching rows"));
        }
        let n = self.rows();
        let tol = 1e-12 * self.norm_inf();
        let mut a = self.data.clone();
        let mut x = b.data.clone();
        for k in 0..n {
            let (p, piv) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv <= tol || piv == 0.0 {
                return Err(Error::SingularMatrix);
            }
            a.swap_rows(k, p);
            x.swap_rows(k, p);
            for i in k + 1..n {
                let m = a[(i, k)] / a[(k, k)];
                if m == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[(i, j)] -= m * a[(k, j)];
                }
                for j in 0..x.ncols() {
                    x[(i, j)] -= m * x[(k, j)];
                }
            }
        }
        for k in (0..n).rev() {
            for j in 0..x.ncols() {
                let s: f64 = (k + 1..n).map(|l| a[(k, l)] * x[(l, j)]).sum();
                x[(k, j)] = (x[(k, j)] - s) / a[(k, k)];
            }
        }
        Ok(Matrix { data: x })
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve(&Matrix::column_vector(b))?.column(0))
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.rows()))
    }

    /// Doolittle factorization `self = L U` without row exchanges.
    pub fn lu_no_pivot(&self) -> Result<(Matrix, Matrix)> {
        if !self.is_square() {
            return Err(Error::dims("LU needs a square matrix"));
        }
        let n = self.rows();
        let tol = 1e-14 * self.norm_inf();
        let mut l = Matrix::identity(n);
        let mut u = Matrix::zeros(n, n);
        for k in 0..n {
            for j in k..n {
                let s: f64 = (0..k).map(|m| l[(k, m)] * u[(m, j)]).sum();
                u[(k, j)] = self[(k, j)] - s;
            }
            if u[(k, k)].abs() <= tol || u[(k, k)] == 0.0 {
                return Err(Error::ZeroPivot(k + 1));
            }
            for i in k + 1..n {
                let s: f64 = (0..k).map(|m| l[(i, m)] * u[(m, k)]).sum();
                l[(i, k)] = (self[(i, k)] - s) / u[(k, k)];
            }
        }
        Ok((l, u))
    }

    /// Householder QR. Diagonal entries of R are made nonnegative.
    pub fn qr(&self) -> Qr {
        let qr = self.data.clone().qr();
        let mut q = qr.q();
        let mut r = qr.r();
        for i in 0..r.nrows().min(r.ncols()) {
            if r[(i, i)] < 0.0 {
                r.row_mut(i).neg_mut();
                q.column_mut(i).neg_mut();
            }
        }
        let scale = r.amax().max(f64::MIN_POSITIVE);
        let rank_deficient = (0..r.nrows().min(r.ncols())).any(|i| r[(i, i)].abs() <= 1e-13 * scale);
        Qr { q: Matrix { data: q }, r: Matrix { data: r }, rank_deficient }
    }

    /// Singular value decomposition with singular values in descending order.
    /// Thin one-sided Jacobi SVD, singular values descending: `U` is m×r,
    /// `V` is n×r with r = min(m, n).
    pub fn svd(&self) -> Result<Svd> {
        let (m, c) = self.shape();
        if m < c {
            let t = self.transpose().svd()?;
            return Ok(Svd { u: t.v, s: t.s, v: t.u });
        }
        let mut a = self.clone();
        let mut v = Matrix::identity(c);
        let col_dot = |x: &Matrix, p: usize, q: usize| (0..x.rows()).map(|i| x[(i, p)] * x[(i, q)]).sum::<f64>();
        let mut converged = false;
        for _ in 0..100 {
            let mut rotated = false;
            for p in 0..c {
                for q in p + 1..c {
                    let (alpha, beta, gamma) = (col_dot(&a, p, p), col_dot(&a, q, q), col_dot(&a, p, q));
                    if gamma == 0.0 || gamma.abs() <= m as f64 * f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let cs = 1.0 / (1.0 + t * t).sqrt();
                    let sn = cs * t;
                    for x in [&mut a, &mut v] {
                        for i in 0..x.rows() {
                            let (y, z) = (x[(i, p)], x[(i, q)]);
                            x[(i, p)] = cs * y - sn * z;
                            x[(i, q)] = sn * y + cs * z;
                        }
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ConvergenceFailure("SVD"));
        }
        let norms: Vec<f64> = (0..c).map(|j| col_dot(&a, j, j).sqrt()).collect();
        let mut order: Vec<usize> = (0..c).collect();
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
        let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
        let v = Matrix::from_fn(c, c, |i, j| v[(i, order[j])]);
        let tiny = s.first().copied().unwrap_or(0.0) * m as f64 * f64::EPSILON;
        let mut u = Matrix::zeros(m, c);
        let mut filled = 0;
        for (j, &col) in order.iter().enumerate() {
            if s[j] > tiny {
                for i in 0..m {
                    u[(i, j)] = a[(i, col)] / s[j];
                }
                filled += 1;
            }
        }
        // null directions: complete U by Gram-Schmidt on unit vectors
        let mut e = 0;
        for j in filled..c {
            loop {
                if e >= m {
                    return Err(Error::ConvergenceFailure("SVD"));
                }
                let mut w: Vec<f64> = (0..m).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
                e += 1;
                for _ in 0..2 {
                    for k in 0..j {
                        let d: f64 = (0..m).map(|i| u[(i, k)] * w[i]).sum();
                        for (i, wi) in w.iter_mut().enumerate() {
                            *wi -= d * u[(i, k)];
                        }
                    }
                }
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.5 {
                    for i in 0..m {
                        u[(i, j)] = w[i] / norm;
                    }
                    break;
                }
            }
        }
        Ok(Svd { u, s, v })
    }

    fn schur(&self) -> Result<nalgebra::linalg::Schur<f64, nalgebra::Dyn>> {
        if !self.is_square() {
            return Err(Error::dims("Schur form needs a square matrix"));
        }
        // thresholds within a few ulps often never deflate complex pairs
        for eps in [1e-14, 1e-12] {
            let Some(schur) = nalgebra::linalg::Schur::try_new(self.data.clone(), eps, 2_000) else {
                continue;
            };
            let (q, t) = schur.clone().unpack();
            let back = &q * &t * q.transpose();
            if (back - &self.data).amax() <= 1e-9 * self.max_abs().max(f64::MIN_POSITIVE) {
                return Ok(schur);
            }
        }
        Err(Error::ConvergenceFailure("real Schur"))
    }

    /// Orthogonal `W` with `Wᵀ M W` quasi-upper-triangular.
    pub fn real_schur_vectors(&self) -> Result<Matrix> {
        let (q, _) = self.schur()?.unpack();
        Ok(Matrix { data: q })
    }

    /// Eigenvalues as (re, im) pairs.
    pub fn eigenvalues(&self) -> Result<Vec<(f64, f64)>> {
        if self.rows() == 0 && self.is_square() {
            return Ok(Vec::new());
        }
        Ok(self.schur()?.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max))
    }

    /// Perron root by shifted power iteration with Collatz-Wielandt bounds.
    pub fn spectral_radius_nonneg(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::dims("spectral radius needs a square matrix"));
        }
        debug_assert!(self.is_nonnegative());
        let n = self.rows();
        if n == 0 || self.is_zero() {
            return Ok(0.0);
        }
        // the shift keeps the iterate positive and damps the other peripheral eigenvalues
        let shift = 0.5 * self.norm_inf();
        let mut x = vec![1.0; n];
        // reducible matrices can stall the bounds; the dense solver takes over then
        for _ in 0..300 {
            let mx = self.matvec(&x);
            let mut lower = f64::INFINITY;
            let mut upper = 0.0f64;
            for i in 0..n {
                let r = mx[i] / x[i];
                lower = lower.min(r);
                upper = upper.max(r);
            }
            if upper - lower <= 1e-10 * upper {
                return Ok(0.5 * (lower + upper));
            }
            let y: Vec<f64> = mx.iter().zip(&x).map(|(m, xi)| m + shift * xi).collect();
            let top = y.iter().cloned().fold(0.0, f64::max);
            x = y.iter().map(|v| v / top).collect();
            if x.iter().any(|v| *v < 1e-280) {
                break;
            }
        }
        Err(Error::ConvergenceFailure("power iteration"))
    }

    /// Perron root, falling back to the full eigenvalue problem.
    pub fn perron_root(&self) -> Result<f64> {
        match self.spectral_radius_nonneg() {
            Err(Error::ConvergenceFailure(_)) => self.spectral_radius(),
            r => r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Qr {
    pub q: Matrix,
    pub r: Matrix,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut f64 {
        &mut self.data[idx]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix { data: &self.data + &rhs.data }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        Matrix { data: &self.data - &rhs.data }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { data: -&self.data }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:>12.6}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn inverse_of_two_by_two() {
        let a = m(&[&[2.0, 4.0], &[2.0, 1.0]]);
        let inv = a.inverse().unwrap();
        let want = m(&[&[-1.0 / 6.0, 2.0 / 3.0], &[1.0 / 3.0, -1.0 / 3.0]]);
        assert!(close(&inv, &want, 1e-15));
    }

    #[test]
    fn identity_solve() {
        let b = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(Matrix::identity(2).solve(&b).unwrap(), b);
    }

    #[test]
    fn singular_rejected() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(a.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn doolittle() {
        let (l, u) = m(&[&[4.0, 3.0], &[6.0, 3.0]]).lu_no_pivot().unwrap();
        assert_eq!(l, m(&[&[1.0, 0.0], &[1.5, 1.0]]));
        assert_eq!(u, m(&[&[4.0, 3.0], &[0.0, -1.5]]));
        let (l, u) = Matrix::identity(3).lu_no_pivot().unwrap();
        assert_eq!(l, Matrix::identity(3));
        assert_eq!(u, Matrix::identity(3));
        assert_eq!(m(&[&[0.0, 1.0], &[1.0, 0.0]]).lu_no_pivot(), Err(Error::ZeroPivot(1)));
    }

    #[test]
    fn qr_of_permutation() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let qr = a.qr();
        assert!(close(&(&qr.q * &qr.r), &a, 1e-15));
        assert!(qr.r[(1, 0)].abs() < 1e-15 && qr.r[(0, 1)].abs() < 1e-15);
        assert!(!qr.rank_deficient);
        let qr = Matrix::identity(3).qr();
        assert!(close(&qr.q, &Matrix::identity(3), 1e-15));
    }

    #[test]
    fn svd_of_rank_one_matrix() {
        let a = [-0.49602336884036063, 0.9143765483967776, -0.3928509653925175];
        let b = [2.5280849744440865, 2.396224442332391, 1.7468687342989722];
        let x = Matrix::from_fn(3, 3, |i, j| a[i] * b[j]);
        let svd = x.svd().unwrap();
        let back = &(&svd.u * &Matrix::from_diag(&svd.s)) * &svd.v.transpose();
        assert!(close(&back, &x, 1e-14));
        assert!(close(&(&svd.u.transpose() * &svd.u), &Matrix::identity(3), 1e-14));
        assert!(svd.s[1] < 1e-14 && svd.s[2] < 1e-14);
    }

    #[test]
    fn svd_small_cases() {
        let s = Matrix::from_diag(&[1.0, 3.0]).svd().unwrap();
        assert!((s.s[0] - 3.0).abs() < 1e-14 && (s.s[1] - 1.0).abs() < 1e-14);
        let s = m(&[&[0.0, 2.0], &[0.0, 0.0]]).svd().unwrap();
        assert!((s.s[0] - 2.0).abs() < 1e-14 && s.s[1].abs() < 1e-14);
    }

    #[test]
    fn perron_roots_of_small_matrices() {
        let h = m(&[&[0.5, 1.0], &[0.5, 1.0]]);
        assert!((h.perron_root().unwrap() - 1.5).abs() <= 1e-10);
        let h = m(&[&[0.0, 0.0], &[0.5, 0.5]]);
        assert!((h.perron_root().unwrap() - 0.5).abs() <= 1e-10);
        assert_eq!(Matrix::zeros(3, 3).perron_root().unwrap(), 0.0);
        let cyc = m(&[&[0.0, 2.0], &[0.5, 0.0]]);
        assert!((cyc.perron_root().unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn schur_of_symmetric_is_diagonalizing() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let w = a.real_schur_vectors().unwrap();
        let t = &(&w.transpose() * &a) * &w;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(t[(i, j)].abs() < 1e-10);
                }
            }
        }
    }
}
