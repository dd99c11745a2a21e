use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{radius_matrix, Preconditioner};
use crate::error::{Error, Result};
use crate::model::IntervalAffineSystem;
use crate::realmat::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Seed of the candidate generator used by `s2` and `s3`.
    pub seed: u64,
    /// Number of candidates tried by `s2` and `s3`.
    pub candidates: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { seed: 1, candidates: 1000 }
    }
}

/// A named way of choosing `(L, R)` for a system.
pub trait PreconditionStrategy: Send + Sync {
    fn name(&self) -> String;
    fn build(&self, sys: &IntervalAffineSystem, opts: &BuildOptions) -> Result<Preconditioner>;
}

fn midpoint_inverse(sys: &IntervalAffineSystem) -> Result<Matrix> {
    sys.midpoint().inverse().map_err(|e| match e {
        Error::SingularMatrix => Error::SingularMidpoint,
        e => e,
    })
}

/// `(C0⁻¹, I)`.
pub struct Left;

impl PreconditionStrategy for Left {
    fn name(&self) -> String {
        "left".into()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        Preconditioner::new(midpoint_inverse(sys)?, Matrix::identity(sys.n()), self.name())
    }
}

/// `(I, C0⁻¹)`.
pub struct Right;

impl PreconditionStrategy for Right {
    fn name(&self) -> String {
        "right".into()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        Preconditioner::new(Matrix::identity(sys.n()), midpoint_inverse(sys)?, self.name())
    }
}

/// `C0⁻¹ = Lu Uu` (unit lower `Lu`, no pivoting), giving `(Uu, Lu)`.
pub struct DoubleLu;

impl PreconditionStrategy for DoubleLu {
    fn name(&self) -> String {
        "lu".into()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        let (lu, uu) = midpoint_inverse(sys)?.lu_no_pivot()?;
        Preconditioner::new(uu, lu, self.name())
    }
}

/// `C0⁻¹ = U Σ Vᵀ`, giving `(Vᵀ, U Σ)`.
pub struct DoubleSvd;

impl PreconditionStrategy for DoubleSvd {
    fn name(&self) -> String {
        "svd".into()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        let svd = midpoint_inverse(sys)?.svd()?;
        let us = &svd.u * &Matrix::from_diag(&svd.s);
        Preconditioner::new(svd.v.transpose(), us, self.name())
    }
}

/// `C0⁻¹ = Q Ru`, giving `(Ru, Q)`.
pub struct DoubleQr;

impl PreconditionStrategy for DoubleQr {
    fn name(&self) -> String {
        "qr".into()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        let qr = midpoint_inverse(sys)?.qr();
        Preconditioner::new(qr.r, qr.q, self.name())
    }
}

/// Fixed matrices, whatever the system.
pub struct FixedStrategy {
    pub name: String,
    pub l: Matrix,
    pub r: Matrix,
}

impl PreconditionStrategy for FixedStrategy {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn build(&self, sys: &IntervalAffineSystem, _: &BuildOptions) -> Result<Preconditioner> {
        let pc = Preconditioner::new(self.l.clone(), self.r.clone(), self.name())?;
        pc.check(sys)?;
        Ok(pc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// Similarity mapping the leading left singular vector of each
    /// `M_k = Lb C_k Rb` to a unit vector.
    S0,
    /// Real Schur vectors of the `M_k` with the largest Frobenius norm.
    S1,
    /// Best real Schur basis of `M(e)` over random `e ∈ [-1,1]^K`.
    S2,
    /// Best real Schur basis of `M(e)` over random vertices `e ∈ {-1,1}^K`.
    S3,
}

impl Refinement {
    fn tag(self) -> &'static str {
        match self {
            Refinement::S0 => "s0",
            Refinement::S1 => "s1",
            Refinement::S2 => "s2",
            Refinement::S3 => "s3",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "s0" => Refinement::S0,
            "s1" => Refinement::S1,
            "s2" => Refinement::S2,
            "s3" => Refinement::S3,
            _ => return None,
        })
    }
}

/// A similarity `(S, S⁻¹)` applied on top of a base preconditioner:
/// `L = S Lb`, `R = Rb S⁻¹`.
pub struct Refined {
    pub base: Arc<dyn PreconditionStrategy>,
    pub kind: Refinement,
    name: String,
}

impl Refined {
    pub fn new(base: Arc<dyn PreconditionStrategy>, kind: Refinement, name: impl Into<String>) -> Self {
        Refined { base, kind, name: name.into() }
    }
}

impl PreconditionStrategy for Refined {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn build(&self, sys: &IntervalAffineSystem, opts: &BuildOptions) -> Result<Preconditioner> {
        let base = self.base.build(sys, opts)?;
        let m: Vec<Matrix> = sys.matrices()[1..].iter().map(|c| &(&base.l * c) * &base.r).collect();
        let with = |s: &Matrix, s_inv: &Matrix| Preconditioner::new(s * &base.l, &base.r * s_inv, self.name());
        match self.kind {
            Refinement::S0 => {
                let mut vectors = Vec::new();
                for mk in m.iter().filter(|mk| !mk.is_zero()) {
                    vectors.push(mk.svd()?.u.column(0));
                }
                let s = build_s0(&vectors, sys.n())?;
                with(&s.l, &s.r)
            }
            Refinement::S1 => {
                let Some(top) = m.iter().max_by(|a, b| a.frobenius().total_cmp(&b.frobenius())) else {
                    return with(&Matrix::identity(sys.n()), &Matrix::identity(sys.n()));
                };
                let w = top.real_schur_vectors()?;
                with(&w.transpose(), &w)
            }
            Refinement::S2 | Refinement::S3 => {
                let k = sys.k();
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let candidates: Vec<Vec<f64>> = (0..opts.candidates.max(1))
                    .map(|_| {
                        (0..k)
                            .map(|_| match self.kind {
                                Refinement::S3 => {
                                    if rng.gen::<bool>() {
                                        1.0
                                    } else {
                                        -1.0
                                    }
                                }
                                _ => rng.gen_range(-1.0..=1.0),
                            })
                            .collect()
                    })
                    .collect();
                let m0 = &(&base.l * sys.midpoint()) * &base.r;
                let scored: Vec<Option<(f64, Preconditioner)>> = candidates
                    .par_iter()
                    .map(|e| {
                        let mut me = m0.clone();
                        for (mk, ek) in m.iter().zip(e) {
                            me = &me + &mk.scale(*ek);
                        }
                        let w = me.real_schur_vectors().ok()?;
                        let pc = with(&w.transpose(), &w).ok()?;
                        let rho = radius_matrix(&pc, sys).ok()?.perron_root().ok()?;
                        Some((rho, pc))
                    })
                    .collect();
                // first minimum wins, so ties go to the lowest candidate index
                let mut best: Option<(f64, Preconditioner)> = None;
                for (rho, pc) in scored.into_iter().flatten() {
                    if best.as_ref().is_none_or(|(b, _)| rho < *b) {
                        best = Some((rho, pc));
                    }
                }
                best.map(|(_, pc)| pc).ok_or(Error::ConvergenceFailure("no candidate produced a Schur basis"))
            }
        }
    }
}

/// `(S, S⁻¹)` where `S` maps the given vectors to the first unit vectors.
/// With fewer than `n` vectors the basis is completed greedily by the unit
/// vector that keeps the smallest singular value largest.
pub fn build_s0(vectors: &[Vec<f64>], n: usize) -> Result<Preconditioner> {
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::dims("S0 vectors must have length n"));
    }
    let k = vectors.len();
    let mut cols: Vec<Vec<f64>> = vectors.to_vec();
    let rank = numerical_rank(&cols, n);
    if rank < k {
        return Err(Error::DependentColumns { rank, expected: k });
    }
    let mut used = vec![false; n];
    while cols.len() < n {
        let mut best: Option<(f64, usize)> = None;
        for j in (0..n).filter(|&j| !used[j]) {
            let mut trial = cols.clone();
            trial.push(unit(n, j));
            let s = smallest_singular_value(&trial, n)?;
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, j));
            }
        }
        let (_, j) = best.expect("a unit vector is always available");
        used[j] = true;
        cols.push(unit(n, j));
    }
    let basis = Matrix::from_fn(n, n, |i, j| cols[j][i]);
    let s = basis.inverse().map_err(|_| Error::DependentColumns { rank, expected: n })?;
    Preconditioner::new(s, basis, "s0")
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()
}

fn singular_values(cols: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    let m = cols.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let a = Matrix::from_fn(n, m, |i, j| cols[j][i]);
    Ok(a.svd()?.s)
}

fn smallest_singular_value(cols: &[Vec<f64>], n: usize) -> Result<f64> {
    Ok(singular_values(cols, n)?.last().copied().unwrap_or(0.0))
}

fn numerical_rank(cols: &[Vec<f64>], n: usize) -> usize {
    let Ok(s) = singular_values(cols, n) else { return 0 };
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|x| **x > 1e-10 * top && **x > 0.0).count()
}

/// Strategies selectable by name. Besides the registered names, any
/// `base+sN` combination of a registered base with `s0..s3` resolves;
/// bare `s0..s3` refine `left`.
#[derive(Clone)]
pub struct StrategyRegistry {
    map: BTreeMap<String, Arc<dyn PreconditionStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { map: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Left));
        r.register(Arc::new(Right));
        r.register(Arc::new(DoubleLu));
        r.register(Arc::new(DoubleSvd));
        r.register(Arc::new(DoubleQr));
        for kind in [Refinement::S0, Refinement::S1, Refinement::S2, Refinement::S3] {
            r.register(Arc::new(Refined::new(Arc::new(Left), kind, kind.tag())));
        }
        r
    }

    pub fn register(&mut self, s: Arc<dyn PreconditionStrategy>) {
        self.map.insert(s.name(), s);
    }

    pub fn names(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PreconditionStrategy>> {
        let name = name.trim().to_ascii_lowercase();
        if let Some(s) = self.map.get(&name) {
            return Ok(s.clone());
        }
        if let Some((base, refine)) = name.rsplit_once('+') {
            if let (Ok(b), Some(kind)) = (self.get(base), Refinement::parse(refine)) {
                return Ok(Arc::new(Refined::new(b, kind, name.clone())));
            }
        }
        Err(Error::UnknownStrategy(name))
    }

    pub fn build(&self, name: &str, sys: &IntervalAffineSystem, opts: &BuildOptions) -> Result<Preconditioner> {
        self.get(name)?.build(sys, opts)
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
