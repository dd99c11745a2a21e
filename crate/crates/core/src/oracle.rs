//! Independent checks: sampled solution hulls and the random ensembles used to
//! compare preconditioners.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{add_with_err, mul_with_err, Interval, IntervalVector, Rounding};
use crate::model::{AffineLinearSystem, ParametricSystem};
use crate::precond::{radius_matrix, BuildOptions, StrategyRegistry};
use crate::realmat::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Random,
    Vertices,
    Grid,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Sampler::Random),
            "vertices" => Ok(Sampler::Vertices),
            "grid" => Ok(Sampler::Grid),
            _ => Err(Error::InvalidInput(format!("unknown sampler `{s}`"))),
        }
    }
}

/// Hull of solutions at sampled parameter points; an inner approximation of
/// the solution hull.
#[derive(Debug, Clone, Serialize)]
pub struct SampledHull {
    pub bounds: IntervalVector,
    pub samples_used: usize,
    pub skipped: usize,
    pub sampler: Sampler,
    pub seed: u64,
}

impl SampledHull {
    pub fn merge(&self, other: &SampledHull) -> Result<SampledHull> {
        Ok(SampledHull {
            bounds: IntervalVector::hull([&self.bounds, &other.bounds])?,
            samples_used: self.samples_used + other.samples_used,
            skipped: self.skipped + other.skipped,
            ..self.clone()
        })
    }

    /// Bounds widened by `eps · max(1, |x|)` per endpoint.
    pub fn inflated(&self, eps: f64) -> IntervalVector {
        self.bounds
            .iter()
            .map(|x| Interval::checked(x.lo() - eps * x.lo().abs().max(1.0), x.hi() + eps * x.hi().abs().max(1.0)))
            .collect()
    }
}

/// Largest K for which the vertex sampler enumerates all 2^K corners.
pub const MAX_VERTEX_PARAMS: usize = 20;

/// Parameter points for `sampler`. Random points use ChaCha8 seeded with `seed`.
pub fn sample_points(p: &IntervalVector, sampler: Sampler, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let k = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corner = |bits: u64| -> Vec<f64> {
        p.iter().enumerate().map(|(j, x)| if bits >> j & 1 == 1 { x.hi() } else { x.lo() }).collect()
    };
    match sampler {
        Sampler::Random => (0..count)
            .map(|_| p.iter().map(|x| if x.is_point() { x.lo() } else { rng.gen_range(x.lo()..=x.hi()) }).collect())
            .collect(),
        Sampler::Vertices if k <= MAX_VERTEX_PARAMS => (0..1u64 << k).map(corner).collect(),
        Sampler::Grid if k <= MAX_VERTEX_PARAMS => {
            // m points per axis, the largest m >= 2 with m^K <= count
            let mut m = 2usize;
            while k > 0 && ((m + 1) as f64).powi(k as i32) <= count as f64 {
                m += 1;
            }
            let total = m.pow(k as u32);
            (0..total)
                .map(|mut idx| {
                    p.iter()
                        .map(|x| {
                            let i = idx % m;
                            idx /= m;
                            if i == m - 1 {
                                x.hi()
                            } else {
                                x.lo() + (i as f64 / (m - 1) as f64) * (x.hi() - x.lo())
                            }
                        })
                        .collect()
                })
                .collect()
        }
        // too many corners to enumerate: random corners instead
        _ => (0..count).map(|_| p.iter().map(|x| if rng.gen::<bool>() { x.hi() } else { x.lo() }).collect()).collect(),
    }
}

/// Solves `a x = b` with one step of refinement on a compensated residual, so
/// the result is accurate to a few ulps for well-conditioned matrices.
pub fn accurate_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = a.solve_vec(b)?;
    let n = b.len();
    let r: Vec<f64> = (0..n)
        .map(|i| {
            let (mut s, mut c) = (b[i], 0.0);
            for j in 0..n {
                let (p, ep) = signed_mul(-a[(i, j)], x[j]);
                let (t, es) = signed_add(s, p);
                s = t;
                c += es + ep;
            }
            s + c
        })
        .collect();
    let dx = a.solve_vec(&r)?;
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularMatrix)
    }
}

fn signed_add(a: f64, b: f64) -> (f64, f64) {
    let (s, _) = add_with_err(a, b);
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn signed_mul(a: f64, b: f64) -> (f64, f64) {
    let (p, _) = mul_with_err(a, b);
    (p, a.mul_add(b, -p))
}

/// Hull of the solutions of `sys` at `count` sampled parameter points.
/// Singular samples are skipped and counted.
pub fn sample_hull(sys: &ParametricSystem, sampler: Sampler, count: usize, seed: u64) -> Result<SampledHull> {
    let points = sample_points(sys.params(), sampler, count, seed);
    let sols: Vec<Option<Vec<f64>>> = points
        .par_iter()
        .map(|p| accurate_solve(&sys.matrix_at(p), &sys.rhs_at(p)).ok())
        .collect();
    let skipped = sols.iter().filter(|s| s.is_none()).count();
    let mut it = sols.into_iter().flatten();
    let first = it.next().ok_or(Error::AllSamplesSingular(points.len()))?;
    let mut bounds = IntervalVector::from_points(&first);
    let mut used = 1;
    for x in it {
        bounds.include_point(&x);
        used += 1;
    }
    Ok(SampledHull { bounds, samples_used: used, skipped, sampler, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `A^(k) = a bᵀ`
    Ab,
    /// `A^(k) = a aᵀ`
    Aa,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Ab => "ab",
            Variant::Aa => "aa",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ab" => Ok(Variant::Ab),
            "aa" => Ok(Variant::Aa),
            _ => Err(Error::InvalidInput(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Midpoint {
    Identity,
    /// Entries uniform in [-8, 8].
    RandomPm8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Rank1,
    HigherRank,
    Nonidmid,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rank1" => Ok(Family::Rank1),
            "hrank" | "higher_rank" => Ok(Family::HigherRank),
            "nonidmid" => Ok(Family::Nonidmid),
            _ => Err(Error::InvalidInput(format!("unknown family `{s}` (rank1, hrank, nonidmid)"))),
        }
    }
}

impl Family {
    /// Strategies compared on this family.
    pub fn strategies(self) -> Vec<&'static str> {
        match self {
            Family::Rank1 => vec!["s0", "s1", "s2", "s3"],
            Family::HigherRank => vec!["s1", "s2", "s3"],
            Family::Nonidmid => vec!["lu", "lu+s0", "svd", "svd+s0", "qr", "qr+s0"],
        }
    }
}

/// Random systems `A(p) = A^(0) + Σ p_k A_k B_kᵀ`, `p_k ∈ [-1, 1]`, where the
/// entries of the n×rank factors `A_k`, `B_k` are uniform in
/// `u + [-spread·k, spread·k]` and `v + [-spread·k, spread·k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub k: usize,
    pub rank: usize,
    pub u: Interval,
    pub v: Interval,
    pub spread: f64,
    pub variant: Variant,
    pub midpoint: Midpoint,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn rank_one(n: usize, k: usize, seed: u64) -> Self {
        EnsembleSpec {
            n,
            k,
            rank: 1,
            u: Interval::checked(-0.5, 1.0),
            v: Interval::checked(2.0, 2.5),
            spread: 0.3,
            variant: Variant::Ab,
            midpoint: Midpoint::Identity,
            seed,
        }
    }

    pub fn higher_rank(n: usize, k: usize, rank: usize, seed: u64) -> Self {
        EnsembleSpec { rank, ..Self::rank_one(n, k, seed) }
    }

    pub fn nonidmid(n: usize, k: usize, seed: u64) -> Self {
        EnsembleSpec {
            u: Interval::checked(-1.0, 2.0),
            v: Interval::checked(2.0, 3.0),
            spread: 0.2,
            midpoint: Midpoint::RandomPm8,
            ..Self::rank_one(n, k, seed)
        }
    }

    pub fn family(family: Family, n: usize, k: usize, rank: usize, seed: u64) -> Self {
        match family {
            Family::Rank1 => Self::rank_one(n, k, seed),
            Family::HigherRank => Self::higher_rank(n, k, rank, seed),
            Family::Nonidmid => Self::nonidmid(n, k, seed),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.rank == 0 || self.rank > self.n {
            return Err(Error::InvalidInput("need n >= 1, K >= 1 and 1 <= rank <= n".into()));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidInput("spread must be positive".into()));
        }
        Ok(())
    }

    /// Instance `i` of the ensemble. Stream `i·2^16` of ChaCha8 seeded with
    /// `seed` draws the midpoint, stream `i·2^16 + k` draws the factors of `A_k`.
    pub fn generate(&self, instance: u64) -> Result<AffineLinearSystem> {
        self.validate()?;
        let n = self.n;
        let rng_for = |stream: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(self.seed);
            r.set_stream((instance << 16) | stream);
            r
        };
        let a0 = match self.midpoint {
            Midpoint::Identity => Matrix::identity(n),
            Midpoint::RandomPm8 => {
                let mut r = rng_for(0);
                Matrix::from_fn(n, n, |_, _| r.gen_range(-8.0..=8.0))
            }
        };
        let mut mats = vec![a0];
        for k in 1..=self.k {
            let mut r = rng_for(k as u64);
            let w = self.spread * k as f64;
            let mut draw = |base: Interval| -> Matrix {
                Matrix::from_fn(n, self.rank, |_, _| r.gen_range(base.lo() - w..=base.hi() + w))
            };
            let a = draw(self.u);
            let b = draw(self.v);
            let rhs = match self.variant {
                Variant::Ab => b,
                Variant::Aa => a.clone(),
            };
            mats.push(a.try_mul(&rhs.transpose())?);
        }
        let vecs = vec![vec![0.0; n]; self.k + 1];
        AffineLinearSystem::new(mats, vecs, IntervalVector::new(vec![Interval::checked(-1.0, 1.0); self.k]))
    }
}

/// `ρ(A^Δ) / ρ(H^Δ)` for one strategy, where `A^Δ = Σ p^Δ_k |A^(k)|`.
/// `None` when either radius is zero or the midpoint is singular.
pub fn spectral_ratio(
    sys: &AffineLinearSystem,
    strategy: &str,
    registry: &StrategyRegistry,
    opts: &BuildOptions,
) -> Result<Option<f64>> {
    let affine = sys.to_interval_affine(Rounding::Fast)?;
    let num = affine.radius().perron_root()?;
    let pc = match registry.build(strategy, &affine, opts) {
        Ok(pc) => pc,
        Err(Error::SingularMidpoint | Error::SingularMatrix | Error::ZeroPivot(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let den = radius_matrix(&pc, &affine)?.perron_root()?;
    Ok((num > 0.0 && den > 0.0 && num.is_finite() && den.is_finite()).then(|| num / den))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStat {
    pub strategy: String,
    pub geo_mean: f64,
    pub used: usize,
    pub skipped: usize,
}

/// Geometric mean of [`spectral_ratio`] per strategy over `systems`.
/// Systems and strategies are evaluated concurrently; the reduction runs in
/// system order so results do not depend on scheduling.
pub fn ratio_statistics(
    systems: &[AffineLinearSystem],
    strategies: &[&str],
    opts: &BuildOptions,
) -> Result<Vec<RatioStat>> {
    let registry = StrategyRegistry::standard();
    let ratios: Vec<Vec<Option<f64>>> = systems
        .par_iter()
        .map(|sys| strategies.iter().map(|s| spectral_ratio(sys, s, &registry, opts)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(strategies
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let logs: Vec<f64> = ratios.iter().filter_map(|r| r[j]).map(f64::ln).collect();
            let geo_mean = if logs.is_empty() { f64::NAN } else { (logs.iter().sum::<f64>() / logs.len() as f64).exp() };
            RatioStat { strategy: s.to_string(), geo_mean, used: logs.len(), skipped: systems.len() - logs.len() }
        })
        .collect())
}

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rank: usize,
    pub variant: String,
    pub strategy: String,
    pub geo_mean: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Generates `reps` instances of `spec` and summarizes the strategies on them.
pub fn run_experiment(
    spec: &EnsembleSpec,
    reps: usize,
    strategies: &[&str],
    opts: &BuildOptions,
) -> Result<Vec<ExperimentRow>> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be positive".into()));
    }
    let systems = (0..reps as u64).into_par_iter().map(|i| spec.generate(i)).collect::<Result<Vec<_>>>()?;
    let stats = ratio_statistics(&systems, strategies, opts)?;
    Ok(stats
        .into_iter()
        .map(|s| ExperimentRow {
            n: spec.n,
            k: spec.k,
            rank: spec.rank,
            variant: spec.variant.to_string(),
            strategy: s.strategy,
            geo_mean: s.geo_mean,
            reps,
            seed: spec.seed,
        })
        .collect())
}

pub fn write_csv(rows: &[ExperimentRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}
