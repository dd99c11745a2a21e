//! End-to-end checks of the published behaviour. Prints one PASS/FAIL line
//! per criterion and fails unless exactly the known failures fail.
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ipls::examples::{self, PaperExample};
use ipls::interval::BinOp;
use ipls::model::{AffineLinearSystem, IntervalAffineSystem, ParametricSystem};
use ipls::oracle::{run_experiment, sample_hull, EnsembleSpec, Family, SampledHull, Sampler};
use ipls::precond::{apply, build_s0, strong_regularity, BuildOptions, Order, Preconditioner, StrategyRegistry};
use ipls::raf::{MulMode, RevisedAffineForm};
use ipls::solve::{solve_parametric, width_gain, EnclosureMethod, MethodRegistry, Phbr, SolveOptions, SolveResult};
use ipls::{Error, Interval, IntervalVector, Matrix, Rounding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Criteria that fail for documented reasons.
const KNOWN_FAILURES: &[usize] = &[2];

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ex(id: &str, delta: Option<f64>) -> PaperExample {
    examples::build(id, delta).unwrap()
}

fn solve(sys: &ParametricSystem, method: &str, strategy: &str) -> ipls::Result<SolveResult> {
    solve_parametric(sys, method, strategy, &SolveOptions::default(), &BuildOptions::default())
}

fn close(x: &Interval, y: &Interval, tol: f64) -> bool {
    (x.lo() - y.lo()).abs() <= tol && (x.hi() - y.hi()).abs() <= tol
}

fn box_close(x: &IntervalVector, y: &IntervalVector, tol: f64) -> bool {
    x.len() == y.len() && x.iter().zip(y.iter()).all(|(a, b)| close(a, b, tol))
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let el = t.elapsed();
    if el > limit {
        return Err(format!("took {el:.2?}, limit {limit:?}"));
    }
    Ok(())
}

fn affine_of(sys: &ParametricSystem) -> IntervalAffineSystem {
    sys.affine_transform(MulMode::Chebyshev, Rounding::Rigorous).unwrap()
}

fn rho(sys: &IntervalAffineSystem, strategy: &str) -> f64 {
    let pc = StrategyRegistry::standard().build(strategy, sys, &BuildOptions::default()).unwrap();
    strong_regularity(&pc, sys).unwrap().rho
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let e = ex("ex1", None);
    let phbr = solve(&e.system, "phbr", "right").map_err(|e| e.to_string())?;
    let pki = solve(&e.system, "pki", "right").map_err(|e| e.to_string())?;
    ensure!(box_close(&phbr.outer, &e.reference_box("phbr right outer").unwrap(), 1e-4), "PHBR_R outer {}", phbr.outer);
    ensure!(box_close(&phbr.outer, &e.reference_box("hull").unwrap(), 1e-4), "PHBR_R is not the hull: {}", phbr.outer);
    ensure!(box_close(&pki.outer, &e.reference_box("pki right outer").unwrap(), 1e-4), "PKI_R outer {}", pki.outer);
    let inner: Option<Vec<Interval>> = pki.inner.0.iter().copied().collect();
    let inner = IntervalVector::new(inner.ok_or("PKI_R inner estimate is empty")?);
    ensure!(box_close(&inner, &e.reference_box("pki right inner").unwrap(), 1e-4), "PKI_R inner {inner}");
    within(t, Duration::from_secs(1))?;
    Ok(format!("PHBR_R {} / PKI_R {} inner {}", phbr.outer, pki.outer, inner))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let e0 = ex("ex0", None);
    let a0 = affine_of(&e0.system);
    let custom = e0.custom.clone().unwrap();
    let checks0 = [
        ("ex0 left", rho(&a0, "left"), 1.5, 1e-10),
        ("ex0 right", rho(&a0, "right"), 1.5, 1e-10),
        ("ex0 custom", strong_regularity(&custom, &a0).unwrap().rho, 0.5, 1e-10),
    ];
    let e1 = affine_of(&ex("ex1", None).system);
    let e3 = affine_of(&ex("ex3", None).system);
    let checks = checks0.into_iter().chain([
        ("ex1 left", rho(&e1, "left"), 1.25, 1e-9),
        ("ex1 right", rho(&e1, "right"), 0.75, 1e-9),
        ("ex3 left", rho(&e3, "left"), 1.12, 0.01),
        ("ex3 right", rho(&e3, "right"), 0.97, 0.01),
    ]);
    for (name, got, want, tol) in checks {
        if (got - want).abs() > tol {
            failures.push(format!("{name} {got} vs {want}"));
        }
    }
    for delta in ["0.01", "0.55"] {
        let e2 = ex("ex2", Some(delta.parse().unwrap()));
        let a2 = affine_of(&e2.system);
        for s in ["left", "right", "lu", "svd", "qr"] {
            let want = e2.reference_scalar(&format!("rho {s} @{delta}")).unwrap();
            let got = rho(&a2, s);
            if ((got - want) / want).abs() > 1e-4 {
                failures.push(format!("ex2 {s} @{delta}: {got:.6} vs {want}"));
            }
        }
    }
    within(t, Duration::from_secs(1))?;
    if failures.is_empty() {
        Ok("ex0, ex1, ex3 and all ex2 radii match".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_3() -> Outcome {
    let e = ex("ex3", None);
    let r = solve(&e.system, "pki", "right").map_err(|e| e.to_string())?;
    let want = e.reference_box("pki right outer").unwrap();
    for (got, w) in r.outer.iter().zip(want.iter()) {
        for (a, b) in [(got.lo(), w.lo()), (got.hi(), w.hi())] {
            ensure!(((a - b) / b).abs() <= 1e-3, "PKI_R {} vs {}", r.outer, want);
        }
    }
    let hull = e.reference_box("hull").unwrap();
    ensure!(hull.is_subset_of(&r.outer), "published hull not inside {}", r.outer);
    match solve(&e.system, "pki", "left") {
        Err(Error::NotStronglyRegular { rho }) => Ok(format!("PKI_R {} ({} steps), PKI_L rejected at rho {rho:.4}", r.outer, r.iterations)),
        other => Err(format!("PKI_L should be rejected, got {other:?}")),
    }
}

fn random_affine(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> AffineLinearSystem {
    let mut a = vec![Matrix::from_fn(n, n, |i, j| if i == j { 3.0 } else { 0.0 } + rng.gen_range(-1.0..1.0))];
    let mut b = vec![(0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>()];
    for _ in 0..k {
        a.push(Matrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale)));
        b.push((0..n).map(|_| rng.gen_range(-0.3..0.3)).collect());
    }
    let p = IntervalVector::new((0..k).map(|_| Interval::new(-0.5, 0.5).unwrap()).collect());
    AffineLinearSystem::new(a, b, p).unwrap()
}

fn hull_of(sys: &ParametricSystem, random: usize, seed: u64) -> SampledHull {
    let r = sample_hull(sys, Sampler::Random, random, seed).unwrap();
    let v = sample_hull(sys, Sampler::Vertices, random, seed).unwrap();
    r.merge(&v).unwrap()
}

// one system against every applicable method and strategy; returns how many
// enclosures were checked
fn soundness(name: &str, sys: &ParametricSystem, seed: u64) -> Result<usize, String> {
    let small = hull_of(sys, 10_000, seed).bounds;
    let big = hull_of(sys, 100_000, seed + 1).inflated(1e-9);
    let mut checked = 0;
    for method in ["pki", "phbr"] {
        for strategy in ["left", "right", "lu", "svd", "qr"] {
            let r = match solve(sys, method, strategy) {
                Ok(r) => r,
                Err(Error::NotStronglyRegular { .. } | Error::ZeroPivot(_) | Error::SingularMidpoint) => continue,
                Err(e) => return Err(format!("{name} {method} {strategy}: {e}")),
            };
            ensure!(small.is_subset_of(&r.outer), "{name} {method} {strategy}: samples {small} escape {}", r.outer);
            ensure!(r.inner.is_subset_of(&r.outer), "{name} {method} {strategy}: inner not inside outer");
            for (i, inner) in r.inner.0.iter().enumerate() {
                if let Some(x) = inner {
                    ensure!(x.is_subset_of(&big[i]), "{name} {method} {strategy}: inner {x:?} exceeds hull {:?}", big[i]);
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let deltas = [("ex2", 0.1), ("okumura", 0.3), ("ac_circuit", 0.25), ("frame", 0.3)];
    let mut checked = 0;
    for (i, id) in examples::IDS.iter().enumerate() {
        let delta = deltas.iter().find(|d| d.0 == *id).map(|d| d.1);
        checked += soundness(id, &ex(id, delta).system, 100 + i as u64)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut systems = 0;
    while systems < 50 {
        let n = if systems % 2 == 0 { 3 } else { 5 };
        let lin = random_affine(&mut rng, n, 3, 0.4);
        let affine = lin.to_interval_affine(Rounding::Fast).unwrap();
        if rho(&affine, "lu") >= 0.9 {
            continue;
        }
        checked += soundness(&format!("random #{systems}"), &lin.to_parametric().unwrap(), 1000 + systems)?;
        systems += 1;
    }
    within(t, Duration::from_secs(120))?;
    Ok(format!("{checked} enclosures on {} examples and 50 random systems", examples::IDS.len()))
}

fn vertex_hull(delta: &Matrix, b: &[f64], brad: &[f64]) -> Vec<(f64, f64)> {
    let n = b.len();
    let bits = n * n + n;
    let mut hull = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for mask in 0u32..(1 << bits) {
        let sign = |k: usize| if mask >> k & 1 == 1 { 1.0 } else { -1.0 };
        let a = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + sign(i * n + j) * delta[(i, j)]);
        let rhs: Vec<f64> = (0..n).map(|i| b[i] + sign(n * n + i) * brad[i]).collect();
        let x = a.solve_vec(&rhs).unwrap();
        for i in 0..n {
            hull[i] = (hull[i].0.min(x[i]), hull[i].1.max(x[i]));
        }
    }
    hull
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (n, count) in [(2, 100), (3, 20)] {
        let mut done = 0;
        while done < count {
            let delta = Matrix::from_fn(n, n, |_, _| rng.gen_range(0.0..0.45));
            if delta.perron_root().unwrap() >= 0.9 {
                continue;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let brad: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.5)).collect();
            let sys = IntervalAffineSystem::new(vec![Matrix::identity(n)], delta.clone(), vec![b.clone()], brad.clone()).unwrap();
            let r = Phbr.solve(&sys, &Preconditioner::identity(n), &SolveOptions::default()).map_err(|e| e.to_string())?;
            for (i, (lo, hi)) in vertex_hull(&delta, &b, &brad).into_iter().enumerate() {
                let scale = lo.abs().max(hi.abs()).max(1e-300);
                let err = (r.outer[i].lo() - lo).abs().max((r.outer[i].hi() - hi).abs()) / scale;
                worst = worst.max(err);
                ensure!(err <= 1e-9, "n = {n}: {:?} vs [{lo}, {hi}]", r.outer[i]);
            }
            done += 1;
        }
    }
    Ok(format!("120 systems, worst relative deviation {worst:.1e}"))
}

fn hull_subset(inner: &IntervalAffineSystem, outer: &IntervalAffineSystem, slack: f64) -> bool {
    let (ci, co) = (inner.midpoint(), outer.midpoint());
    let (ri, ro) = (inner.radius(), outer.radius());
    (0..ci.rows()).all(|i| {
        (0..ci.cols()).all(|j| {
            let s = slack * (1.0 + co[(i, j)].abs() + ro[(i, j)]);
            ci[(i, j)] - ri[(i, j)] >= co[(i, j)] - ro[(i, j)] - s && ci[(i, j)] + ri[(i, j)] <= co[(i, j)] + ro[(i, j)] + s
        })
    })
}

fn random_interval_affine(rng: &mut ChaCha8Rng, n: usize, mats: Vec<Matrix>) -> IntervalAffineSystem {
    let k = mats.len();
    let mut c = vec![Matrix::from_fn(n, n, |i, j| if i == j { 3.0 } else { 0.0 } + rng.gen_range(-1.0..1.0))];
    c.extend(mats);
    let rhs = (0..=k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    IntervalAffineSystem::new(c, Matrix::zeros(n, n), rhs, vec![0.0; n]).unwrap()
}

fn build(name: &str, sys: &IntervalAffineSystem) -> Preconditioner {
    StrategyRegistry::standard().build(name, sys, &BuildOptions::default()).unwrap()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 4;
    for i in 0..200 {
        let mats = (0..3).map(|_| Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.3..0.3))).collect();
        let sys = random_interval_affine(&mut rng, n, mats);
        for name in ["left", "right", "lu", "svd", "qr"] {
            let pc = build(name, &sys);
            for mode in [Rounding::Fast, Rounding::Rigorous] {
                let h1 = apply(&pc, &sys, Order::FactorFirst, mode).unwrap();
                let h2 = apply(&pc, &sys, Order::RelaxFirst, mode).unwrap();
                ensure!(hull_subset(&h1, &h2, 1e-14), "H1 not inside H2 on system {i} ({name})");
            }
        }
    }
    for i in 0..100 {
        // one nonzero per column; the transpose has one per row
        let mats: Vec<Matrix> = (0..3)
            .map(|_| {
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
                Matrix::from_fn(n, n, |i, j| if rows[j] == i { vals[j] } else { 0.0 })
            })
            .collect();
        let col = random_interval_affine(&mut rng, n, mats.clone());
        let row = random_interval_affine(&mut rng, n, mats.iter().map(Matrix::transpose).collect());
        for (sys, name) in [(col, "left"), (row, "right")] {
            let pc = build(name, &sys);
            let h1 = apply(&pc, &sys, Order::FactorFirst, Rounding::Fast).unwrap();
            let h2 = apply(&pc, &sys, Order::RelaxFirst, Rounding::Fast).unwrap();
            ensure!(hull_subset(&h1, &h2, 1e-14) && hull_subset(&h2, &h1, 1e-14), "{name} hulls differ on system {i}");
        }
    }
    for i in 0..100 {
        let mats: Vec<Matrix> = (0..3)
            .map(|_| {
                let r = rng.gen_range(0..n);
                let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
                Matrix::from_fn(n, n, |i, j| if i == r { vals[j] } else { 0.0 })
            })
            .collect();
        let sys = random_interval_affine(&mut rng, n, mats);
        let out = apply(&build("right", &sys), &sys, Order::FactorFirst, Rounding::Fast).unwrap();
        for ck in &out.matrices()[1..] {
            let rows = (0..n).filter(|&i| ck.row(i).iter().any(|x| *x != 0.0)).count();
            ensure!(rows <= 1, "class one lost on system {i}");
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s = build_s0(&[a.clone()], n).map_err(|e| e.to_string())?;
        let sys = IntervalAffineSystem::new(
            vec![Matrix::identity(n), Matrix::from_fn(n, n, |i, j| a[i] * b[j])],
            Matrix::zeros(n, n),
            vec![vec![0.0; n]; 2],
            vec![0.0; n],
        )
        .unwrap();
        let got = strong_regularity(&s, &sys).unwrap().rho;
        let want = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>().abs();
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 1e-9, "S0 instance {i}: {got} vs {want}");
    }
    Ok(format!("200 + 200 + 100 systems, S0 worst deviation {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sr = |m: &Matrix| m.spectral_radius().unwrap();
    let mut tight: f64 = 0.0;
    for _ in 0..10_000 {
        let (c, s): (f64, f64) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let b = Matrix::from_rows(&[vec![c, s], vec![-s, c]]).unwrap();
        ensure!(sr(&b.abs()) <= 2f64.sqrt() * sr(&b) * (1.0 + 1e-12), "bound fails at c = {c}, s = {s}");
        let eq = Matrix::from_rows(&[vec![c, c], vec![-c, c]]).unwrap();
        let gap = (sr(&eq.abs()) - 2f64.sqrt() * sr(&eq)).abs() / sr(&eq);
        tight = tight.max(gap);
        ensure!(gap <= 1e-6, "not tight at c = s = {c}");
    }
    for _ in 0..10_000 {
        let f = rng.gen_range(0.0..10.0);
        let r = Matrix::from_fn(2, 2, |_, _| rng.gen_range(-5.0..5.0));
        if (r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)]).abs() < 1e-3 {
            continue;
        }
        let b = Matrix::from_rows(&[vec![f, 1.0], vec![-1.0, f]]).unwrap();
        let sim = &(&r * &b) * &r.inverse().unwrap();
        ensure!(sr(&b.abs()) <= sr(&sim.abs()) + 1e-9, "similarity beats the block at f = {f}");
    }
    Ok(format!("2 x 10^4 cases, tightness gap {tight:.1e}"))
}

fn gains(e: &PaperExample, worse: &SolveResult, better: &SolveResult) -> Vec<f64> {
    (0..e.components.len()).map(|i| width_gain(&better.outer[i], &worse.outer[i]).unwrap()).collect()
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for (id, delta) in [("okumura", 0.3), ("frame", 0.3), ("ac_circuit", 0.25)] {
        let e = ex(id, Some(delta));
        let l = solve(&e.system, "pki", "left").map_err(|err| format!("{id} left: {err}"))?;
        let lu = solve(&e.system, "pki", "lu").map_err(|err| format!("{id} lu: {err}"))?;
        let g = gains(&e, &l, &lu);
        ensure!(g.iter().all(|x| *x > 0.0), "{id}: PKI_LU not tighter everywhere: {g:?}");
        let min = g.iter().copied().fold(f64::INFINITY, f64::min);
        notes.push(format!("{id} min gain {min:.1}%"));
    }
    let e = ex("frame", Some(0.5));
    let l = solve(&e.system, "pki", "left").map_err(|err| err.to_string())?;
    let lu = solve(&e.system, "pki", "lu").map_err(|err| err.to_string())?;
    let (wl, wlu) = (e.reference_scalar("iterations left @0.5").unwrap(), e.reference_scalar("iterations lu @0.5").unwrap());
    ensure!(l.converged && lu.converged, "frame at 50% did not converge");
    ensure!(l.iterations > lu.iterations, "frame iterations {} vs {}", l.iterations, lu.iterations);
    for (got, want) in [(l.iterations as f64, wl), (lu.iterations as f64, wlu)] {
        ensure!((got - want).abs() <= 0.5 * want, "frame iterations {got} vs published {want}");
    }
    notes.push(format!("frame iterations {} / {}", l.iterations, lu.iterations));
    Ok(notes.join(", "))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let opts = BuildOptions::default();
    let stat = |rows: &[ipls::oracle::ExperimentRow], s: &str| rows.iter().find(|r| r.strategy == s).unwrap().geo_mean;
    let spec = EnsembleSpec::family(Family::Rank1, 10, 7, 1, 1);
    let rows = run_experiment(&spec, 100, &Family::Rank1.strategies(), &opts).map_err(|e| e.to_string())?;
    let (s0, s1, s2, s3) = (stat(&rows, "s0"), stat(&rows, "s1"), stat(&rows, "s2"), stat(&rows, "s3"));
    ensure!(s0 > s2.max(s3), "S0 {s0} not above S2 {s2} / S3 {s3}");
    ensure!(s2.min(s3) > s1, "S1 {s1} not below S2 {s2} / S3 {s3}");
    ensure!(s2.max(s3) / s2.min(s3) <= 1.25, "S2 {s2} and S3 {s3} differ by more than 25%");
    let spec = EnsembleSpec::family(Family::Nonidmid, 10, 7, 1, 1);
    let rows = run_experiment(&spec, 100, &Family::Nonidmid.strategies(), &opts).map_err(|e| e.to_string())?;
    let mut pairs = Vec::new();
    for base in ["lu", "svd", "qr"] {
        let (plain, s0) = (stat(&rows, base), stat(&rows, &format!("{base}+s0")));
        ensure!(s0 > plain, "{base}+s0 {s0} not above {base} {plain}");
        pairs.push(format!("{base} {plain:.3} < {s0:.3}"));
    }
    within(t, Duration::from_secs(300))?;
    Ok(format!("S0 {s0:.3} > S2 {s2:.3} ~ S3 {s3:.3} > S1 {s1:.3}; {}", pairs.join(", ")))
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let a = rng.gen_range(-1e3..1e3);
    Interval::new(a, a + rng.gen_range(0.0..1e3)).unwrap()
}

fn dyadic(rng: &mut ChaCha8Rng) -> Interval {
    let a = rng.gen_range(-800..800);
    Interval::new(a as f64 / 8.0, (a + rng.gen_range(0..800)) as f64 / 8.0).unwrap()
}

fn point_in(rng: &mut ChaCha8Rng, x: &Interval) -> f64 {
    (x.lo() + rng.gen_range(0.0..=1.0) * (x.hi() - x.lo())).clamp(x.lo(), x.hi())
}

fn random_form(rng: &mut ChaCha8Rng, k: usize) -> RevisedAffineForm {
    let devs = (0..k).map(|_| rng.gen_range(-10.0..10.0)).collect();
    RevisedAffineForm::new(rng.gen_range(-10.0..10.0), devs, rng.gen_range(0.0..3.0)).unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];
    for i in 0..10_000 {
        let (x, y) = (random_interval(&mut rng), random_interval(&mut rng));
        let (a, b) = (point_in(&mut rng, &x), point_in(&mut rng, &y));
        for op in ops {
            if op == BinOp::Div && y.contains(0.0) {
                continue;
            }
            let exact = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            };
            let z = Interval::binary_op(op, x, y, Rounding::Rigorous).unwrap();
            ensure!(z.contains(exact), "containment case {i} {op:?}");
            let (xs, ys) = (Interval::new(x.lo().min(a), a).unwrap(), Interval::new(b, y.hi().max(b)).unwrap());
            let small = Interval::binary_op(op, xs, ys, Rounding::Rigorous).unwrap();
            ensure!(small.is_subset_of(&z), "isotonicity case {i} {op:?}");
        }
        let (x, y, w) = (dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng));
        for mode in [Rounding::Fast, Rounding::Rigorous] {
            let lhs = x.mul(y.add(w, mode), mode);
            let rhs = x.mul(y, mode).add(x.mul(w, mode), mode);
            ensure!(lhs.is_subset_of(&rhs), "subdistributivity case {i}");
        }
    }
    let k = 3;
    for i in 0..10_000 {
        let (x, y) = (random_form(&mut rng, k), random_form(&mut rng, k));
        let e: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let (t1, t2) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let (vx, vy) = (x.eval(&e, t1), y.eval(&e, t2));
        let slack = 1e-12 * (1.0 + vx.abs()) * (1.0 + vy.abs()) * 100.0;
        let iv = x.to_interval(Rounding::Rigorous);
        ensure!(vx >= iv.lo() - slack && vx <= iv.hi() + slack, "RAF range case {i}");
        for mul in [MulMode::Chebyshev, MulMode::Trivial] {
            let z = x.mul(&y, mul, Rounding::Rigorous).unwrap();
            ensure!((vx * vy - z.eval(&e, 0.0)).abs() <= z.err() + slack, "RAF product case {i} {mul:?}");
        }
        for mode in [Rounding::Fast, Rounding::Rigorous] {
            let c = x.mul(&y, MulMode::Chebyshev, mode).unwrap().to_interval(mode);
            let t = x.mul(&y, MulMode::Trivial, mode).unwrap().to_interval(mode);
            let ulps = 4.0 * f64::EPSILON * t.mag();
            ensure!(c.lo() >= t.lo() - ulps && c.hi() <= t.hi() + ulps, "Chebyshev wider than trivial, case {i}");
        }
    }
    let mut compared = 0;
    let deltas = [("ex2", 0.1), ("okumura", 0.3), ("ac_circuit", 0.25), ("frame", 0.3)];
    for id in examples::IDS {
        let delta = deltas.iter().find(|d| d.0 == id).map(|d| d.1);
        let sys = ex(id, delta).system;
        for method in MethodRegistry::standard().names() {
            for strategy in ["left", "right", "lu", "svd", "qr"] {
                let run = |rounding| {
                    let opts = SolveOptions { rounding, ..SolveOptions::default() };
                    solve_parametric(&sys, &method, strategy, &opts, &BuildOptions::default())
                };
                if let (Ok(f), Ok(r)) = (run(Rounding::Fast), run(Rounding::Rigorous)) {
                    ensure!(f.outer.is_subset_of(&r.outer), "{id} {method} {strategy}: rigorous {} narrower than fast {}", r.outer, f.outer);
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("3 x 10^4 interval cases, 10^4 RAF cases, {compared} rigorous/fast pairs"))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "ex1 enclosures", criterion_1),
        (2, "regularity constants", criterion_2),
        (3, "ex3 enclosure", criterion_3),
        (4, "solver soundness", criterion_4),
        (5, "PHBR hull exactness", criterion_5),
        (6, "preconditioning algebra", criterion_6),
        (7, "block rotation", criterion_7),
        (8, "comparative results", criterion_8),
        (9, "ensemble orderings", criterion_9),
        (10, "arithmetic properties", criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name} [{:.2?}]: {detail}", t.elapsed()),
            Err(why) => {
                let known = if KNOWN_FAILURES.contains(&id) { " (known)" } else { "" };
                println!("FAIL {id:>2} {name}{known} [{:.2?}]: {why}", t.elapsed());
                failed.push(id);
            }
        }
    }
    if failed != KNOWN_FAILURES {
        eprintln!("unexpected acceptance outcome: failed {failed:?}, known {KNOWN_FAILURES:?}");
        std::process::exit(1);
    }
}
