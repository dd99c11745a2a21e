use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::interval::{Interval, IntervalVector};
use crate::model::AffineLinearSystem;

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn affine(a: Vec<Matrix>, p: Vec<Interval>) -> IntervalAffineSystem {
    let n = a[0].rows();
    let b = vec![vec![1.0; n]; a.len()];
    AffineLinearSystem::new(a, b, IntervalVector::new(p)).unwrap().to_interval_affine(Rounding::Fast).unwrap()
}

fn ex0() -> IntervalAffineSystem {
    affine(vec![Matrix::identity(2), m(&[&[-0.5, -1.0], &[0.5, 1.0]])], vec![Interval::UNIT])
}

fn ex1() -> IntervalAffineSystem {
    affine(
        vec![m(&[&[0.0, 0.0], &[2.0, 1.0]]), m(&[&[1.0, 2.0], &[0.0, 0.0]])],
        vec![Interval::new(0.5, 3.5).unwrap()],
    )
}

fn random_system(rng: &mut ChaCha8Rng, n: usize, k: usize) -> IntervalAffineSystem {
    let mut rand_m = |scale: f64| Matrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    let mut a = vec![&Matrix::identity(n).scale(4.0) + &rand_m(1.0)];
    for _ in 0..k {
        a.push(rand_m(0.3));
    }
    affine(a, vec![Interval::UNIT; k])
}

fn build(name: &str, sys: &IntervalAffineSystem) -> Result<Preconditioner> {
    StrategyRegistry::standard().build(name, sys, &BuildOptions::default())
}

#[test]
fn ex0_left_and_right_radius() {
    for name in ["left", "right"] {
        let pc = build(name, &ex0()).unwrap();
        let rep = strong_regularity(&pc, &ex0()).unwrap();
        assert_eq!(rep.hdelta, m(&[&[0.5, 1.0], &[0.5, 1.0]]));
        assert!((rep.rho - 1.5).abs() < 1e-10);
        assert!(!rep.strongly_regular);
    }
}

#[test]
fn ex0_double_custom() {
    let l = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let r = m(&[&[1.0, -1.0], &[0.0, 1.0]]);
    let pc = Preconditioner::new(l, r, "custom").unwrap();
    let rep = strong_regularity(&pc, &ex0()).unwrap();
    assert!((rep.rho - 0.5).abs() < 1e-10 && rep.strongly_regular);
    let hull = apply(&pc, &ex0(), Order::FactorFirst, Rounding::Fast).unwrap().hull().unwrap();
    let want = [[(1.0, 1.0), (0.0, 0.0)], [(-0.5, 0.5), (0.5, 1.5)]];
    for i in 0..2 {
        for j in 0..2 {
            let x = hull.get(i, j);
            assert!((x.lo() - want[i][j].0).abs() < 1e-15 && (x.hi() - want[i][j].1).abs() < 1e-15, "{i}{j}: {x}");
        }
    }
}

#[test]
fn ex1_left_and_right_rho() {
    let left = strong_regularity(&build("left", &ex1()).unwrap(), &ex1()).unwrap();
    let right = strong_regularity(&build("right", &ex1()).unwrap(), &ex1()).unwrap();
    assert!((left.rho - 1.25).abs() < 1e-9);
    assert!((right.rho - 0.75).abs() < 1e-9);
}

#[test]
fn report_json_shape() {
    let rep = strong_regularity(&build("right", &ex1()).unwrap(), &ex1()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["rho", "strategy", "strongly_regular"]);
}

#[test]
fn factorizing_strategies_invert_the_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let sys = random_system(&mut rng, 5, 2);
        let inv = sys.midpoint().inverse().unwrap();
        for name in ["left", "right", "lu", "svd", "qr"] {
            let pc = build(name, &sys).unwrap();
            let diff = &(&pc.r * &pc.l) - &inv;
            assert!(diff.norm_inf() <= 1e-8 * inv.norm_inf(), "{name}");
        }
    }
    let id = ex0();
    let pc = build("left", &id).unwrap();
    assert!(pc.l.is_identity() && pc.r.is_identity());
}

#[test]
fn lu_needs_nonzero_pivots() {
    let sys = affine(vec![m(&[&[0.0, 1.0], &[1.0, 0.0]]), Matrix::zeros(2, 2)], vec![Interval::UNIT]);
    assert_eq!(build("lu", &sys), Err(Error::ZeroPivot(1)));
    assert!(build("qr", &sys).is_ok());
    let singular = affine(vec![m(&[&[1.0, 2.0], &[2.0, 4.0]]), Matrix::zeros(2, 2)], vec![Interval::UNIT]);
    for name in ["left", "right", "lu", "svd", "qr", "s0", "lu+s1"] {
        assert_eq!(build(name, &singular), Err(Error::SingularMidpoint), "{name}");
    }
}

#[test]
fn s0_construction() {
    let pc = build_s0(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
    assert!(pc.l.is_identity() && pc.r.is_identity());
    let pc = build_s0(&[vec![1.0, 1.0]], 2).unwrap();
    let e = pc.l.matvec(&[1.0, 1.0]);
    assert!((e[0] - 1.0).abs() < 1e-15 && e[1].abs() < 1e-15);
    assert!((&(&pc.l * &pc.r) - &Matrix::identity(2)).max_abs() < 1e-15);
    assert_eq!(
        build_s0(&[vec![1.0, 2.0], vec![2.0, 4.0]], 2),
        Err(Error::DependentColumns { rank: 1, expected: 2 })
    );
}

#[test]
fn rank_one_s0_reaches_bta() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(2..7);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..1.3)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(1.7..2.8)).collect();
        let ab = Matrix::from_fn(n, n, |i, j| a[i] * b[j]);
        let sys = affine(vec![Matrix::identity(n), ab], vec![Interval::UNIT]);
        let rho = strong_regularity(&build("s0", &sys).unwrap(), &sys).unwrap().rho;
        let bta: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((rho - bta.abs()).abs() <= 1e-9 * (1.0 + bta.abs()), "{rho} vs {bta}");
    }
}

#[test]
fn identity_preconditioner_changes_nothing() {
    let sys = ex1();
    let out = apply(&Preconditioner::identity(2), &sys, Order::FactorFirst, Rounding::Fast).unwrap();
    assert_eq!(out, sys);
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

#[test]
fn factor_first_is_inside_relax_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let sys = random_system(&mut rng, 4, 3);
        for name in ["left", "right", "lu", "svd", "qr"] {
            let pc = build(name, &sys).unwrap();
            for mode in [Rounding::Fast, Rounding::Rigorous] {
                let h1 = apply(&pc, &sys, Order::FactorFirst, mode).unwrap();
                let h2 = apply(&pc, &sys, Order::RelaxFirst, mode).unwrap();
                assert!(hull_subset(&h1, &h2, 1e-14), "{name}");
            }
        }
    }
}

#[test]
fn column_one_makes_orders_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let n = 4;
        let sys = random_system(&mut rng, n, 0);
        let mut a = vec![sys.midpoint().clone()];
        for _ in 0..3 {
            // one nonzero per column, rows chosen at random
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
            a.push(Matrix::from_fn(n, n, |i, j| if rows[j] == i { vals[j] } else { 0.0 }));
        }
        let col = affine(a.clone(), vec![Interval::UNIT; 3]);
        let pc = build("left", &col).unwrap();
        assert_eq!(Order::Auto.resolve(&pc, &col), Order::RelaxFirst);
        let h1 = apply(&pc, &col, Order::FactorFirst, Rounding::Fast).unwrap();
        let h2 = apply(&pc, &col, Order::RelaxFirst, Rounding::Fast).unwrap();
        assert!(hull_subset(&h2, &h1, 1e-14) && hull_subset(&h1, &h2, 1e-14));

        let rowwise: Vec<Matrix> = a.iter().enumerate().map(|(k, m)| if k == 0 { m.clone() } else { m.transpose() }).collect();
        let row = affine(rowwise, vec![Interval::UNIT; 3]);
        let pc = build("right", &row).unwrap();
        assert_eq!(Order::Auto.resolve(&pc, &row), Order::RelaxFirst);
        let h1 = apply(&pc, &row, Order::FactorFirst, Rounding::Fast).unwrap();
        let h2 = apply(&pc, &row, Order::RelaxFirst, Rounding::Fast).unwrap();
        assert!(hull_subset(&h2, &h1, 1e-14));
        assert_eq!(Order::Auto.resolve(&build("lu", &row).unwrap(), &row), Order::FactorFirst);
    }
}

#[test]
fn dependent_parameter_separates_the_orders() {
    let sys = ex0();
    let pc = Preconditioner::new(m(&[&[1.0, 1.0], &[0.0, 1.0]]), m(&[&[1.0, -1.0], &[0.0, 1.0]]), "custom").unwrap();
    let h1 = apply(&pc, &sys, Order::FactorFirst, Rounding::Fast).unwrap();
    let h2 = apply(&pc, &sys, Order::RelaxFirst, Rounding::Fast).unwrap();
    assert!(hull_subset(&h1, &h2, 0.0) && !hull_subset(&h2, &h1, 0.0));
}

#[test]
fn right_preconditioning_keeps_class_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let n = 4;
        let base = random_system(&mut rng, n, 0);
        let row = rng.gen_range(0..n);
        let c1 = Matrix::from_fn(n, n, |i, _| if i == row { rng.gen_range(-0.3..0.3) } else { 0.0 });
        let sys = affine(vec![base.midpoint().clone(), c1], vec![Interval::UNIT]);
        let pc = build("right", &sys).unwrap();
        let out = apply(&pc, &sys, Order::FactorFirst, Rounding::Fast).unwrap();
        let touched = (0..n).filter(|&i| out.matrices()[1].row(i).iter().any(|x| *x != 0.0)).count();
        assert!(touched <= 1);
    }
}

#[test]
fn zero_radius_gives_zero_matrix() {
    let sys = affine(vec![m(&[&[2.0, 1.0], &[1.0, 3.0]]), m(&[&[1.0, 0.0], &[0.0, 1.0]])], vec![Interval::point(0.5)]);
    let rep = strong_regularity(&build("lu", &sys).unwrap(), &sys).unwrap();
    assert!(rep.hdelta.is_zero() && rep.rho == 0.0 && rep.strongly_regular);
}

#[test]
fn registry_resolves_names_and_combinations() {
    let reg = StrategyRegistry::standard();
    assert_eq!(reg.names(), ["left", "lu", "qr", "right", "s0", "s1", "s2", "s3", "svd"]);
    assert_eq!(reg.get("LU+S0").unwrap().name(), "lu+s0");
    assert!(matches!(reg.get("lu+s9"), Err(Error::UnknownStrategy(_))));
    assert!(matches!(reg.get("bogus"), Err(Error::UnknownStrategy(_))));
    let mut reg = reg;
    reg.register(std::sync::Arc::new(FixedStrategy {
        name: "custom".into(),
        l: Matrix::identity(2),
        r: Matrix::identity(2),
    }));
    assert!(reg.build("custom", &ex1(), &BuildOptions::default()).is_ok());
    assert!(reg.build("custom+s1", &ex1(), &BuildOptions::default()).is_ok());
}

#[test]
fn sampled_strategies_are_deterministic_and_no_worse_than_one_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sys = random_system(&mut rng, 5, 3);
    let reg = StrategyRegistry::standard();
    for name in ["s2", "s3", "lu+s2"] {
        let opts = BuildOptions { seed: 7, candidates: 50 };
        let a = reg.build(name, &sys, &opts).unwrap();
        let b = reg.build(name, &sys, &opts).unwrap();
        assert_eq!(a, b);
        let one = reg.build(name, &sys, &BuildOptions { seed: 7, candidates: 1 }).unwrap();
        let rho = |pc: &Preconditioner| strong_regularity(pc, &sys).unwrap().rho;
        assert!(rho(&a) <= rho(&one));
    }
}

#[test]
fn schur_strategies_are_similarities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sys = random_system(&mut rng, 5, 3);
    for name in ["s1", "s2", "s3", "qr+s0", "svd+s1"] {
        let pc = build(name, &sys).unwrap();
        let inv = sys.midpoint().inverse().unwrap();
        assert!((&(&pc.r * &pc.l) - &inv).norm_inf() <= 1e-8 * inv.norm_inf(), "{name}");
    }
}
