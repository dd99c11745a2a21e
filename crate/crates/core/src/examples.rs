//! The worked systems: ex0, fig1, ex1, ex2, ex3, okumura, ac_circuit, frame.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector, Rounding};
use crate::model::{complex_to_real, parse_expr, ParamExpr, ParametricSystem, ProblemFile};
use crate::precond::Preconditioner;
use crate::realmat::Matrix;

pub const IDS: [&str; 8] = ["ex0", "fig1", "ex1", "ex2", "ex3", "okumura", "ac_circuit", "frame"];

/// Ids whose construction needs a tolerance `δ`.
pub fn needs_delta(id: &str) -> bool {
    matches!(id, "ex2" | "okumura" | "ac_circuit" | "frame")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RefValue {
    Scalar(f64),
    Row(Vec<f64>),
    Box(Vec<[f64; 2]>),
}

/// A published number together with a short note on where it comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub label: String,
    pub value: RefValue,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct PaperExample {
    pub id: String,
    pub delta: Option<f64>,
    pub system: ParametricSystem,
    /// Names of the solution components.
    pub components: Vec<String>,
    pub published: Vec<Reference>,
    /// Hand-made preconditioner that comes with the example, if any.
    pub custom: Option<Preconditioner>,
    pub metadata: Map<String, Value>,
}

impl PaperExample {
    pub fn reference(&self, label: &str) -> Option<&RefValue> {
        self.published.iter().find(|r| r.label == label).map(|r| &r.value)
    }

    pub fn reference_box(&self, label: &str) -> Option<IntervalVector> {
        match self.reference(label)? {
            RefValue::Box(b) => Some(IntervalVector::new(b.iter().map(|&[l, h]| Interval::checked(l, h)).collect())),
            _ => None,
        }
    }

    pub fn reference_scalar(&self, label: &str) -> Option<f64> {
        match self.reference(label)? {
            RefValue::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn reference_row(&self, label: &str) -> Option<&[f64]> {
        match self.reference(label)? {
            RefValue::Row(r) => Some(r),
            _ => None,
        }
    }

    /// Problem file with the example's metadata attached.
    pub fn problem_file(&self) -> ProblemFile {
        let mut f = ProblemFile::from_system(&self.system);
        f.metadata = Some(Value::Object(self.metadata.clone()));
        f
    }
}

/// Builds example `id`; `delta` is required for the tolerance-parameterized ones
/// and ignored otherwise.
pub fn build(id: &str, delta: Option<f64>) -> Result<PaperExample> {
    let id = id.to_ascii_lowercase();
    let d = if needs_delta(&id) {
        match delta {
            Some(d) if d.is_finite() && d >= 0.0 => Some(d),
            Some(d) => return Err(Error::InvalidInput(format!("tolerance must be finite and nonnegative, got {d}"))),
            None => return Err(Error::InvalidInput(format!("example `{id}` needs a tolerance (--delta)"))),
        }
    } else {
        None
    };
    let mut ex = match id.as_str() {
        "ex0" => ex0(),
        "fig1" => fig1(),
        "ex1" => ex1(),
        "ex2" => ex2(d.unwrap()),
        "ex3" => ex3(),
        "okumura" => okumura(d.unwrap()),
        "ac_circuit" => ac_circuit(d.unwrap()),
        "frame" => frame(d.unwrap()),
        _ => return Err(Error::UnknownExample(id)),
    }?;
    ex.metadata.insert("example".into(), json!(ex.id));
    if let Some(d) = ex.delta {
        ex.metadata.insert("delta".into(), json!(d));
    }
    ex.metadata.insert("components".into(), json!(ex.components));
    Ok(ex)
}

/// Every example, with `delta` for the tolerance-parameterized ones.
pub fn registry(delta: f64) -> Result<Vec<PaperExample>> {
    IDS.iter().map(|id| build(id, Some(delta))).collect()
}

fn reference(label: &str, value: RefValue, note: &str) -> Reference {
    Reference { label: label.into(), value, note: note.into() }
}

fn boxed(b: &[[f64; 2]]) -> RefValue {
    RefValue::Box(b.to_vec())
}

struct Builder {
    names: Vec<String>,
    params: Vec<Interval>,
}

impl Builder {
    fn new() -> Self {
        Builder { names: vec![], params: vec![] }
    }

    fn param(&mut self, name: &str, p: Interval) -> &mut Self {
        self.names.push(name.into());
        self.params.push(p);
        self
    }

    fn expr(&self, s: &str) -> Result<ParamExpr> {
        parse_expr(s, &self.names, Rounding::Rigorous)
    }

    fn rows(&self, a: &[&[&str]]) -> Result<Vec<Vec<ParamExpr>>> {
        a.iter().map(|row| row.iter().map(|s| self.expr(s)).collect()).collect()
    }

    fn vector(&self, b: &[&str]) -> Result<Vec<ParamExpr>> {
        b.iter().map(|s| self.expr(s)).collect()
    }

    fn system(&self, a: &[&[&str]], b: &[&str]) -> Result<ParametricSystem> {
        ParametricSystem::new(self.rows(a)?, self.vector(b)?, IntervalVector::new(self.params.clone()), self.names.clone())
    }
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::checked(lo, hi)
}

/// `m ± δ·u`, where `m` and `u` are decimal literals, rounded outward.
fn toleranced(m: &str, u: &str, delta: f64) -> Result<Interval> {
    let r = Rounding::Rigorous;
    let mid = Interval::parse_decimal(m, m, r)?;
    let unc = Interval::parse_decimal(u, u, r)?;
    let rad = r.mul_up(unc.hi(), delta);
    Ok(iv(r.sub_down(mid.lo(), rad), r.add_up(mid.hi(), rad)))
}

fn outputs(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn example(id: &str, delta: Option<f64>, system: ParametricSystem, components: Vec<String>) -> PaperExample {
    PaperExample { id: id.into(), delta, system, components, published: vec![], custom: None, metadata: Map::new() }
}

fn ex0() -> Result<PaperExample> {
    let mut b = Builder::new();
    b.param("p", iv(-1.0, 1.0));
    let sys = b.system(&[&["1 - 0.5*p", "-p"], &["0.5*p", "1 + p"]], &["1", "1"])?;
    let l = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]])?;
    let r = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 1.0]])?;
    let mut ex = example("ex0", None, sys, outputs("x", 2));
    ex.custom = Some(Preconditioner::new(l, r, "custom")?);
    ex.published = vec![
        reference("rho left", RefValue::Scalar(1.5), "radius of the left-preconditioned hull"),
        reference("rho right", RefValue::Scalar(1.5), "radius of the right-preconditioned hull"),
        reference("rho custom", RefValue::Scalar(0.5), "double preconditioning with the shear matrix"),
        reference(
            "hull custom",
            boxed(&[[1.0, 1.0], [0.0, 0.0], [-0.5, 0.5], [0.5, 1.5]]),
            "entries of the double-preconditioned hull, row by row",
        ),
    ];
    ex.metadata.insert("note".into(), json!("the right-hand side (1, 1) is not part of the matrix example"));
    Ok(ex)
}

fn fig1() -> Result<PaperExample> {
    let mut b = Builder::new();
    b.param("p1", iv(1.0, 2.0)).param("p2", iv(0.5, 1.0));
    let sys = b.system(&[&["p1 + p2", "1"], &["0", "2*p2"]], &["1", "2"])?;
    let mut ex = example("fig1", None, sys, outputs("x", 2));
    ex.published = vec![reference(
        "pki left box",
        boxed(&[[-0.666907, 0.180946], [0.855706, 2.000252]]),
        "bounding box of the plotted p-solution",
    )];
    Ok(ex)
}

fn ex1() -> Result<PaperExample> {
    let mut b = Builder::new();
    b.param("p", iv(0.5, 3.5));
    let sys = b.system(&[&["p", "2*p"], &["2", "1"]], &["1", "1"])?;
    let mut ex = example("ex1", None, sys, outputs("x", 2));
    ex.published = vec![
        reference("hull", boxed(&[[0.0, 12.0 / 21.0], [-3.0 / 21.0, 1.0]]), "exact interval hull"),
        reference("pki right outer", boxed(&[[0.0, 0.740747], [-0.481481, 1.0]]), "tabulated outer enclosure"),
        reference("pki right inner", boxed(&[[0.296296, 0.444444], [0.111111, 0.407407]]), "tabulated inner estimate"),
        reference("phbr right outer", boxed(&[[0.0, 0.571429], [-0.142857, 1.0]]), "tabulated outer enclosure"),
        reference("rho left", RefValue::Scalar(1.25), "left preconditioning fails"),
        reference("rho right", RefValue::Scalar(0.75), "right preconditioning succeeds"),
    ];
    Ok(ex)
}

fn ex2(delta: f64) -> Result<PaperExample> {
    let mut b = Builder::new();
    for name in ["p1", "p2", "p3"] {
        b.param(name, iv(-delta, delta));
    }
    let sys = b.system(
        &[
            &["1 + p1 - p2", "-p1 + p2", "1 + p1"],
            &["2 + p1 + p2", "-1 - p1 - p2 + p3", "-1 + p1 - 2*p3"],
            &["1 + p1", "-3 - p1 - 2*p3", "6 + p1 + 4*p3"],
        ],
        &["1", "1", "1"],
    )?;
    let mut ex = example("ex2", Some(delta), sys, outputs("x", 3));
    let plotted = [
        ("left", 0.0375012, 2.06256),
        ("right", 0.0200213, 1.10117),
        ("lu", 0.0179797, 0.988881),
        ("svd", 0.0329613, 1.81287),
        ("qr", 0.0195877, 1.07732),
    ];
    for (s, lo, hi) in plotted {
        let note = "plotted spectral radius";
        ex.published.push(reference(&format!("rho {s} @0.01"), RefValue::Scalar(lo), note));
        ex.published.push(reference(&format!("rho {s} @0.55"), RefValue::Scalar(hi), note));
    }
    let table = [
        ("left", [[11.0, 23.0, 51.0], [10.0, 21.0, 48.0], [13.0, 27.0, 55.0]]),
        ("right", [[6.0, 12.0, 26.0], [8.0, 17.0, 34.0], [7.0, 15.0, 31.0]]),
        ("lu", [[3.0, 7.0, 16.0], [9.0, 18.0, 35.0], [10.0, 19.0, 37.0]]),
        ("svd", [[6.0, 12.0, 26.0], [7.0, 14.0, 29.0], [8.0, 15.0, 31.0]]),
        ("qr", [[6.0, 12.0, 26.0], [6.0, 12.0, 26.0], [7.0, 14.0, 29.0]]),
    ];
    for (s, rows) in table {
        for (j, pct) in ["0.05", "0.1", "0.2"].iter().enumerate() {
            let row = rows.iter().map(|r| r[j]).collect();
            ex.published.push(reference(
                &format!("pki {s} overestimation @{pct}"),
                RefValue::Row(row),
                "percent overestimation of the hull, per component",
            ));
        }
    }
    Ok(ex)
}

fn ex3() -> Result<PaperExample> {
    let mut b = Builder::new();
    b.param("p1", iv(0.75, 1.25)).param("p2", iv(0.5, 1.5)).param("p3", iv(0.5, 1.5));
    let sys = b.system(
        &[&["1/2 - p2", "p1", "p1"], &["p2", "-p2", "p3"], &["p1", "p3", "1"]],
        &["p2", "2*p2", "3*p2"],
    )?;
    let mut ex = example("ex3", None, sys, outputs("x", 3));
    ex.published = vec![
        reference(
            "pki right outer",
            boxed(&[[-16.768697, 18.556510], [-18.197915, 18.535419], [-20.214964, 23.743957]]),
            "tabulated outer enclosure",
        ),
        reference(
            "hull",
            boxed(&[[0.69999, 1.7157], [-0.4501, 1.0938], [0.3818, 3.3244]]),
            "tabulated interval hull (inner bound of the true hull)",
        ),
        reference(
            "popova outer",
            boxed(&[[-41.11159, 43.77826], [-43.11161, 44.11161], [-51.88948, 54.22282]]),
            "earlier published enclosure used for comparison",
        ),
        reference("rho left", RefValue::Scalar(1.12), "approximate, left preconditioning fails"),
        reference("rho right", RefValue::Scalar(0.97), "approximate, right preconditioning succeeds"),
    ];
    Ok(ex)
}

fn okumura(delta: f64) -> Result<PaperExample> {
    let mut b = Builder::new();
    for k in 1..=9 {
        b.param(&format!("p{k}"), toleranced("1", "1", delta)?);
    }
    let sys = b.system(
        &[
            &["p1 + p6", "-p6", "0", "0", "0"],
            &["-p6", "p2 + p6 + p7", "-p7", "0", "0"],
            &["0", "-p7", "p3 + p7 + p8", "-p8", "0"],
            &["0", "0", "-p8", "p4 + p8 + p9", "-p9"],
            &["0", "0", "0", "-p9", "p5 + p9"],
        ],
        &["10", "0", "10", "0", "0"],
    )?;
    let mut ex = example("okumura", Some(delta), sys, outputs("x", 5));
    let note = "percent overestimation of pki left over pki lu";
    ex.published = vec![
        reference("pki left vs lu @0.1", RefValue::Row(vec![3.6, 1.7, 0.3, -0.4, -1.5]), note),
        reference("pki left vs lu @0.2", RefValue::Row(vec![9.0, 5.7, 2.7, 2.6, 0.6]), note),
        reference("pki left vs lu @0.3", RefValue::Row(vec![19.6, 15.2, 12.1, 12.8, 10.4]), note),
    ];
    Ok(ex)
}

const AC_REACTANCE: [f64; 11] = [20.0, 20.0, 30.0, -300.0, 20.0, 0.0, 20.0, 0.0, 0.0, -400.0, 0.0];

fn ac_circuit(delta: f64) -> Result<PaperExample> {
    let r = Rounding::Rigorous;
    let mut b = Builder::new();
    // p_j = 1/Z_j = (100 - i X_j) / (100² + X_j²); zero imaginary parts are not parameters.
    let mut re = vec![];
    let mut im = vec![];
    for (j, &x) in AC_REACTANCE.iter().enumerate() {
        let den = Interval::point(1e4 + x * x);
        let parts = [("re", Interval::point(100.0).div(den, r)?), ("im", Interval::point(-x).div(den, r)?)];
        for (tag, v) in parts {
            if tag == "im" && x == 0.0 {
                im.push("0".to_string());
                continue;
            }
            let rad = r.mul_up(v.mag(), delta);
            let name = format!("p{}_{tag}", j + 1);
            b.param(&name, iv(r.sub_down(v.lo(), rad), r.add_up(v.hi(), rad)));
            if tag == "re" {
                re.push(name);
            } else {
                im.push(name);
            }
        }
    }
    let build_parts = |part: &[String]| -> Result<(Vec<Vec<ParamExpr>>, Vec<ParamExpr>)> {
        let p = |j: usize| part[j - 1].as_str();
        let sum = |js: &[usize]| js.iter().map(|&j| p(j)).collect::<Vec<_>>().join(" + ");
        let neg = |js: &[usize]| format!("-({})", sum(js));
        let y = [
            [sum(&[1, 3, 6]), neg(&[3]), "0".into(), "0".into(), neg(&[6])],
            [neg(&[3]), sum(&[2, 3, 4, 5]), neg(&[4, 5]), "0".into(), "0".into()],
            ["0".into(), neg(&[4, 5]), sum(&[4, 5, 7, 10]), neg(&[7]), "0".into()],
            ["0".into(), "0".into(), neg(&[7]), sum(&[7, 8, 9]), neg(&[9])],
            [neg(&[6]), "0".into(), "0".into(), neg(&[9]), sum(&[6, 9, 11])],
        ];
        let rhs = [
            format!("100*{}", p(1)),
            format!("100*{} - 10*{}", p(2), p(5)),
            format!("10*{} + 10*{}", p(5), p(7)),
            format!("-10*{}", p(7)),
            "0".into(),
        ];
        let a = y.iter().map(|row| row.iter().map(|s| b.expr(s)).collect()).collect::<Result<_>>()?;
        let v = rhs.iter().map(|s| b.expr(s)).collect::<Result<_>>()?;
        Ok((a, v))
    };
    let (m_re, b_re) = build_parts(&re)?;
    let (m_im, b_im) = build_parts(&im)?;
    let sys = complex_to_real(&m_re, &m_im, &b_re, &b_im, IntervalVector::new(b.params.clone()), b.names.clone())?;
    let mut components = outputs("V", 5).into_iter().map(|v| format!("{v}_re")).collect::<Vec<_>>();
    components.extend(outputs("V", 5).into_iter().map(|v| format!("{v}_im")));
    let mut ex = example("ac_circuit", Some(delta), sys, components);
    ex.metadata.insert(
        "tolerance".into(),
        json!("relative, applied to the real and imaginary parts of p_j = 1/Z_j"),
    );
    let note = "percent overestimation of pki left over pki lu (re then im)";
    let table: [(&str, [f64; 10]); 4] = [
        ("0.05", [3.0, 2.0, 3.0, 0.0, -2.0, 2.0, 1.0, 1.0, -4.0, -6.0]),
        ("0.1", [7.0, 5.0, 8.0, 0.0, -2.0, 6.0, 3.0, 3.0, -6.0, -9.0]),
        ("0.2", [26.0, 25.0, 29.0, 14.0, 8.0, 25.0, 21.0, 22.0, 8.0, 1.0]),
        ("0.25", [58.0, 58.0, 60.0, 48.0, 41.0, 58.0, 56.0, 57.0, 47.0, 42.0]),
    ];
    for (pct, row) in table {
        ex.published.push(reference(&format!("pki left vs lu @{pct}"), RefValue::Row(row.to_vec()), note));
    }
    for (pct, l, lu) in [("0.05", 4.0, 4.0), ("0.1", 5.0, 5.0), ("0.2", 13.0, 9.0), ("0.25", 36.0, 16.0)] {
        ex.published.push(reference(&format!("iterations left @{pct}"), RefValue::Scalar(l), "pki iteration count"));
        ex.published.push(reference(&format!("iterations lu @{pct}"), RefValue::Scalar(lu), "pki iteration count"));
    }
    Ok(ex)
}

const FRAME_PARAMS: [(&str, &str, &str); 8] = [
    ("Eb", "29e6", "348e4"),
    ("Ec", "29e6", "348e4"),
    ("Ib", "510", "51"),
    ("Ic", "272", "27.2"),
    ("Ab", "10.3", "1.3"),
    ("Ac", "14.4", "1.44"),
    ("H", "5305.5", "2203.5"),
    ("alpha", "2.77461e8", "1.26504e8"),
];

fn frame(delta: f64) -> Result<PaperExample> {
    let mut b = Builder::new();
    for (name, m, u) in FRAME_PARAMS {
        b.param(name, toleranced(m, u, delta)?);
    }
    // Lb = 288, Lc = 144.
    let a11 = "Ab*Eb/288 + 12*Ec*Ic/144^3";
    let a22 = "Ac*Ec/144 + 12*Eb*Ib/288^3";
    let a33 = "alpha + 4*Ec*Ic/144";
    let a44 = "alpha + 4*Eb*Ib/288";
    let c6 = "6*Ec*Ic/144^2";
    let b6 = "6*Eb*Ib/288^2";
    let nb6 = "-6*Eb*Ib/288^2";
    let b2 = "2*Eb*Ib/288";
    let ab = "-Ab*Eb/288";
    let nb12 = "-12*Eb*Ib/288^3";
    let sys = b.system(
        &[
            &[a11, "0", c6, "0", "0", ab, "0", "0"],
            &["0", a22, "0", b6, b6, "0", nb12, "0"],
            &[c6, "0", a33, "-alpha", "0", "0", "0", "0"],
            &["0", b6, "-alpha", a44, b2, "0", nb6, "0"],
            &["0", b6, "0", b2, a33, "0", nb6, "-alpha"],
            &[ab, "0", "0", "0", "0", a11, "0", c6],
            &["0", nb12, "0", nb6, nb6, "0", a22, nb6],
            &["0", "0", "0", "0", "-alpha", c6, nb6, a33],
        ],
        &["H", "0", "0", "0", "0", "0", "0", "0"],
    )?;
    let components = ["d2_x", "d2_y", "r2_z", "r5_z", "r6_z", "d3_x", "d3_y", "r3_z"].map(String::from).to_vec();
    let mut ex = example("frame", Some(delta), sys, components);
    ex.metadata.insert("tolerance".into(), json!("delta times the worst-case uncertainty of each parameter"));
    let left = [
        [5.0, -1.0, 6.0, 6.0, 7.0, 4.0, -2.0, 4.0],
        [11.0, 0.0, 15.0, 16.0, 19.0, 11.0, 0.0, 12.0],
        [22.0, 6.0, 27.0, 30.0, 33.0, 22.0, 6.0, 24.0],
        [41.0, 23.0, 47.0, 50.0, 53.0, 41.0, 24.0, 44.0],
        [87.0, 81.0, 88.0, 89.0, 90.0, 86.0, 81.0, 87.0],
    ];
    let phbr = [
        [-3.0, 17.0, 16.0, 40.0, 32.0, -2.0, 26.0, 23.0],
        [-9.0, 11.0, 10.0, 32.0, 24.0, -8.0, 20.0, 16.0],
        [-18.0, 4.0, 1.0, 23.0, 16.0, -17.0, 13.0, 8.0],
        [-32.0, -4.0, -11.0, 12.0, 6.0, -31.0, 5.0, -3.0],
        [-52.0, -17.0, -27.0, -3.0, -7.0, -49.0, -7.0, -18.0],
    ];
    let iters = [(4.0, 3.0), (5.0, 4.0), (7.0, 6.0), (13.0, 8.0), (65.0, 14.0)];
    for (i, pct) in ["0.1", "0.2", "0.3", "0.4", "0.5"].iter().enumerate() {
        ex.published.push(reference(
            &format!("pki left vs lu @{pct}"),
            RefValue::Row(left[i].to_vec()),
            "percent overestimation of pki left over pki lu",
        ));
        ex.published.push(reference(
            &format!("phbr lu vs pki lu @{pct}"),
            RefValue::Row(phbr[i].to_vec()),
            "percent overestimation of phbr lu over pki lu",
        ));
        ex.published.push(reference(&format!("iterations left @{pct}"), RefValue::Scalar(iters[i].0), "pki iteration count"));
        ex.published.push(reference(&format!("iterations lu @{pct}"), RefValue::Scalar(iters[i].1), "pki iteration count"));
    }
    Ok(ex)
}
