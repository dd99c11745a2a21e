mod output;

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use ipls::examples::{self, PaperExample};
use ipls::model::{parse_problem, ParametricSystem, ProblemFile};
use ipls::oracle::{run_experiment, sample_hull, write_csv, EnsembleSpec, Family, SampledHull, Sampler, Variant};
use ipls::precond::{strong_regularity, BuildOptions, FixedStrategy, Order, StrategyRegistry};
use ipls::raf::MulMode;
use ipls::solve::{overestimation, width_gain, MethodRegistry, SolveOptions, SolveResult};
use ipls::{Error, Interval, Rounding};

use output::{csv_line, g6, interval, table, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "ipls", version, about = "Enclosures for interval parametric linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enclose the solution set of one problem.
    Solve(SolveArgs),
    /// Spectral radius of the preconditioned radius matrix per strategy.
    Regularity(RegularityArgs),
    /// Compare the enclosures of several method and strategy pairs.
    Compare(CompareArgs),
    /// Geometric-mean spectral radius ratios over a random ensemble.
    Experiment(ExperimentArgs),
    /// Print or export a built-in example as a problem file.
    PaperExample(PaperExampleArgs),
}

#[derive(Args)]
struct Source {
    /// Problem file (JSON).
    path: Option<String>,
    /// Problem file (JSON), as a flag.
    #[arg(long, conflicts_with = "path")]
    input: Option<String>,
    /// Built-in example id.
    #[arg(long, conflicts_with_all = ["path", "input"])]
    example: Option<String>,
    /// Tolerance for ex2, okumura, ac_circuit and frame.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Also write the problem to this file.
    #[arg(long)]
    export: Option<String>,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "auto", value_parser = parse_order)]
    order: Order,
    /// Relative radius change at which PKI stops.
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = RoundingArg::Rigorous)]
    rounding: RoundingArg,
    /// Seed for randomized strategies and the sampling oracle.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "pki")]
    method: String,
    #[arg(long, default_value = "lu")]
    precond: String,
    /// Report the inner estimate.
    #[arg(long)]
    inner: bool,
    /// Compare against the hull of this many sampled solutions (plus vertices).
    #[arg(long)]
    oracle: Option<usize>,
}

#[derive(Args)]
struct RegularityArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Comma-separated strategies; all standard ones by default.
    #[arg(long)]
    precond: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Comma-separated methods.
    #[arg(long, default_value = "pki")]
    method: String,
    /// Comma-separated strategies.
    #[arg(long, default_value = "left,lu")]
    precond: String,
    #[arg(long)]
    oracle: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// rank1, hrank or nonidmid.
    #[arg(long, default_value = "rank1")]
    family: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of parameters.
    #[arg(long = "K", default_value_t = 7)]
    k: usize,
    /// Rank of each parameter matrix (defaults to 3 for hrank, else 1).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// ab or aa.
    #[arg(long, default_value = "ab")]
    variant: String,
    /// Comma-separated strategies; the family's own set by default.
    #[arg(long)]
    precond: Option<String>,
    /// Candidates tried by s2 and s3.
    #[arg(long, default_value_t = 1000)]
    candidates: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PaperExampleArgs {
    id: String,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Write the problem file here instead of printing it.
    #[arg(long)]
    export: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RoundingArg {
    Fast,
    Rigorous,
}

impl From<RoundingArg> for Rounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::Fast => Rounding::Fast,
            RoundingArg::Rigorous => Rounding::Rigorous,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

fn parse_order(s: &str) -> Result<Order, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(Error::NotStronglyRegular { .. }) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Run<T = String> = Result<T, Failure>;

struct Problem {
    label: String,
    system: ParametricSystem,
    components: Vec<String>,
    example: Option<PaperExample>,
}

impl Problem {
    fn registry(&self) -> StrategyRegistry {
        let mut reg = StrategyRegistry::standard();
        if let Some(pc) = self.example.as_ref().and_then(|e| e.custom.as_ref()) {
            reg.register(Arc::new(FixedStrategy { name: pc.strategy.clone(), l: pc.l.clone(), r: pc.r.clone() }));
        }
        reg
    }

    fn metadata(&self) -> Value {
        self.example.as_ref().map(|e| Value::Object(e.metadata.clone())).unwrap_or(Value::Null)
    }
}

fn load(source: &Source, rounding: Rounding) -> Run<Problem> {
    let problem = match (&source.example, source.path.as_ref().or(source.input.as_ref())) {
        (Some(id), _) => {
            let ex = examples::build(id, source.delta)?;
            Problem { label: ex.id.clone(), system: ex.system.clone(), components: ex.components.clone(), example: Some(ex) }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {path}: {e}")))?;
            let system = parse_problem(&text, rounding)?;
            let components = (1..=system.n()).map(|i| format!("x{i}")).collect();
            Problem { label: path.clone(), system, components, example: None }
        }
        (None, None) => return Err(Failure::Usage("give a problem file or --example".into())),
    };
    if let Some(out) = &source.export {
        let file = match &problem.example {
            Some(ex) => ex.problem_file(),
            None => ProblemFile::from_system(&problem.system),
        };
        write_file(out, &file.to_json())?;
    }
    Ok(problem)
}

fn write_file(path: &str, text: &str) -> Run<()> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {path}: {e}")))
}

fn options(c: &Common) -> Run<(SolveOptions, BuildOptions)> {
    if !(c.tol.is_finite() && c.tol >= 0.0) {
        return Err(Failure::Usage(format!("--tol must be finite and nonnegative, got {}", c.tol)));
    }
    if c.max_iter == 0 {
        return Err(Failure::Usage("--max-iter must be positive".into()));
    }
    let solve = SolveOptions {
        tol: c.tol,
        max_iter: c.max_iter,
        rounding: c.rounding.into(),
        order: c.order,
        ..SolveOptions::default()
    };
    Ok((solve, BuildOptions { seed: c.seed, ..BuildOptions::default() }))
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_ascii_lowercase()).filter(|x| !x.is_empty()).collect()
}

fn solve_one(
    p: &Problem,
    reg: &StrategyRegistry,
    method: &str,
    strategy: &str,
    opts: &SolveOptions,
    build: &BuildOptions,
) -> ipls::Result<SolveResult> {
    let method = MethodRegistry::standard().get(method)?;
    let affine = p.system.affine_transform(MulMode::Chebyshev, opts.rounding)?;
    let pc = reg.build(strategy, &affine, build)?;
    method.solve(&affine, &pc, opts)
}

fn oracle(sys: &ParametricSystem, count: usize, seed: u64) -> Run<SampledHull> {
    if count == 0 {
        return Err(Failure::Usage("--oracle needs a positive sample count".into()));
    }
    let random = sample_hull(sys, Sampler::Random, count, seed)?;
    Ok(random.merge(&sample_hull(sys, Sampler::Vertices, count, seed)?)?)
}

fn hull_json(h: &SampledHull) -> Value {
    json!({"bounds": h.bounds, "samples_used": h.samples_used, "skipped": h.skipped, "seed": h.seed})
}

fn cmd_solve(a: &SolveArgs) -> Run {
    let (opts, build) = options(&a.common)?;
    let p = load(&a.source, opts.rounding)?;
    let reg = p.registry();
    let r = solve_one(&p, &reg, &a.method, &a.precond, &opts, &build)?;
    let hull = a.oracle.map(|n| oracle(&p.system, n, a.common.seed)).transpose()?;
    let over: Option<Vec<Option<f64>>> = hull.as_ref().map(|h| {
        h.bounds.iter().zip(r.outer.iter()).map(|(x, y)| overestimation(x, y).ok()).collect()
    });
    let inner_cell = |i: usize| r.inner.0[i].map(|x| x.to_string()).unwrap_or_else(|| "empty".into());
    Ok(match a.common.format {
        Format::Json => {
            let mut doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "solve",
                "problem": p.label,
                "components": p.components,
                "result": r,
                "metadata": p.metadata(),
            });
            if let (Some(h), Some(o)) = (&hull, &over) {
                doc["oracle"] = hull_json(h);
                doc["oracle"]["overestimation"] = json!(o);
            }
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut header = vec!["component", "outer_lo", "outer_hi"];
            if a.inner {
                header.extend(["inner_lo", "inner_hi"]);
            }
            if hull.is_some() {
                header.extend(["hull_lo", "hull_hi", "overestimation"]);
            }
            let mut out = header.join(",") + "\n";
            for (i, name) in p.components.iter().enumerate() {
                let mut row = vec![name.clone(), r.outer[i].lo().to_string(), r.outer[i].hi().to_string()];
                if a.inner {
                    let (lo, hi) = r.inner.0[i].map(|x| (x.lo().to_string(), x.hi().to_string())).unwrap_or_default();
                    row.extend([lo, hi]);
                }
                if let (Some(h), Some(o)) = (&hull, &over) {
                    row.extend([h.bounds[i].lo().to_string(), h.bounds[i].hi().to_string()]);
                    row.push(o[i].map(|v| v.to_string()).unwrap_or_default());
                }
                out += &(csv_line(&row) + "\n");
            }
            out
        }
        Format::Table => {
            let status = if r.converged { "converged" } else { "not converged, enclosure still valid" };
            let mut out = String::new();
            let _ = writeln!(out, "problem     {}", p.label);
            let _ = writeln!(out, "method      {}", r.method);
            let _ = writeln!(out, "precond     {}", r.preconditioner);
            let _ = writeln!(out, "order       {}", serde_json::to_value(r.order).unwrap().as_str().unwrap_or(""));
            let _ = writeln!(out, "rounding    {}", serde_json::to_value(r.rounding).unwrap().as_str().unwrap_or(""));
            let _ = writeln!(out, "rho         {}", g6(r.rho));
            let _ = writeln!(out, "iterations  {} ({status})", r.iterations);
            if let Some(h) = &hull {
                let _ = writeln!(out, "oracle      {} samples, {} singular", h.samples_used, h.skipped);
            }
            out.push('\n');
            let mut header = vec!["component", "outer"];
            if a.inner {
                header.push("inner");
            }
            if hull.is_some() {
                header.extend(["sampled hull", "O_w %"]);
            }
            let rows: Vec<Vec<String>> = p
                .components
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    let mut row = vec![name.clone(), interval(&r.outer[i])];
                    if a.inner {
                        row.push(r.inner.0[i].map(|x| interval(&x)).unwrap_or_else(|| inner_cell(i)));
                    }
                    if let (Some(h), Some(o)) = (&hull, &over) {
                        row.push(interval(&h.bounds[i]));
                        row.push(o[i].map(g6).unwrap_or_else(|| "-".into()));
                    }
                    row
                })
                .collect();
            out + &table(&header, &rows)
        }
    })
}

const ALL_STRATEGIES: [&str; 9] = ["left", "right", "lu", "svd", "qr", "s0", "s1", "s2", "s3"];

fn cmd_regularity(a: &RegularityArgs) -> Run {
    let (opts, build) = options(&a.common)?;
    let p = load(&a.source, opts.rounding)?;
    let reg = p.registry();
    let names: Vec<String> = match &a.precond {
        Some(s) => list(s),
        None => {
            let mut v: Vec<String> = ALL_STRATEGIES.iter().map(|s| s.to_string()).collect();
            if let Some(pc) = p.example.as_ref().and_then(|e| e.custom.as_ref()) {
                v.push(pc.strategy.clone());
            }
            v
        }
    };
    if names.is_empty() {
        return Err(Failure::Usage("--precond lists no strategy".into()));
    }
    for n in &names {
        reg.get(n)?;
    }
    let affine = p.system.affine_transform(MulMode::Chebyshev, opts.rounding)?;
    let mut reports: Vec<(String, ipls::Result<(f64, bool)>)> = names
        .par_iter()
        .map(|n| {
            let rep = reg.build(n, &affine, &build).and_then(|pc| strong_regularity(&pc, &affine));
            (n.clone(), rep.map(|r| (r.rho, r.strongly_regular)))
        })
        .collect();
    // errors sort last; the sort is stable so ties keep the requested order
    reports.sort_by(|x, y| match (&x.1, &y.1) {
        (Ok(a), Ok(b)) => a.0.total_cmp(&b.0),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });
    Ok(match a.common.format {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .map(|(n, r)| match r {
                    Ok((rho, reg)) => json!({"strategy": n, "rho": rho, "strongly_regular": reg}),
                    Err(e) => json!({"strategy": n, "error": e.to_string()}),
                })
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "regularity",
                "problem": p.label,
                "reports": items,
                "metadata": p.metadata(),
            });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("strategy,rho,strongly_regular,error\n");
            for (n, r) in &reports {
                let row = match r {
                    Ok((rho, reg)) => vec![n.clone(), rho.to_string(), reg.to_string(), String::new()],
                    Err(e) => vec![n.clone(), String::new(), String::new(), e.to_string()],
                };
                out += &(csv_line(&row) + "\n");
            }
            out
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|(n, r)| match r {
                    Ok((rho, reg)) => vec![n.clone(), g6(*rho), if *reg { "yes" } else { "no" }.into()],
                    Err(e) => vec![n.clone(), "-".into(), format!("error: {e}")],
                })
                .collect();
            format!("problem {}\n\n", p.label) + &table(&["strategy", "rho", "strongly regular"], &rows)
        }
    })
}

struct CompareRun {
    label: String,
    method: String,
    strategy: String,
    result: ipls::Result<SolveResult>,
}

fn cmd_compare(a: &CompareArgs) -> Run {
    let (opts, build) = options(&a.common)?;
    let methods = list(&a.method);
    let strategies = list(&a.precond);
    if methods.len() * strategies.len() < 2 {
        return Err(Failure::Usage("compare needs at least two method/strategy pairs".into()));
    }
    let p = load(&a.source, opts.rounding)?;
    let reg = p.registry();
    for m in &methods {
        MethodRegistry::standard().get(m)?;
    }
    for s in &strategies {
        reg.get(s)?;
    }
    let pairs: Vec<(String, String)> =
        methods.iter().flat_map(|m| strategies.iter().map(move |s| (m.clone(), s.clone()))).collect();
    let runs: Vec<CompareRun> = pairs
        .par_iter()
        .map(|(m, s)| CompareRun {
            label: format!("{m}/{s}"),
            method: m.clone(),
            strategy: s.clone(),
            result: solve_one(&p, &reg, m, s, &opts, &build),
        })
        .collect();
    let ok: Vec<&SolveResult> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    if ok.is_empty() {
        let first = runs.into_iter().next().and_then(|r| r.result.err()).expect("at least two runs");
        return Err(first.into());
    }
    let n = p.system.n();
    let tightest: Vec<Interval> = (0..n)
        .map(|i| ok.iter().map(|r| r.outer[i]).min_by(|x, y| x.width().total_cmp(&y.width())).unwrap())
        .collect();
    let vs_tightest = |r: &SolveResult| -> Vec<f64> {
        (0..n).map(|i| width_gain(&tightest[i], &r.outer[i]).unwrap_or(0.0)).collect()
    };
    let hull = a.oracle.map(|c| oracle(&p.system, c, a.common.seed)).transpose()?;
    let vs_hull = |r: &SolveResult| -> Option<Vec<Option<f64>>> {
        hull.as_ref().map(|h| (0..n).map(|i| overestimation(&h.bounds[i], &r.outer[i]).ok()).collect())
    };
    Ok(match a.common.format {
        Format::Json => {
            let items: Vec<Value> = runs
                .iter()
                .map(|run| match &run.result {
                    Ok(r) => json!({
                        "method": run.method,
                        "strategy": run.strategy,
                        "outer": r.outer,
                        "iterations": r.iterations,
                        "converged": r.converged,
                        "rho": r.rho,
                        "vs_tightest": vs_tightest(r),
                        "vs_hull": vs_hull(r),
                    }),
                    Err(e) => json!({"method": run.method, "strategy": run.strategy, "error": e.to_string()}),
                })
                .collect();
            let mut doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "compare",
                "problem": p.label,
                "components": p.components,
                "runs": items,
                "metadata": p.metadata(),
            });
            if let Some(h) = &hull {
                doc["oracle"] = hull_json(h);
            }
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("run,component,lo,hi,vs_tightest,vs_hull,error\n");
            for run in &runs {
                match &run.result {
                    Ok(r) => {
                        let t = vs_tightest(r);
                        let h = vs_hull(r);
                        for (i, name) in p.components.iter().enumerate() {
                            let hv = h.as_ref().and_then(|h| h[i]).map(|v| v.to_string()).unwrap_or_default();
                            let row = [
                                run.label.clone(),
                                name.clone(),
                                r.outer[i].lo().to_string(),
                                r.outer[i].hi().to_string(),
                                t[i].to_string(),
                                hv,
                                String::new(),
                            ];
                            out += &(csv_line(&row) + "\n");
                        }
                    }
                    Err(e) => {
                        let mut row = vec![run.label.clone()];
                        row.extend(std::iter::repeat_n(String::new(), 5));
                        row.push(e.to_string());
                        out += &(csv_line(&row) + "\n");
                    }
                }
            }
            out
        }
        Format::Table => {
            let mut header: Vec<&str> = vec!["run", "iterations"];
            header.extend(p.components.iter().map(String::as_str));
            let mut out = format!("problem {}\n\nO_w % against the componentwise tightest enclosure\n", p.label);
            let rows: Vec<Vec<String>> = runs
                .iter()
                .map(|run| {
                    let mut row = vec![run.label.clone()];
                    match &run.result {
                        Ok(r) => {
                            row.push(r.iterations.to_string());
                            row.extend(vs_tightest(r).into_iter().map(g6));
                        }
                        Err(e) => row.push(format!("error: {e}")),
                    }
                    row
                })
                .collect();
            out += &table(&header, &rows);
            if hull.is_some() {
                out += "\nO_w % of the sampled hull inside each enclosure\n";
                let rows: Vec<Vec<String>> = runs
                    .iter()
                    .filter_map(|run| {
                        let r = run.result.as_ref().ok()?;
                        let mut row = vec![run.label.clone(), r.iterations.to_string()];
                        row.extend(vs_hull(r)?.into_iter().map(|v| v.map(g6).unwrap_or_else(|| "-".into())));
                        Some(row)
                    })
                    .collect();
                out += &table(&header, &rows);
            }
            out
        }
    })
}

fn cmd_experiment(a: &ExperimentArgs) -> Run {
    if a.reps == 0 {
        return Err(Failure::Usage("--reps must be positive".into()));
    }
    let family: Family = a.family.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let variant: Variant = a.variant.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let rank = a.rank.unwrap_or(if family == Family::HigherRank { 3 } else { 1 });
    let spec = EnsembleSpec::family(family, a.n, a.k, rank, a.seed).with_variant(variant);
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let owned: Vec<String> = match &a.precond {
        Some(s) => list(s),
        None => family.strategies().iter().map(|s| s.to_string()).collect(),
    };
    let reg = StrategyRegistry::standard();
    for s in &owned {
        reg.get(s)?;
    }
    let strategies: Vec<&str> = owned.iter().map(String::as_str).collect();
    let build = BuildOptions { seed: a.seed, candidates: a.candidates };
    let rows = run_experiment(&spec, a.reps, &strategies, &build)?;
    Ok(match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => {
            let doc = json!({"schema_version": SCHEMA_VERSION, "command": "experiment", "spec": spec, "rows": rows});
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Table => {
            let body: Vec<Vec<String>> = rows.iter().map(|r| vec![r.strategy.clone(), g6(r.geo_mean)]).collect();
            format!("n = {}, K = {}, rank = {rank}, variant {variant}, {} reps, seed {}\n\n", a.n, a.k, a.reps, a.seed)
                + &table(&["strategy", "geo mean ratio"], &body)
        }
    })
}

fn cmd_paper_example(a: &PaperExampleArgs) -> Run {
    let ex = examples::build(&a.id, a.delta)?;
    let text = ex.problem_file().to_json() + "\n";
    match &a.export {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn configure_threads() -> Run<()> {
    let Ok(v) = std::env::var("IPLS_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Usage(format!("IPLS_THREADS must be a positive integer, got `{v}`"))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Regularity(a) => cmd_regularity(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::PaperExample(a) => cmd_paper_example(a),
    });
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
