use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use osclab::combinatorics::extract_delta_system;
use osclab::lab::{self, Context, LabError, RecordStore, Verdict};
use osclab::ordinal::{staircase, Ordinal};
use osclab::torus::{self, sqrt_fraction, Angle, GeneratorMap, PointVector, TorusError};
use osclab::walks::{self, OscTable, WalkError};
use osclab::Exec;
use serde_json::{json, Value};

use crate::config::{Overrides, RunConfig};
use crate::{CliError, Output};

fn parse(literal: &str) -> Result<Ordinal, CliError> {
    literal
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("cannot parse `{literal}`: {e}")))
}

fn parse_list(list: &str) -> Result<Vec<Ordinal>, CliError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(parse).collect()
}

fn walk_error(e: WalkError) -> CliError {
    CliError::Usage(e.to_string())
}

fn torus_error(e: TorusError) -> CliError {
    match e {
        TorusError::CertificationFailed { .. } => CliError::Internal(e.to_string()),
        e => CliError::Usage(e.to_string()),
    }
}

fn ok(text: String, json: Value) -> Result<Output, CliError> {
    Ok(Output { text, json, code: 0 })
}

pub fn ord_cmp(a: &str, b: &str) -> Result<Output, CliError> {
    let (x, y) = (parse(a)?, parse(b)?);
    let sign = match x.cmp(&y) {
        std::cmp::Ordering::Less => "<",
        std::cmp::Ordering::Equal => "=",
        std::cmp::Ordering::Greater => ">",
    };
    ok(format!("{x} {sign} {y}\n"), json!({"a": x, "b": y, "cmp": sign}))
}

pub fn ord_add(a: &str, b: &str) -> Result<Output, CliError> {
    let (x, y) = (parse(a)?, parse(b)?);
    let sum = x.add(&y);
    ok(format!("{sum}\n"), json!({"a": x, "b": y, "sum": sum}))
}

pub fn ord_succ(a: &str) -> Result<Output, CliError> {
    let x = parse(a)?;
    let s = x.successor();
    ok(format!("{s}\n"), json!({"a": x, "successor": s}))
}

pub fn ord_ladder(beta: &str, count: u64) -> Result<Output, CliError> {
    let b = parse(beta)?;
    let points = (0..count)
        .map(|n| walks::ladder_point(&b, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(walk_error)?;
    let mut text = String::new();
    for (n, p) in points.iter().enumerate() {
        writeln!(text, "{b}[{n}] = {p}").unwrap();
    }
    ok(text, json!({"beta": b, "ladder": points}))
}

pub fn walk(alpha: &str, beta: &str) -> Result<Output, CliError> {
    let (a, b) = (parse(alpha)?, parse(beta)?);
    let trace = walks::walk(&a, &b).map_err(walk_error)?;
    let lower = walks::lower_trace(&a, &b).map_err(walk_error)?;
    let osc = if a < b {
        Some(walks::osc(&a, &b).map_err(walk_error)?)
    } else {
        None
    };

    let mut text = String::new();
    writeln!(text, "walk from {b} down to {a}").unwrap();
    writeln!(text, "{:>5}  {:<24} {:>8}  max(C ∩ α)", "step", "ordinal", "|C ∩ α|").unwrap();
    for (i, step) in trace.steps.iter().enumerate() {
        match trace.weights.get(i) {
            Some(w) => {
                let max = w.ladder_max.as_ref().map_or("-".to_string(), Ordinal::to_string);
                writeln!(text, "{i:>5}  {:<24} {:>8}  {max}", step.to_string(), w.ladder_below).unwrap();
            }
            None => writeln!(text, "{i:>5}  {step}").unwrap(),
        }
    }
    let rendered: Vec<String> = lower.elements().iter().map(Ordinal::to_string).collect();
    writeln!(text, "L({a}, {b}) = {{{}}}", rendered.join(", ")).unwrap();
    match osc {
        Some(v) => writeln!(text, "osc({a}, {b}) = {v}").unwrap(),
        None => writeln!(text, "osc({a}, {b}) is undefined (alpha = beta)").unwrap(),
    }
    ok(
        text,
        json!({"alpha": a, "beta": b, "steps": trace.steps, "weights": trace.weights, "lower_trace": lower, "osc": osc}),
    )
}

pub fn osc(alpha: &str, beta: &str) -> Result<Output, CliError> {
    let (a, b) = (parse(alpha)?, parse(beta)?);
    let set = walks::osc_set(&a, &b).map_err(walk_error)?;
    let e_alpha = walks::e_value(&a, &b).map_err(walk_error)?;
    let rendered: Vec<String> = set.elements().iter().map(Ordinal::to_string).collect();
    ok(
        format!(
            "osc({a}, {b}) = {}\noscillation points: {{{}}}\ne_{b}({a}) = {e_alpha}\n",
            set.len(),
            rendered.join(", ")
        ),
        json!({"alpha": a, "beta": b, "osc": set.len(), "points": set, "e_beta_alpha": e_alpha}),
    )
}

#[derive(Args, Debug)]
pub struct PointsArgs {
    /// Points w_beta to export, one CSV row each.
    pub betas: Vec<String>,
    /// Comma-separated window coordinates.
    #[arg(long, conflicts_with = "window_below")]
    pub window: Option<String>,
    /// Use the staircase below this ordinal (with --depth/--breadth) as the window.
    #[arg(long)]
    pub window_below: Option<String>,
    /// Append a row with the product of all exported points.
    #[arg(long)]
    pub product: bool,
    /// CSV path; the sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

pub fn points(args: &PointsArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let window: Vec<Ordinal> = match (&args.window, &args.window_below) {
        (Some(list), None) => parse_list(list)?,
        (None, Some(bound)) => staircase(&parse(bound)?, cfg.depth, cfg.breadth).into_iter().collect(),
        _ => return Err(CliError::Usage("give --window or --window-below".into())),
    };
    let betas: Vec<Ordinal> = args.betas.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
    let generators = GeneratorMap::new(window, cfg.precision);
    let table = OscTable::new();
    let mut rows: Vec<(String, PointVector)> = Vec::new();
    for b in &betas {
        rows.push((b.to_string(), torus::w(b, &generators, &table).map_err(torus_error)?));
    }
    if args.product {
        let mut acc = PointVector::identity(generators.window().clone(), cfg.precision);
        for (_, p) in &rows {
            acc = acc.multiply(p).map_err(torus_error)?;
        }
        rows.push(("product".to_string(), acc));
    }

    let path = args.file.clone().unwrap_or_else(|| cfg.out.join("points.csv"));
    let sidecar = path.with_extension("json");
    let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(&e))?;
    }
    let mut csv = csv::Writer::from_path(&path).map_err(|e| io(&e))?;
    let header: Vec<String> = generators.window().iter().map(Ordinal::to_string).collect();
    csv.write_record(&header).map_err(|e| io(&e))?;
    for (_, p) in &rows {
        csv.write_record(p.values().iter().map(|a| a.midpoint_decimal(cfg.digits)))
            .map_err(|e| io(&e))?;
    }
    csv.flush().map_err(|e| io(&e))?;

    let meta = json!({
        "precision": cfg.precision,
        "digits": cfg.digits,
        "window": header,
        "rows": rows.iter().map(|(label, p)| json!({
            "beta": label,
            "widths_ulps": p.values().iter().map(|a| a.width().to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    std::fs::write(&sidecar, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
    ok(
        format!(
            "wrote {} rows x {} coordinates to {}\nsidecar: {}\n",
            rows.len(),
            header.len(),
            path.display(),
            sidecar.display()
        ),
        json!({"csv": path, "sidecar": sidecar, "rows": rows.len(), "coordinates": header.len()}),
    )
}

#[derive(Args, Debug)]
pub struct KroneckerArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// Primes p_i; z_i = frac(sqrt(p_i)).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub primes: Vec<u64>,
    /// Start points u_i, in turns.
    #[arg(long, value_delimiter = ',')]
    pub u: Vec<f64>,
    /// Targets v_i, in turns.
    #[arg(long, value_delimiter = ',')]
    pub v: Vec<f64>,
    /// Compute a certified uniform bound n_eps instead of a single m.
    #[arg(long)]
    pub bound: bool,
    /// Largest precision the search escalates to on undecided comparisons.
    #[arg(long, default_value_t = 1024)]
    pub max_precision: u32,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn kronecker(args: &KroneckerArgs, cfg: &RunConfig, exec: Exec) -> Result<Output, CliError> {
    if let Some(p) = args.primes.iter().find(|&&p| !is_prime(p)) {
        return Err(CliError::Usage(format!("{p} is not prime")));
    }
    let k = args.primes.len();
    if args.bound {
        let z: Vec<Angle> = args.primes.iter().map(|&p| sqrt_fraction(p, cfg.precision)).collect();
        return match torus::kronecker_bound(&z, args.epsilon, cfg.search_cap) {
            Ok(b) => {
                if !b.verify(&z, args.epsilon) {
                    return Err(CliError::Internal("covering certificate failed re-verification".into()));
                }
                let grid = b.certificate.as_ref().map(|c| c.grid_bits);
                let cells = b.certificate.as_ref().map_or(0, |c| c.hits.len());
                ok(
                    format!(
                        "n_eps = {} for epsilon = {} over {k} generator(s); covering of {cells} cells verified\n",
                        b.n, args.epsilon
                    ),
                    json!({"n": b.n, "epsilon": args.epsilon, "primes": args.primes, "grid_bits": grid, "cells": cells, "verified": true}),
                )
            }
            Err(TorusError::CapExceeded { cap, detail }) => Ok(Output {
                text: format!("not found: search cap {cap} reached ({detail})\n"),
                json: json!({"n": null, "cap": cap, "detail": detail}),
                code: 1,
            }),
            Err(e) => Err(torus_error(e)),
        };
    }
    if args.u.len() != k || args.v.len() != k {
        return Err(CliError::Usage(format!("--u and --v need {k} values, one per prime")));
    }
    let build = |p: u32| {
        let turns = |xs: &[f64]| xs.iter().map(|&x| Angle::from_turns(x, p)).collect::<Vec<_>>();
        let z = args.primes.iter().map(|&q| sqrt_fraction(q, p)).collect();
        (turns(&args.u), turns(&args.v), z)
    };
    let start = cfg.precision.min(args.max_precision);
    match torus::kronecker_m_escalating(build, args.epsilon, cfg.search_cap, start, args.max_precision, exec) {
        Ok((Some(m), p)) => ok(
            format!("m = {m} (certified at {p} bits)\n"),
            json!({"m": m, "precision": p, "epsilon": args.epsilon}),
        ),
        Ok((None, p)) => ok(
            format!("not found below search cap {}\n", cfg.search_cap),
            json!({"m": null, "precision": p, "search_cap": cfg.search_cap}),
        ),
        Err(TorusError::Indeterminate { precision }) => Ok(Output {
            text: format!("undecided at {precision} bits; retry with a larger --max-precision\n"),
            json: json!({"m": null, "undecided_at": precision}),
            code: 1,
        }),
        Err(e) => Err(torus_error(e)),
    }
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    /// Members of the family, each a comma-separated list of ordinals.
    pub sets: Vec<String>,
    /// JSON file holding an array of arrays of ordinal literals.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub min_petals: usize,
}

pub fn delta(args: &DeltaArgs) -> Result<Output, CliError> {
    let mut family: Vec<BTreeSet<Ordinal>> = Vec::new();
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let sets: Vec<Vec<Value>> =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        for set in sets {
            let members = set
                .iter()
                .map(|v| match v {
                    Value::String(s) => parse(s),
                    other => parse(&other.to_string()),
                })
                .collect::<Result<_, _>>()?;
            family.push(members);
        }
    }
    for s in &args.sets {
        family.push(parse_list(s)?.into_iter().collect());
    }
    let render = |s: &BTreeSet<Ordinal>| {
        format!(
            "{{{}}}",
            s.iter().map(Ordinal::to_string).collect::<Vec<_>>().join(", ")
        )
    };
    match extract_delta_system(&family, args.min_petals) {
        Some(d) => {
            if !d.verify() {
                return Err(CliError::Internal("extracted system failed verification".into()));
            }
            let mut text = format!("root: {}\npetals ({}):\n", render(&d.root), d.petals.len());
            for p in &d.petals {
                writeln!(text, "  {}", render(p)).unwrap();
            }
            ok(text, json!({"found": true, "root": d.root, "petals": d.petals}))
        }
        None => ok(
            format!(
                "no Δ-system with at least {} petals among {} sets\n",
                args.min_petals,
                family.len()
            ),
            json!({"found": false, "members": family.len(), "min_petals": args.min_petals}),
        ),
    }
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    pub name: String,
    /// Exponent vector, e.g. `1,-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Parameter override `key=value`; the value is read as JSON, else as a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

fn lab_error(e: LabError) -> CliError {
    match e {
        LabError::Torus(TorusError::CertificationFailed { .. }) => CliError::Internal(e.to_string()),
        e => CliError::Usage(e.to_string()),
    }
}

pub fn experiment(
    args: &ExperimentArgs,
    cfg: &RunConfig,
    explicit: &Overrides,
    exec: Exec,
) -> Result<Output, CliError> {
    let defaults = lab::default_parameters(&args.name).map_err(lab_error)?;
    let has = |key: &str| defaults.get(key).is_some();
    let mut params = serde_json::Map::new();
    for (key, value) in [
        ("seed", explicit.seed.map(Value::from)),
        ("precision", explicit.precision.map(Value::from)),
        ("depth", explicit.depth.map(Value::from)),
        ("breadth", explicit.breadth.map(Value::from)),
    ] {
        if let Some(v) = value.filter(|_| has(key)) {
            params.insert(key.to_string(), v);
        }
    }
    if let Some(n) = &args.n {
        let values = n
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("--n `{n}`: {e}")))?;
        let key = if has("n") {
            "n"
        } else if has("exponents") {
            "exponents"
        } else {
            return Err(CliError::Usage(format!("`{}` takes no exponent vector", args.name)));
        };
        params.insert(key.to_string(), json!(values));
    }
    for item in &args.set {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set `{item}` is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        params.insert(key.trim().to_string(), value);
    }

    let table = OscTable::new();
    let ctx = Context { exec, table: &table };
    let record = lab::run_experiment(&args.name, Value::Object(params), &ctx).map_err(lab_error)?;
    let store = RecordStore::new(&cfg.out);
    let path = store.append(&record).map_err(|e| CliError::Io(e.to_string()))?;
    let code = match record.verdict {
        Verdict::Pass | Verdict::ReportOnly => 0,
        Verdict::Fail => 1,
        Verdict::InternalError => 4,
    };
    let verdict = serde_json::to_value(record.verdict).expect("verdict serializes");
    let mut text = format!(
        "{}: {}\nrecord: {}\nreport: {}\n",
        record.experiment,
        verdict.as_str().unwrap_or("?"),
        path.display(),
        record.report
    );
    for w in &record.warnings {
        writeln!(text, "warning: {w}").unwrap();
    }
    Ok(Output {
        text,
        json: json!({"experiment": record.experiment, "verdict": verdict, "record": path, "report": record.report}),
        code,
    })
}
