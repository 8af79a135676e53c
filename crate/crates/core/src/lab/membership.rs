//! Search for pairs `a < b` with `Π_{j∈v_r} o(a(i), b(j))^{n_j} ∈ U_i` for
//! every `i ∈ u_r`, `r ∈ {0, 1}`, where `U_i` is the chordal `ε`-ball
//! around a target angle.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::osc_ladder::families;
use super::{settle, Context, LabError, Outcome, Verdict};
use crate::combinatorics::{tuple_lt, TupleFamily};
use crate::exec::Exec;
use crate::ordinal::{staircase, Ordinal};
use crate::torus::{certify, kronecker_m, Angle, GeneratorMap, TorusError};
use crate::walks::reference;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub bound: Ordinal,
    pub depth: usize,
    pub breadth: usize,
    pub arity_a: usize,
    pub arity_b: usize,
    pub family_size: usize,
    pub seed: u64,
    /// `u_0`; `u_1` is the rest of `0..arity_a`.
    pub u0: Vec<usize>,
    /// `v_0`; `v_1` is the rest of `0..arity_b`.
    pub v0: Vec<usize>,
    pub exponents: Vec<i64>,
    /// Target centres in turns, one per `i < arity_a`.
    pub centers: Vec<f64>,
    pub epsilon: f64,
    pub precision: u32,
    pub a_family: Option<TupleFamily>,
    pub b_family: Option<TupleFamily>,
    pub max_listed: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            bound: Ordinal::omega_pow(Ordinal::from(3)),
            depth: 2,
            breadth: 6,
            arity_a: 1,
            arity_b: 1,
            family_size: 40,
            seed: 1,
            u0: vec![0],
            v0: vec![0],
            exponents: vec![1],
            centers: vec![0.5],
            epsilon: 0.2,
            precision: 128,
            a_family: None,
            b_family: None,
            max_listed: 16,
        }
    }
}

#[derive(Serialize)]
struct Witness {
    a: Vec<Ordinal>,
    b: Vec<Ordinal>,
    /// Total exponent of `z_{a(i)}` in the product for each `i`.
    exponents: Vec<i64>,
}

struct Blocks {
    /// `(u_r, v_r)` for each `r` with `u_r` nonempty.
    parts: Vec<(Vec<usize>, Vec<usize>)>,
}

fn blocks(p: &Params) -> Result<Blocks, LabError> {
    let bad = |m: String| Err(LabError::InvalidParameters(m));
    if p.exponents.len() != p.arity_b {
        return bad(format!("{} exponents for arity {}", p.exponents.len(), p.arity_b));
    }
    if p.centers.len() != p.arity_a {
        return bad(format!("{} centres for arity {}", p.centers.len(), p.arity_a));
    }
    if p.u0.iter().any(|&i| i >= p.arity_a) || p.v0.iter().any(|&j| j >= p.arity_b) {
        return bad("partition index out of range".into());
    }
    let u1: Vec<usize> = (0..p.arity_a).filter(|i| !p.u0.contains(i)).collect();
    let v1: Vec<usize> = (0..p.arity_b).filter(|j| !p.v0.contains(j)).collect();
    let mut parts = Vec::new();
    for (r, (u, v)) in [(p.u0.clone(), p.v0.clone()), (u1, v1)].into_iter().enumerate() {
        // A block with no `i` constrains nothing, so its exponent sum is free.
        if u.is_empty() {
            continue;
        }
        let sum: i64 = v.iter().map(|&j| p.exponents[j]).sum();
        if sum == 0 {
            return Err(LabError::Precondition(format!("the exponents over v_{r} sum to zero")));
        }
        parts.push((u, v));
    }
    Ok(Blocks { parts })
}

enum Membership {
    Inside,
    Outside,
    Undecided,
}

fn member(theta: &Angle, exponent: i64, center: &Angle, epsilon: f64) -> Result<Membership, LabError> {
    let point = theta.mul_i64(exponent);
    let id = Angle::identity(theta.precision());
    match kronecker_m(
        &[point],
        std::slice::from_ref(center),
        &[id],
        epsilon,
        1,
        Exec::Sequential,
    ) {
        Ok(Some(_)) => Ok(Membership::Inside),
        Ok(None) => Ok(Membership::Outside),
        Err(TorusError::Indeterminate { .. }) => Ok(Membership::Undecided),
        Err(e) => Err(e.into()),
    }
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    let blocks = blocks(p)?;
    let (fa, fb) = match (&p.a_family, &p.b_family) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => families(
            &p.bound,
            p.depth,
            p.breadth,
            p.arity_a,
            p.arity_b,
            p.family_size,
            p.seed,
        )?,
    };
    let mut window: Vec<Ordinal> = staircase(&p.bound, p.depth, p.breadth).into_iter().collect();
    window.extend(fa.support());
    let generators = GeneratorMap::new(window, p.precision);
    let centers: Vec<Angle> = p.centers.iter().map(|&c| Angle::from_turns(c, p.precision)).collect();

    let exponent_of = |a: &[Ordinal],
                       b: &[Ordinal],
                       i: usize,
                       v: &[usize],
                       osc: &dyn Fn(&Ordinal, &Ordinal) -> Result<u64, LabError>|
     -> Result<i64, LabError> {
        let mut total = 0;
        for &j in v {
            total += p.exponents[j] * (osc(&a[i], &b[j])? as i64 + 1);
        }
        Ok(total)
    };
    let fast = |x: &Ordinal, y: &Ordinal| ctx.table.osc(x, y).map_err(LabError::from);
    let slow = |x: &Ordinal, y: &Ordinal| reference::osc(x, y).map_err(LabError::from);

    let per_a = ctx
        .exec
        .map(fa.tuples(), |a| -> Result<(u64, u64, Vec<Witness>), LabError> {
            let (mut pairs, mut undecided, mut found) = (0, 0, Vec::new());
            for b in fb.tuples().iter().filter(|b| tuple_lt(a, b)) {
                pairs += 1;
                let mut exps = vec![0i64; p.arity_a];
                let mut inside = true;
                let mut unsure = false;
                for (u, v) in &blocks.parts {
                    for &i in u {
                        exps[i] = exponent_of(a, b, i, v, &fast)?;
                        match member(generators.z(&a[i])?, exps[i], &centers[i], p.epsilon)? {
                            Membership::Inside => {}
                            Membership::Outside => inside = false,
                            Membership::Undecided => unsure = true,
                        }
                    }
                }
                if inside && !unsure {
                    found.push(Witness {
                        a: a.clone(),
                        b: b.clone(),
                        exponents: exps,
                    });
                } else if inside {
                    undecided += 1;
                }
            }
            Ok((pairs, undecided, found))
        });

    let (mut pairs, mut undecided, mut all) = (0u64, 0u64, Vec::new());
    for r in per_a {
        let (pc, uc, f) = r?;
        pairs += pc;
        undecided += uc;
        all.extend(f);
    }
    let witness_count = all.len();
    all.truncate(p.max_listed);

    let mut revalidated = true;
    for w in &all {
        revalidated &= tuple_lt(&w.a, &w.b);
        for (u, v) in &blocks.parts {
            for &i in u {
                let e = exponent_of(&w.a, &w.b, i, v, &slow)?;
                let theta = generators.z(&w.a[i])?;
                let id = Angle::identity(p.precision);
                revalidated &= e == w.exponents[i]
                    && certify::certify_within(
                        &[theta.mul_i64(e)],
                        std::slice::from_ref(&centers[i]),
                        &[id],
                        0,
                        p.epsilon,
                    );
            }
        }
    }

    let report = json!({
        "pairs_a_below_b": pairs,
        "witness_count": witness_count,
        "frequency": if pairs == 0 { 0.0 } else { witness_count as f64 / pairs as f64 },
        "undecided": undecided,
    });
    Ok(Outcome {
        witnesses: serde_json::to_value(&all).expect("witnesses serialize"),
        report,
        verdict: settle(revalidated, Verdict::ReportOnly),
        warnings: Vec::new(),
    })
}
