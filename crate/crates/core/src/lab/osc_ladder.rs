//! Search for `a ∈ A` and `b_0, …, b_{n−1} ∈ B` above `a` whose
//! oscillation matrices climb by one per step:
//! `osc(a(i), b_m(j)) = osc(a(i), b_0(j)) + m` for all `i, j, m`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{settle, Context, LabError, Outcome, Verdict};
use crate::combinatorics::{sample_disjoint_family, tuple_lt, FamilyError, TupleFamily};
use crate::ordinal::{staircase, Ordinal};
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
    pub n: u64,
    pub seed: u64,
    /// Explicit families; when absent they are sampled from the staircase.
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
            arity_a: 2,
            arity_b: 2,
            family_size: 12,
            n: 2,
            seed: 1,
            a_family: None,
            b_family: None,
            max_listed: 16,
        }
    }
}

pub(crate) fn families(
    p_bound: &Ordinal,
    depth: usize,
    breadth: usize,
    arity_a: usize,
    arity_b: usize,
    size: usize,
    seed: u64,
) -> Result<(TupleFamily, TupleFamily), LabError> {
    let window: Vec<Ordinal> = staircase(p_bound, depth, breadth).into_iter().collect();
    let a = sample_disjoint_family(&window, arity_a, size, seed)?;
    let b = sample_disjoint_family(&window, arity_b, size, seed.wrapping_add(1))?;
    Ok((a, b))
}

pub(crate) fn osc_matrix(ctx: &Context, a: &[Ordinal], b: &[Ordinal]) -> Result<Vec<u64>, LabError> {
    let mut m = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            m.push(ctx.table.osc(x, y)?);
        }
    }
    Ok(m)
}

fn reference_matrix(a: &[Ordinal], b: &[Ordinal]) -> Result<Vec<u64>, LabError> {
    let mut m = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            m.push(reference::osc(x, y)?);
        }
    }
    Ok(m)
}

#[derive(Serialize)]
struct Witness {
    a: Vec<Ordinal>,
    b: Vec<Vec<Ordinal>>,
    base: Vec<u64>,
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    if p.n == 0 {
        return Err(LabError::Precondition("n must be at least 1".into()));
    }
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
    if !fa.is_pairwise_disjoint() || !fb.is_pairwise_disjoint() {
        return Err(FamilyError::NotDisjoint.into());
    }

    let per_a = ctx
        .exec
        .map(fa.tuples(), |a| -> Result<(u64, u64, Vec<Witness>), LabError> {
            let above: Vec<&Vec<Ordinal>> = fb.tuples().iter().filter(|b| tuple_lt(a, b)).collect();
            let mut by_matrix: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut matrices = Vec::with_capacity(above.len());
            for (idx, b) in above.iter().enumerate() {
                let m = osc_matrix(ctx, a, b)?;
                by_matrix.entry(m.clone()).or_insert(idx);
                matrices.push(m);
            }
            let mut found = Vec::new();
            for (idx0, base) in matrices.iter().enumerate() {
                let chain: Option<Vec<usize>> = std::iter::once(Some(idx0))
                    .chain((1..p.n).map(|m| {
                        let shifted: Vec<u64> = base.iter().map(|v| v + m).collect();
                        by_matrix.get(&shifted).copied()
                    }))
                    .collect();
                if let Some(chain) = chain {
                    found.push(Witness {
                        a: a.clone(),
                        b: chain.iter().map(|&i| above[i].clone()).collect(),
                        base: base.clone(),
                    });
                }
            }
            Ok((above.len() as u64, found.len() as u64, found))
        });

    let mut candidates = 0;
    let mut witness_count = 0;
    let mut listed = Vec::new();
    for r in per_a {
        let (c, w, found) = r?;
        candidates += c;
        witness_count += w;
        for f in found {
            if listed.len() < p.max_listed {
                listed.push(f);
            }
        }
    }

    let mut revalidated = true;
    for w in &listed {
        let base = reference_matrix(&w.a, &w.b[0])?;
        revalidated &= base == w.base;
        for (m, b) in w.b.iter().enumerate() {
            revalidated &= tuple_lt(&w.a, b);
            let got = reference_matrix(&w.a, b)?;
            revalidated &= got.iter().zip(&base).all(|(g, b0)| *g == b0 + m as u64);
        }
    }

    let report = json!({
        "family_a": fa.len(),
        "family_b": fb.len(),
        "n": p.n,
        "pairs_a_below_b": candidates,
        "witness_count": witness_count,
        "listed": listed.len(),
    });
    Ok(Outcome {
        witnesses: serde_json::to_value(&listed).expect("witnesses serialize"),
        report,
        verdict: settle(revalidated, Verdict::ReportOnly),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::walks::OscTable;

    fn family(arity: usize, items: &[&[&str]]) -> TupleFamily {
        TupleFamily::new(
            arity,
            items
                .iter()
                .map(|t| t.iter().map(|s| s.parse().unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_step_witnesses_every_pair_above() {
        let table = OscTable::new();
        let ctx = Context {
            exec: Exec::Sequential,
            table: &table,
        };
        let p = Params {
            n: 1,
            a_family: Some(family(1, &[&["3"], &["w+1"]])),
            b_family: Some(family(1, &[&["w"], &["w*2"], &["2"]])),
            ..Params::default()
        };
        let out = run(&p, &ctx).unwrap();
        // 3 < w, 3 < w*2, w+1 < w*2.
        assert_eq!(out.report["witness_count"], 3);
        assert_eq!(out.verdict, Verdict::ReportOnly);
    }

    #[test]
    fn empty_a_finds_nothing() {
        let table = OscTable::new();
        let ctx = Context {
            exec: Exec::Parallel,
            table: &table,
        };
        let p = Params {
            a_family: Some(TupleFamily::empty(1)),
            b_family: Some(family(1, &[&["w"]])),
            ..Params::default()
        };
        let out = run(&p, &ctx).unwrap();
        assert_eq!(out.report["witness_count"], 0);
    }

    #[test]
    fn overlapping_family_is_rejected() {
        let table = OscTable::new();
        let ctx = Context {
            exec: Exec::Sequential,
            table: &table,
        };
        let p = Params {
            a_family: Some(family(2, &[&["1", "2"], &["2", "3"]])),
            b_family: Some(family(1, &[&["w"]])),
            ..Params::default()
        };
        assert!(matches!(run(&p, &ctx), Err(LabError::Family(FamilyError::NotDisjoint))));
    }
}
