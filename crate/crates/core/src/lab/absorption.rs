//! For `b ∈ B` and exponents with `Σ n_j = 0`, the point
//! `y′_b = Π_j w_{b(j)}^{n_j}` restricted to the coordinates below `b(0)`
//! (identity elsewhere), stored as an exponent vector. Its exponents are
//! values of the zero-sum functional of `b`, so they should stay within the
//! bound that functional shows on nested samples.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::osc_ladder::osc_matrix;
use super::zero_sum::{check_exponents, evaluate_tuple};
use super::{settle, Context, LabError, Outcome, Verdict};
use crate::combinatorics::{sample_disjoint_family, TupleFamily};
use crate::ordinal::{staircase, Ordinal};
use crate::torus::ExponentVector;
use crate::walks::reference;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub n: Vec<i64>,
    pub family_size: usize,
    pub family_bound: Ordinal,
    pub family_depth: usize,
    pub family_breadth: usize,
    pub window_bound: Ordinal,
    pub window_depth: usize,
    pub window_breadth: usize,
    /// Nested sample sizes for the zero-sum bound of each `b`.
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub family: Option<TupleFamily>,
    pub window: Option<Vec<Ordinal>>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: vec![1, -1],
            family_size: 12,
            family_bound: Ordinal::omega_pow(Ordinal::from(4)),
            family_depth: 2,
            family_breadth: 6,
            window_bound: Ordinal::omega_pow(Ordinal::from(3)),
            window_depth: 2,
            window_breadth: 6,
            sizes: vec![250, 1000],
            seed: 1,
            family: None,
            window: None,
        }
    }
}

#[derive(Serialize)]
struct Absorbed {
    b: Vec<Ordinal>,
    exponents: ExponentVector,
    max_exponent: u64,
    stabilized: bool,
    /// Largest `|v|` over the top nested sample of the zero-sum functional.
    stabilized_bound: u64,
}

/// `y′_b` on `window`.
pub fn y_prime(b: &[Ordinal], n: &[i64], window: &Arc<[Ordinal]>, ctx: &Context) -> Result<ExponentVector, LabError> {
    let mut exps = Vec::with_capacity(window.len());
    for alpha in window.iter() {
        if b.first().is_some_and(|b0| alpha < b0) {
            let m = osc_matrix(ctx, std::slice::from_ref(alpha), b)?;
            exps.push(m.iter().zip(n).map(|(o, c)| c * (*o as i64 + 1)).sum());
        } else {
            exps.push(0);
        }
    }
    Ok(ExponentVector::new(window.clone(), exps)?)
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    check_exponents(&p.n)?;
    let family = match &p.family {
        Some(f) => f.clone(),
        None => {
            let pool: Vec<Ordinal> = staircase(&p.family_bound, p.family_depth, p.family_breadth)
                .into_iter()
                .collect();
            sample_disjoint_family(&pool, p.n.len(), p.family_size, p.seed)?
        }
    };
    if family.arity() != p.n.len() {
        return Err(LabError::InvalidParameters(format!(
            "family arity {} but {} exponents",
            family.arity(),
            p.n.len()
        )));
    }
    let window: Arc<[Ordinal]> = match &p.window {
        Some(w) => {
            let mut w = w.clone();
            w.sort();
            w.dedup();
            Arc::from(w)
        }
        None => staircase(&p.window_bound, p.window_depth, p.window_breadth)
            .into_iter()
            .collect(),
    };

    let mut rows = Vec::with_capacity(family.len());
    for b in family.tuples() {
        let y = y_prime(b, &p.n, &window, ctx)?;
        let zs = evaluate_tuple(b, &p.n, p.window_depth, &p.sizes, ctx)?;
        let stabilized_bound = zs.values.iter().map(|(v, _)| v.unsigned_abs()).max().unwrap_or(0);
        rows.push(Absorbed {
            b: b.clone(),
            max_exponent: y.bound(),
            exponents: y,
            stabilized: zs.stabilized,
            stabilized_bound,
        });
    }

    let mut revalidated = true;
    for row in &rows {
        for (alpha, &e) in window.iter().zip(row.exponents.exponents()) {
            let expect = if *alpha < row.b[0] {
                let mut v = 0;
                for (x, &c) in row.b.iter().zip(&p.n) {
                    v += c * (reference::osc(alpha, x)? as i64 + 1);
                }
                v
            } else {
                0
            };
            revalidated &= expect == e;
        }
    }

    let absorbed = rows.iter().filter(|r| r.max_exponent <= r.stabilized_bound).count();
    let report = json!({
        "family": rows.len(),
        "window": window.len(),
        "within_stabilized_bound": absorbed,
        "all_stabilized": rows.iter().all(|r| r.stabilized),
        "max_exponent": rows.iter().map(|r| r.max_exponent).max().unwrap_or(0),
    });
    let pass = absorbed == rows.len();
    Ok(Outcome {
        witnesses: serde_json::to_value(&rows).expect("witnesses serialize"),
        report,
        verdict: settle(revalidated, if pass { Verdict::Pass } else { Verdict::Fail }),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::walks::OscTable;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn ctx(table: &OscTable) -> Context<'_> {
        Context {
            exec: Exec::Parallel,
            table,
        }
    }

    #[test]
    fn exponents_follow_the_definition() {
        let table = OscTable::new();
        let c = ctx(&table);
        let b = vec![o("w^(2)"), o("w^(3)")];
        let window: Arc<[Ordinal]> = Arc::from(vec![o("3"), o("w+1"), o("w^(2)"), o("w^(2)+1")]);
        let y = y_prime(&b, &[1, -1], &window, &c).unwrap();
        for (alpha, &e) in window.iter().zip(y.exponents()) {
            let expect = if *alpha < b[0] {
                reference::osc(alpha, &b[0]).unwrap() as i64 - reference::osc(alpha, &b[1]).unwrap() as i64
            } else {
                0
            };
            assert_eq!(e, expect);
        }
    }

    #[test]
    fn window_above_family_is_identity() {
        let table = OscTable::new();
        let b = vec![o("3"), o("5")];
        let window: Arc<[Ordinal]> = Arc::from(vec![o("w"), o("w*2")]);
        assert!(y_prime(&b, &[2, -2], &window, &ctx(&table)).unwrap().is_identity());
        let y = y_prime(&[o("w")], &[0], &window, &ctx(&table)).unwrap();
        assert!(y.is_identity());
    }

    #[test]
    fn nonzero_sum_rejected() {
        let table = OscTable::new();
        let p = Params {
            n: vec![1, 1],
            ..Params::default()
        };
        assert!(matches!(run(&p, &ctx(&table)), Err(LabError::Precondition(_))));
    }
}
