//! Restrictions `w_ξ|window` for sampled `ξ`: how many are distinct, and
//! which `ξ ≠ ζ` collide. Restrictions are compared as exponent vectors, so
//! the comparison is exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{settle, Context, LabError, Outcome, Verdict};
use crate::ordinal::{staircase, Ordinal};
use crate::torus::w_exponents;
use crate::walks::reference;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub gamma: Ordinal,
    pub window_size: usize,
    /// Staircase `(depth, breadth)` below `gamma` the window is drawn from.
    pub window_depth: usize,
    pub window_breadth: usize,
    pub xi_bound: Ordinal,
    pub xi_count: usize,
    pub xi_depth: usize,
    pub xi_breadth: usize,
    pub seed: u64,
    pub window: Option<Vec<Ordinal>>,
    pub xi_sample: Option<Vec<Ordinal>>,
    /// Members listed per collision class.
    pub max_listed: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            gamma: Ordinal::omega_pow(Ordinal::from(3)),
            window_size: 5,
            window_depth: 2,
            window_breadth: 6,
            xi_bound: Ordinal::omega_pow(Ordinal::from(4)),
            xi_count: 1000,
            xi_depth: 3,
            xi_breadth: 12,
            seed: 1,
            window: None,
            xi_sample: None,
            max_listed: 8,
        }
    }
}

fn draw(pool: Vec<Ordinal>, count: usize, rng: &mut ChaCha8Rng) -> Vec<Ordinal> {
    let mut pool = pool;
    pool.shuffle(rng);
    pool.truncate(count);
    pool.sort();
    pool
}

#[derive(Serialize)]
struct Class {
    exponents: Vec<i64>,
    size: usize,
    members: Vec<Ordinal>,
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let window = match &p.window {
        Some(w) => {
            let mut w = w.clone();
            w.sort();
            w.dedup();
            w
        }
        None => {
            let pool: Vec<Ordinal> = staircase(&p.gamma, p.window_depth, p.window_breadth)
                .into_iter()
                .collect();
            draw(pool, p.window_size, &mut rng)
        }
    };
    if let Some(bad) = window.iter().find(|x| **x >= p.gamma) {
        return Err(LabError::Precondition(format!(
            "window coordinate {bad} is not below {}",
            p.gamma
        )));
    }
    let sample = match &p.xi_sample {
        Some(s) => s.clone(),
        None => {
            let pool: Vec<Ordinal> = staircase(&p.xi_bound, p.xi_depth, p.xi_breadth).into_iter().collect();
            draw(pool, p.xi_count, &mut rng)
        }
    };
    let mut warnings = Vec::new();
    if sample.len() < p.xi_count && p.xi_sample.is_none() {
        warnings.push(format!("only {} ordinals available for the ξ sample", sample.len()));
    }

    let window: Arc<[Ordinal]> = Arc::from(window);
    let vectors = ctx.exec.map(&sample, |xi| w_exponents(xi, &window, ctx.table));
    let mut classes: BTreeMap<Vec<i64>, Vec<Ordinal>> = BTreeMap::new();
    for (xi, v) in sample.iter().zip(vectors) {
        classes.entry(v?.exponents().to_vec()).or_default().push(xi.clone());
    }
    let collision_pairs: u64 = classes.values().map(|m| (m.len() * (m.len() - 1) / 2) as u64).sum();
    let listed: Vec<Class> = classes
        .iter()
        .filter(|(_, m)| m.len() > 1)
        .map(|(e, m)| Class {
            exponents: e.clone(),
            size: m.len(),
            members: m.iter().take(p.max_listed).cloned().collect(),
        })
        .collect();

    let mut revalidated = true;
    for class in &listed {
        for xi in &class.members {
            for (alpha, &e) in window.iter().zip(&class.exponents) {
                let expect = if alpha < xi {
                    reference::osc(alpha, xi)? as i64 + 1
                } else {
                    0
                };
                revalidated &= expect == e;
            }
        }
    }

    let report = json!({
        "window": window.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "sample_size": sample.len(),
        "distinct_restrictions": classes.len(),
        "collision_pairs": collision_pairs,
        "collision_classes": listed.len(),
    });
    Ok(Outcome {
        witnesses: serde_json::to_value(&listed).expect("witnesses serialize"),
        report,
        verdict: settle(revalidated, Verdict::ReportOnly),
        warnings,
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
    fn empty_window_has_one_restriction() {
        let table = OscTable::new();
        let p = Params {
            window: Some(vec![]),
            xi_count: 50,
            ..Params::default()
        };
        let out = run(&p, &ctx(&table)).unwrap();
        assert_eq!(out.report["distinct_restrictions"], 1);
        assert_eq!(out.report["collision_pairs"], 50 * 49 / 2);
    }

    #[test]
    fn sample_below_window_is_identity() {
        let table = OscTable::new();
        let p = Params {
            window: Some(vec![o("w"), o("w*2")]),
            xi_sample: Some((0..10u64).map(Ordinal::from).collect()),
            ..Params::default()
        };
        let out = run(&p, &ctx(&table)).unwrap();
        assert_eq!(out.report["distinct_restrictions"], 1);
        assert_eq!(out.witnesses[0]["exponents"], json!([0, 0]));
    }

    #[test]
    fn window_must_sit_below_gamma() {
        let table = OscTable::new();
        let p = Params {
            gamma: o("w"),
            window: Some(vec![o("w")]),
            ..Params::default()
        };
        assert!(matches!(run(&p, &ctx(&table)), Err(LabError::Precondition(_))));
    }
}
