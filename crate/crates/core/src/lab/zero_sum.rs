//! Zero-sum functionals of oscillation: for a tuple `a` and exponents with
//! `Σ n_i = 0`, the value sets `V_S = {Σ_i n_i·osc(α, a(i)) : α ∈ S}` over
//! nested staircase samples `S` below `a(0)`, and whether `|V_S|` has
//! stopped growing between the last two levels.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{settle, Context, LabError, Outcome, Verdict};
use crate::ordinal::{staircase, Ordinal};
use crate::walks::{self, reference};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Random tuples to test (ignored when `tuple` is given).
    pub tuples: usize,
    pub max_arity: usize,
    pub max_coefficient: i64,
    pub depth: usize,
    /// Minimum sample sizes of the nested levels, increasing.
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Fraction of tuples that must stabilize for a pass.
    pub required_fraction: f64,
    /// An explicit tuple; requires `n`.
    pub tuple: Option<Vec<Ordinal>>,
    /// Explicit exponents; alone they fix the arity of the random tuples.
    pub n: Option<Vec<i64>>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            tuples: 100,
            max_arity: 4,
            max_coefficient: 3,
            depth: 2,
            sizes: vec![1000, 4000],
            seed: 1,
            required_fraction: 0.95,
            tuple: None,
            n: None,
        }
    }
}

pub(crate) fn check_exponents(n: &[i64]) -> Result<(), LabError> {
    if n.iter().sum::<i64>() != 0 {
        return Err(LabError::Precondition(format!("exponents {n:?} do not sum to zero")));
    }
    Ok(())
}

fn check_tuple(a: &[Ordinal], n: &[i64]) -> Result<(), LabError> {
    if a.is_empty() || a.len() != n.len() {
        return Err(LabError::InvalidParameters(format!(
            "tuple of length {} with {} exponents",
            a.len(),
            n.len()
        )));
    }
    if a.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Precondition("tuple is not strictly increasing".into()));
    }
    Ok(())
}

/// Staircase samples below `bound` of at least each of `sizes` elements,
/// each built with the least breadth that reaches its size (so each level
/// contains the previous one).
pub fn nested_samples(bound: &Ordinal, depth: usize, sizes: &[usize]) -> Vec<Vec<Ordinal>> {
    let size_at = |b: usize| staircase(bound, depth, b).len();
    let cap = 1usize << 20;
    let mut out = Vec::new();
    let mut lo = 0usize;
    for &target in sizes {
        let mut hi = lo.max(1);
        while size_at(hi) < target && hi < cap {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if size_at(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(staircase(bound, depth, hi).into_iter().collect());
        lo = hi.saturating_sub(1);
    }
    out
}

/// `value ↦ least α` (in sample order) attaining it.
pub(crate) fn functional_values(
    a: &[Ordinal],
    n: &[i64],
    sample: &[Ordinal],
    ctx: &Context,
) -> Result<BTreeMap<i64, Ordinal>, LabError> {
    let values = ctx.exec.map(sample, |alpha| -> Result<i64, LabError> {
        let mut v = 0;
        for (x, &c) in a.iter().zip(n) {
            if c != 0 {
                v += c * ctx.table.osc(alpha, x)? as i64;
            }
        }
        Ok(v)
    });
    let mut out = BTreeMap::new();
    for (alpha, v) in sample.iter().zip(values) {
        out.entry(v?).or_insert_with(|| alpha.clone());
    }
    Ok(out)
}

pub(crate) fn reference_value(a: &[Ordinal], n: &[i64], alpha: &Ordinal) -> Result<i64, LabError> {
    let mut v = 0;
    for (x, &c) in a.iter().zip(n) {
        if c != 0 {
            v += c * reference::osc(alpha, x)? as i64;
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleResult {
    pub a: Vec<Ordinal>,
    pub n: Vec<i64>,
    pub sample_sizes: Vec<usize>,
    pub cardinalities: Vec<usize>,
    pub stabilized: bool,
    /// `η`: the largest limit of the top sample.
    pub eta: Ordinal,
    pub m: usize,
    /// `(k·M + 1)·Σ|n_i|`.
    pub reference_bound: u64,
    pub within_bound: bool,
    /// Each value of the top level with the least `α` producing it.
    pub values: Vec<(i64, Ordinal)>,
}

pub fn evaluate_tuple(
    a: &[Ordinal],
    n: &[i64],
    depth: usize,
    sizes: &[usize],
    ctx: &Context,
) -> Result<TupleResult, LabError> {
    check_exponents(n)?;
    check_tuple(a, n)?;
    let levels = nested_samples(&a[0], depth, sizes);
    let mut cardinalities = Vec::new();
    let mut top = BTreeMap::new();
    for level in &levels {
        top = functional_values(a, n, level, ctx)?;
        cardinalities.push(top.len());
    }
    let stabilized =
        cardinalities.len() >= 2 && cardinalities[cardinalities.len() - 2] == cardinalities[cardinalities.len() - 1];
    let top_sample = levels.last().map(Vec::as_slice).unwrap_or(&[]);
    let eta = top_sample
        .iter()
        .rev()
        .find(|x| x.is_limit())
        .cloned()
        .unwrap_or_default();
    let mut m = 0;
    for x in a {
        m = m.max(walks::lower_trace(&eta, x)?.len());
    }
    let abs_sum: u64 = n.iter().map(|c| c.unsigned_abs()).sum();
    let reference_bound = (a.len() as u64 * m as u64 + 1) * abs_sum;
    let within_bound = (top.len() as u64) <= reference_bound.max(1);
    Ok(TupleResult {
        a: a.to_vec(),
        n: n.to_vec(),
        sample_sizes: levels.iter().map(Vec::len).collect(),
        cardinalities,
        stabilized,
        eta,
        m,
        reference_bound,
        within_bound,
        values: top.into_iter().collect(),
    })
}

fn random_limit_below_omega_cubed(rng: &mut ChaCha8Rng) -> Ordinal {
    if rng.random_range(0..10) == 0 {
        return Ordinal::omega_pow(Ordinal::from(3));
    }
    let c2 = rng.random_range(0..=3u64);
    let c1 = rng.random_range(if c2 == 0 { 1 } else { 0 }..=5u64);
    Ordinal::omega_pow_times(Ordinal::from(2), c2).add(&Ordinal::omega_pow_times(Ordinal::one(), c1))
}

fn random_increment(rng: &mut ChaCha8Rng) -> Ordinal {
    let e = rng.random_range(0..=3u64);
    let c = rng.random_range(1..=3u64);
    let f = rng.random_range(0..=3u64);
    Ordinal::omega_pow_times(Ordinal::from(e), c).add(&Ordinal::from(f))
}

fn random_exponents(rng: &mut ChaCha8Rng, k: usize, bound: i64) -> Vec<i64> {
    loop {
        let mut n: Vec<i64> = (0..k - 1).map(|_| rng.random_range(-bound..=bound)).collect();
        let last = -n.iter().sum::<i64>();
        if last.abs() <= bound {
            n.push(last);
            if n.iter().any(|&c| c != 0) {
                return n;
            }
        }
    }
}

/// A tuple `a` with its exponent vector `n`.
pub type Case = (Vec<Ordinal>, Vec<i64>);

/// The seeded tuples and exponents a run with these parameters tests.
pub fn sample_tuples(p: &Params) -> Result<Vec<Case>, LabError> {
    match (&p.tuple, &p.n) {
        (Some(a), Some(n)) => return Ok(vec![(a.clone(), n.clone())]),
        (Some(_), None) => return Err(LabError::InvalidParameters("`tuple` requires `n`".into())),
        _ => {}
    }
    if p.max_arity < 2 && p.n.is_none() {
        return Err(LabError::InvalidParameters("max_arity must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut out = Vec::with_capacity(p.tuples);
    for _ in 0..p.tuples {
        let n = match &p.n {
            Some(n) => n.clone(),
            None => {
                let k = rng.random_range(2..=p.max_arity);
                random_exponents(&mut rng, k, p.max_coefficient)
            }
        };
        let mut a = vec![random_limit_below_omega_cubed(&mut rng)];
        while a.len() < n.len() {
            let next = a.last().expect("nonempty").add(&random_increment(&mut rng));
            a.push(next);
        }
        out.push((a, n));
    }
    Ok(out)
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    if let Some(n) = &p.n {
        check_exponents(n)?;
    }
    let cases = sample_tuples(p)?;
    let mut results = Vec::with_capacity(cases.len());
    for (a, n) in &cases {
        results.push(evaluate_tuple(a, n, p.depth, &p.sizes, ctx)?);
    }
    let mut revalidated = true;
    for r in &results {
        for (value, alpha) in &r.values {
            revalidated &= reference_value(&r.a, &r.n, alpha)? == *value;
        }
    }
    let stabilized = results.iter().filter(|r| r.stabilized).count();
    let within = results.iter().filter(|r| r.within_bound).count();
    let fraction = if results.is_empty() {
        1.0
    } else {
        stabilized as f64 / results.len() as f64
    };
    let mut warnings = Vec::new();
    if p.sizes.len() < 2 {
        warnings.push("fewer than two sample levels; stabilization is undefined".into());
    }
    let report = json!({
        "tuples": results.len(),
        "stabilized": stabilized,
        "fraction_stabilized": fraction,
        "within_reference_bound": within,
        "max_cardinality": results.iter().flat_map(|r| r.cardinalities.iter().copied()).max().unwrap_or(0),
    });
    let pass = fraction >= p.required_fraction;
    Ok(Outcome {
        witnesses: serde_json::to_value(&results).expect("witnesses serialize"),
        report,
        verdict: settle(revalidated, if pass { Verdict::Pass } else { Verdict::Fail }),
        warnings,
    })
}
