//! Properties of the lower trace over a staircase sample:
//!
//! * (i) `L(α,β) ⊂ α`, empty exactly when `α = 0` or `α = β`;
//! * (ii) `L(α,γ) = L(β,γ) ∪ L(α,β)` whenever `max L(β,γ) < min L(α,β)`;
//! * (iii) `min L(β[n], β)` climbs the ladder of `β`;
//!
//! plus a coherence metric for `e`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{settle, Context, LabError, Outcome, Verdict};
use crate::ordinal::{staircase, Ordinal};
use crate::walks::{self, ladder_point, reference, LowerTrace};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub bound: Ordinal,
    pub depth: usize,
    pub breadth: usize,
    /// Limits of the sample examined for (iii).
    pub ladder_limits: usize,
    /// Ladder indices `n < ladder_indices` examined for (iii).
    pub ladder_indices: u64,
    /// The lag `c` in `min L(β[n], β) > β[n−c]`.
    pub ladder_lag: u64,
    /// Pairs sampled for the coherence metric.
    pub coherence_pairs: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            bound: Ordinal::omega_pow(Ordinal::from(4)),
            depth: 3,
            breadth: 8,
            ladder_limits: 10,
            ladder_indices: 64,
            ladder_lag: 4,
            coherence_pairs: 24,
        }
    }
}

/// How `min L(β[n], β)` sits against the ladder of `β` for `n < indices`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LadderProfile {
    pub beta: Ordinal,
    pub lag: u64,
    /// Indices `n` with `min L(β[n], β) ≤ β[n−lag]` (reading `β[j] = 0` for `j < 0`).
    pub exceptions: Vec<u64>,
    /// One past the last exception.
    pub onset: u64,
    /// `min L(β[n], β)` is nondecreasing from the onset on.
    pub nondecreasing_after_onset: bool,
}

pub fn ladder_profile(beta: &Ordinal, indices: u64, lag: u64) -> Result<LadderProfile, LabError> {
    let point = |j: i64| -> Result<Ordinal, LabError> {
        if j < 0 {
            Ok(Ordinal::zero())
        } else {
            Ok(ladder_point(beta, j as u64)?)
        }
    };
    let mut exceptions = Vec::new();
    let mut mins = Vec::new();
    for n in 0..indices {
        let x = point(n as i64)?;
        let l = walks::lower_trace(&x, beta)?;
        let m = l.min().cloned().unwrap_or_default();
        if m <= point(n as i64 - lag as i64)? {
            exceptions.push(n);
        }
        mins.push(m);
    }
    let onset = exceptions.last().map_or(0, |&n| n + 1);
    let nondecreasing_after_onset = mins[onset.min(indices) as usize..].windows(2).all(|w| w[0] <= w[1]);
    Ok(LadderProfile {
        beta: beta.clone(),
        lag,
        exceptions,
        onset,
        nondecreasing_after_onset,
    })
}

struct PairData {
    trace: LowerTrace,
    steps: usize,
}

#[derive(Default)]
struct TripleTally {
    checked: u64,
    non_vacuous: u64,
    failures: Vec<[usize; 3]>,
    examples: Vec<[usize; 3]>,
}

const LISTED: usize = 8;

fn property_i(alpha: &Ordinal, beta: &Ordinal, l: &[Ordinal]) -> bool {
    let empty_expected = alpha.is_zero() || alpha == beta;
    l.iter().all(|x| x < alpha) && l.is_empty() == empty_expected
}

fn guard_holds(lab: &[Ordinal], lbc: &[Ordinal]) -> bool {
    match (lbc.last(), lab.first()) {
        (Some(top), Some(bottom)) => top < bottom,
        _ => false,
    }
}

fn union(a: &[Ordinal], b: &[Ordinal]) -> Vec<Ordinal> {
    let mut v: Vec<Ordinal> = a.iter().chain(b).cloned().collect();
    v.sort();
    v.dedup();
    v
}

pub fn run(p: &Params, ctx: &Context) -> Result<Outcome, LabError> {
    let sample: Vec<Ordinal> = staircase(&p.bound, p.depth, p.breadth).into_iter().collect();
    let n = sample.len();
    let mut warnings = Vec::new();
    if p.breadth == 0 || n < 2 {
        warnings.push(format!(
            "degenerate staircase of {n} ordinals; properties hold vacuously"
        ));
    }

    // rows[i][j - i] = data for (sample[i], sample[j]), i ≤ j.
    let rows = ctx.exec.map_range(0..n, |i| {
        (i..n)
            .map(|j| {
                let w = walks::walk(&sample[i], &sample[j])?;
                Ok(PairData {
                    trace: LowerTrace::from(&w),
                    steps: w.steps.len(),
                })
            })
            .collect::<Result<Vec<_>, LabError>>()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let l = |i: usize, j: usize| rows[i][j - i].trace.elements();

    let mut i_failures = Vec::new();
    let mut max_steps = 0;
    for i in 0..n {
        for j in i..n {
            max_steps = max_steps.max(rows[i][j - i].steps);
            if !property_i(&sample[i], &sample[j], l(i, j)) {
                i_failures.push([i, j]);
            }
        }
    }
    let pairs = (n * (n + 1) / 2) as u64;

    let tallies = ctx.exec.map_range(0..n, |i| {
        let mut t = TripleTally::default();
        for j in i + 1..n {
            let lab = l(i, j);
            for k in j + 1..n {
                t.checked += 1;
                let lbc = l(j, k);
                if !guard_holds(lab, lbc) {
                    continue;
                }
                t.non_vacuous += 1;
                if union(lbc, lab) != l(i, k) {
                    if t.failures.len() < LISTED {
                        t.failures.push([i, j, k]);
                    }
                } else if t.examples.len() < LISTED {
                    t.examples.push([i, j, k]);
                }
            }
        }
        t
    });
    let mut triples = TripleTally::default();
    let mut ii_failure_count = 0u64;
    for t in tallies {
        triples.checked += t.checked;
        triples.non_vacuous += t.non_vacuous;
        ii_failure_count += t.failures.len() as u64;
        triples.failures.extend(t.failures);
        for e in t.examples {
            if triples.examples.len() < LISTED {
                triples.examples.push(e);
            }
        }
    }
    triples.failures.truncate(LISTED);

    // (iii): limits spread evenly over the sample.
    let limits: Vec<&Ordinal> = sample.iter().filter(|x| x.is_limit()).collect();
    let chosen: Vec<&Ordinal> = if limits.len() <= p.ladder_limits {
        limits.clone()
    } else {
        (0..p.ladder_limits)
            .map(|t| limits[t * limits.len() / p.ladder_limits])
            .collect()
    };
    let profiles = ctx
        .exec
        .map(&chosen, |b| ladder_profile(b, p.ladder_indices, p.ladder_lag))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let coherence = coherence_metric(p, &sample, ctx)?;

    // Re-validate every listed triple and pair through the reference walk.
    let ref_l = |a: usize, b: usize| reference::lower_trace(&sample[a], &sample[b]);
    let mut revalidated = true;
    for &[i, j, k] in triples.examples.iter().chain(&triples.failures) {
        let (lab, lbc, lac) = (ref_l(i, j)?, ref_l(j, k)?, ref_l(i, k)?);
        let claimed_ok = !triples.failures.contains(&[i, j, k]);
        revalidated &= guard_holds(&lab, &lbc) && (union(&lbc, &lab) == lac) == claimed_ok;
    }
    for &[i, j] in i_failures.iter().take(LISTED) {
        revalidated &= !property_i(&sample[i], &sample[j], &ref_l(i, j)?);
    }

    let render = |idx: &[usize]| idx.iter().map(|&x| sample[x].to_string()).collect::<Vec<_>>();
    let witnesses = json!({
        "ii_instances": triples.examples.iter().map(|t| render(t)).collect::<Vec<_>>(),
        "ii_failures": triples.failures.iter().map(|t| render(t)).collect::<Vec<_>>(),
        "i_failures": i_failures.iter().take(LISTED).map(|t| render(t)).collect::<Vec<_>>(),
    });
    let report = json!({
        "staircase_size": n,
        "pairs": pairs,
        "i_failures": i_failures.len(),
        "triples": triples.checked,
        "ii_non_vacuous": triples.non_vacuous,
        "ii_failures": ii_failure_count,
        "max_walk_steps": max_steps,
        "ladder_profiles": profiles,
        "coherence": coherence,
    });
    let pass = i_failures.is_empty() && ii_failure_count == 0;
    Ok(Outcome {
        witnesses,
        report,
        verdict: settle(revalidated, if pass { Verdict::Pass } else { Verdict::Fail }),
        warnings,
    })
}

/// For sampled pairs `α < β`, the size of `{ξ < α : e_α(ξ) ≠ e_β(ξ)}` over
/// the sample and over the sample at doubled breadth.
fn coherence_metric(p: &Params, sample: &[Ordinal], ctx: &Context) -> Result<serde_json::Value, LabError> {
    let doubled: Vec<Ordinal> = staircase(&p.bound, p.depth, 2 * p.breadth).into_iter().collect();
    let n = sample.len();
    let all_pairs = n * n.saturating_sub(1) / 2;
    if all_pairs == 0 || p.coherence_pairs == 0 {
        return Ok(json!({ "pairs": 0 }));
    }
    let stride = (all_pairs / p.coherence_pairs).max(1);
    let mut pairs = Vec::new();
    let mut index = 0;
    'outer: for i in 0..n {
        for j in i + 1..n {
            if index % stride == stride / 2 {
                pairs.push((i, j));
                if pairs.len() == p.coherence_pairs {
                    break 'outer;
                }
            }
            index += 1;
        }
    }
    let disagreements = |alpha: &Ordinal, beta: &Ordinal, within: &[Ordinal]| -> Result<u64, LabError> {
        let mut count = 0;
        for xi in within.iter().take_while(|x| *x < alpha) {
            if walks::e_value(xi, alpha)? != walks::e_value(xi, beta)? {
                count += 1;
            }
        }
        Ok(count)
    };
    let rows = ctx.exec.map(&pairs, |&(i, j)| -> Result<(u64, u64), LabError> {
        Ok((
            disagreements(&sample[i], &sample[j], sample)?,
            disagreements(&sample[i], &sample[j], &doubled)?,
        ))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let max_base = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let max_doubled = rows.iter().map(|r| r.1).max().unwrap_or(0);
    Ok(json!({
        "pairs": rows.len(),
        "max_disagreements": max_base,
        "max_disagreements_doubled_breadth": max_doubled,
        "doubled_sample_size": doubled.len(),
    }))
}
