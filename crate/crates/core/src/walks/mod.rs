//! Walks on ordinals below ε₀ along the canonical ladder system.
//!
//! For a limit `β` with final normal-form power `ω^e` (so `β = head + ω^e`):
//!
//! * `e = δ + 1`: `β[n] = head + ω^δ·(n+1)`
//! * `e` limit:   `β[n] = head + ω^(e[n])`
//!
//! and successors carry the one-point ladder `C_{γ+1} = {γ}`. A walk from `β`
//! down to `α` repeatedly steps to `min(C_current \ α)`; the lower trace
//! `L(α, β)` is the set of running maxima of `max(C_current ∩ α)` along it,
//! where an empty first intersection contributes `0` whenever `α > 0`.
//! `e_β(α)` is the largest `|C_current ∩ α|` seen on the walk, and `osc`
//! counts the oscillation points of `e_α`, `e_β` along `L(α, β)`.

pub mod reference;

use dashmap::DashMap;
use serde::Serialize;

use crate::ordinal::{Ordinal, Term};

/// Walks longer than this are treated as a bug, never as data.
pub const WALK_STEP_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WalkError {
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("walk requires alpha <= beta, got {alpha} > {beta}")]
    AlphaAboveBeta { alpha: Ordinal, beta: Ordinal },
    #[error("requires alpha < beta, got {alpha} >= {beta}")]
    AlphaNotBelowBeta { alpha: Ordinal, beta: Ordinal },
    #[error("walk exceeded {0} steps")]
    StepCap(usize),
    #[error("ladder index search overflowed")]
    IndexOverflow,
}

/// `β[n]` for a limit `β`.
pub fn ladder_point(beta: &Ordinal, n: u64) -> Result<Ordinal, WalkError> {
    if !beta.is_limit() {
        return Err(WalkError::NotLimit(beta.clone()));
    }
    Ok(ladder_point_unchecked(beta, n))
}

pub(crate) fn ladder_point_unchecked(beta: &Ordinal, n: u64) -> Ordinal {
    let (head, e) = beta.split_last_power().expect("ladder of a nonzero ordinal");
    let tail = match e.predecessor() {
        Some(delta) => Ordinal::omega_pow_times(delta, n + 1),
        None => Ordinal::omega_pow(ladder_point_unchecked(e, n)),
    };
    // `tail` sits strictly below the last power of `head`, so this is a plain append.
    let mut terms: Vec<Term> = head.terms().to_vec();
    terms.extend(tail.terms().iter().cloned());
    Ordinal::from_terms_unchecked(terms)
}

/// Least `n` with `β[n] ≥ α` for a limit `β > α`, by doubling then bisection.
/// Returns the index together with `β[n]` and, when `n > 0`, `β[n-1]`.
fn ladder_cut(beta: &Ordinal, alpha: &Ordinal) -> Result<(u64, Ordinal, Option<Ordinal>), WalkError> {
    let first = ladder_point_unchecked(beta, 0);
    if first >= *alpha {
        return Ok((0, first, None));
    }
    let (mut lo, mut lo_point) = (0u64, first);
    let mut hi = 1u64;
    let mut hi_point = ladder_point_unchecked(beta, hi);
    while hi_point < *alpha {
        lo = hi;
        lo_point = hi_point;
        hi = hi.checked_mul(2).ok_or(WalkError::IndexOverflow)?;
        hi_point = ladder_point_unchecked(beta, hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let p = ladder_point_unchecked(beta, mid);
        if p < *alpha {
            lo = mid;
            lo_point = p;
        } else {
            hi = mid;
            hi_point = p;
        }
    }
    Ok((hi, hi_point, Some(lo_point)))
}

/// Ladder data recorded at one step of a walk toward `α`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepWeight {
    /// `|C_step ∩ α|`.
    pub ladder_below: u64,
    /// `max(C_step ∩ α)`, absent when the intersection is empty.
    pub ladder_max: Option<Ordinal>,
}

/// The descending sequence `β = β₀ > β₁ > … > β_k = α`.
///
/// `weights[i]` describes the step out of `steps[i]`; there is one fewer
/// weight than steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkTrace {
    pub steps: Vec<Ordinal>,
    pub weights: Vec<StepWeight>,
}

impl WalkTrace {
    pub fn alpha(&self) -> &Ordinal {
        self.steps.last().expect("a walk has at least one step")
    }

    pub fn beta(&self) -> &Ordinal {
        &self.steps[0]
    }
}

fn step(current: &Ordinal, alpha: &Ordinal) -> Result<(Ordinal, StepWeight), WalkError> {
    if current.is_limit() {
        let (n, next, max) = ladder_cut(current, alpha)?;
        Ok((
            next,
            StepWeight {
                ladder_below: n,
                ladder_max: max,
            },
        ))
    } else {
        let pred = current.predecessor().expect("a nonzero non-limit is a successor");
        Ok((
            pred,
            StepWeight {
                ladder_below: 0,
                ladder_max: None,
            },
        ))
    }
}

pub fn walk(alpha: &Ordinal, beta: &Ordinal) -> Result<WalkTrace, WalkError> {
    if alpha > beta {
        return Err(WalkError::AlphaAboveBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    let mut steps = vec![beta.clone()];
    let mut weights = Vec::new();
    let mut current = beta.clone();
    while current != *alpha {
        if weights.len() >= WALK_STEP_CAP {
            return Err(WalkError::StepCap(WALK_STEP_CAP));
        }
        let (next, weight) = step(&current, alpha)?;
        debug_assert!(next < current && next >= *alpha);
        weights.push(weight);
        steps.push(next.clone());
        current = next;
    }
    Ok(WalkTrace { steps, weights })
}

/// `L(α, β)`, stored in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct LowerTrace(Vec<Ordinal>);

impl LowerTrace {
    pub fn elements(&self) -> &[Ordinal] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn min(&self) -> Option<&Ordinal> {
        self.0.first()
    }

    pub fn max(&self) -> Option<&Ordinal> {
        self.0.last()
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        self.0.binary_search(x).is_ok()
    }

    /// Sorted union with another trace.
    pub fn union(&self, other: &LowerTrace) -> LowerTrace {
        let mut v: Vec<Ordinal> = self.0.iter().chain(other.0.iter()).cloned().collect();
        v.sort();
        v.dedup();
        LowerTrace(v)
    }
}

impl From<&WalkTrace> for LowerTrace {
    fn from(trace: &WalkTrace) -> Self {
        let alpha = trace.alpha();
        let mut out: Vec<Ordinal> = Vec::new();
        for (i, w) in trace.weights.iter().enumerate() {
            let candidate = match (&w.ladder_max, i) {
                (Some(m), _) => m.clone(),
                (None, 0) if !alpha.is_zero() => Ordinal::zero(),
                (None, _) => continue,
            };
            if out.last().is_none_or(|top| candidate > *top) {
                out.push(candidate);
            }
        }
        LowerTrace(out)
    }
}

pub fn lower_trace(alpha: &Ordinal, beta: &Ordinal) -> Result<LowerTrace, WalkError> {
    let weights = compressed_weights(alpha, beta)?;
    let mut out: Vec<Ordinal> = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let candidate = match (&w.ladder_max, i) {
            (Some(m), _) => m.clone(),
            (None, 0) if !alpha.is_zero() => Ordinal::zero(),
            (None, _) => continue,
        };
        if out.last().is_none_or(|top| candidate > *top) {
            out.push(candidate);
        }
    }
    Ok(LowerTrace(out))
}

/// The step weights of `walk(α, β)` with every maximal run of successor
/// steps merged into one weightless step. Such runs add nothing to `e` or to
/// `L`, and merging keeps a leading run in first position, so both can be
/// read off this shorter sequence.
fn compressed_weights(alpha: &Ordinal, beta: &Ordinal) -> Result<Vec<StepWeight>, WalkError> {
    if alpha > beta {
        return Err(WalkError::AlphaAboveBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    let mut weights = Vec::new();
    let mut current = beta.clone();
    while current != *alpha {
        if weights.len() >= WALK_STEP_CAP {
            return Err(WalkError::StepCap(WALK_STEP_CAP));
        }
        if current.is_limit() {
            let (next, weight) = step(&current, alpha)?;
            weights.push(weight);
            current = next;
        } else {
            let mut terms = current.terms().to_vec();
            terms.pop();
            let base = Ordinal::from_terms_unchecked(terms);
            weights.push(StepWeight {
                ladder_below: 0,
                ladder_max: None,
            });
            current = if *alpha >= base { alpha.clone() } else { base };
        }
    }
    Ok(weights)
}

fn require_below(alpha: &Ordinal, beta: &Ordinal) -> Result<(), WalkError> {
    if alpha >= beta {
        Err(WalkError::AlphaNotBelowBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        })
    } else {
        Ok(())
    }
}

/// `e_β(α)`, the heaviest ladder intersection on the walk from `β` to `α`.
pub fn e_value(alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
    require_below(alpha, beta)?;
    let weights = compressed_weights(alpha, beta)?;
    Ok(weights.iter().map(|w| w.ladder_below).max().unwrap_or(0))
}

/// The points of `L(α, β)` above its minimum where `e_α` and `e_β` oscillate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OscSet(Vec<Ordinal>);

impl OscSet {
    pub fn elements(&self) -> &[Ordinal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn osc_set(alpha: &Ordinal, beta: &Ordinal) -> Result<OscSet, WalkError> {
    osc_set_with(alpha, beta, &mut |x, y| e_value(x, y))
}

fn osc_set_with(
    alpha: &Ordinal,
    beta: &Ordinal,
    e: &mut dyn FnMut(&Ordinal, &Ordinal) -> Result<u64, WalkError>,
) -> Result<OscSet, WalkError> {
    require_below(alpha, beta)?;
    let trace = lower_trace(alpha, beta)?;
    let mut out = Vec::new();
    for pair in trace.elements().windows(2) {
        let (prev, xi) = (&pair[0], &pair[1]);
        if e(prev, alpha)? == e(prev, beta)? && e(xi, alpha)? > e(xi, beta)? {
            out.push(xi.clone());
        }
    }
    Ok(OscSet(out))
}

pub fn osc(alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
    Ok(osc_set(alpha, beta)?.len() as u64)
}

/// Memoized `osc`, shareable across threads. The `e` values behind each
/// oscillation count are memoized too, since lower-trace points recur across
/// many pairs with the same upper end.
///
/// Values are deterministic, so concurrent inserts of the same key are benign.
#[derive(Debug, Default)]
pub struct OscTable {
    memo: DashMap<(Ordinal, Ordinal), u64>,
    e_memo: DashMap<(Ordinal, Ordinal), u64>,
}

impl OscTable {
    pub fn new() -> Self {
        OscTable::default()
    }

    pub fn osc(&self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        let key = (alpha.clone(), beta.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = osc_set_with(alpha, beta, &mut |x, y| self.e_value(x, y))?.len() as u64;
        self.memo.insert(key, v);
        Ok(v)
    }

    pub fn e_value(&self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        let key = (alpha.clone(), beta.clone());
        if let Some(v) = self.e_memo.get(&key) {
            return Ok(*v);
        }
        let v = e_value(alpha, beta)?;
        self.e_memo.insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn os(items: &[&str]) -> Vec<Ordinal> {
        items.iter().map(|s| o(s)).collect()
    }

    #[test]
    fn ladder_examples() {
        assert_eq!(ladder_point(&o("w"), 2).unwrap(), o("3"));
        assert_eq!(ladder_point(&o("w^(2)"), 0).unwrap(), o("w"));
        assert_eq!(ladder_point(&o("w^(w)"), 3).unwrap(), o("w^(4)"));
        assert_eq!(ladder_point(&o("w^(2)*3+w*2"), 4).unwrap(), o("w^(2)*3+w+5"));
        assert_eq!(ladder_point(&o("w^(w+1)"), 1).unwrap(), o("w^(w)*2"));
        assert_eq!(ladder_point(&o("w^(w^(w))"), 1).unwrap(), o("w^(w^(2))"));
        assert!(matches!(ladder_point(&o("w+1"), 0), Err(WalkError::NotLimit(_))));
        assert!(matches!(ladder_point(&o("0"), 0), Err(WalkError::NotLimit(_))));
    }

    #[test]
    fn ladder_cut_matches_linear_scan() {
        let beta = o("w^(3)*2");
        for alpha in ["w^(3)", "w^(3)+1", "w^(3)+w^(2)*5", "w^(3)+w^(2)*5+3", "w^(3)+w^(2)*40"] {
            let alpha = o(alpha);
            let (n, next, _) = ladder_cut(&beta, &alpha).unwrap();
            let linear = (0..).find(|&k| ladder_point_unchecked(&beta, k) >= alpha).unwrap();
            assert_eq!(n, linear);
            assert_eq!(next, ladder_point_unchecked(&beta, n));
        }
    }

    #[test]
    fn walk_examples() {
        let b = o("w^(2)+3");
        let t = walk(&b, &b).unwrap();
        assert_eq!(t.steps, vec![b.clone()]);
        assert!(t.weights.is_empty());

        let t = walk(&o("3"), &o("w")).unwrap();
        assert_eq!(t.steps, os(&["w", "3"]));
        assert_eq!(t.weights[0].ladder_max, Some(o("2")));
        assert_eq!(t.weights[0].ladder_below, 2);

        let t = walk(&o("w+1"), &o("w^(2)")).unwrap();
        assert_eq!(t.steps, os(&["w^(2)", "w*2", "w+1"]));
        assert_eq!(t.weights[0].ladder_max, Some(o("w")));
        assert_eq!(t.weights[1].ladder_max, None);

        assert!(matches!(walk(&o("w"), &o("3")), Err(WalkError::AlphaAboveBeta { .. })));
    }

    #[test]
    fn lower_trace_examples() {
        assert!(lower_trace(&o("0"), &o("w^(2)+1")).unwrap().is_empty());
        assert!(lower_trace(&o("w*3"), &o("w*3")).unwrap().is_empty());
        assert_eq!(lower_trace(&o("3"), &o("w")).unwrap().elements(), os(&["2"]));
        // Empty first intersection reads as max ∅ = 0.
        assert_eq!(lower_trace(&o("3"), &o("4")).unwrap().elements(), os(&["0"]));
        assert_eq!(lower_trace(&o("w"), &o("w^(2)")).unwrap().elements(), os(&["0"]));
        assert_eq!(
            lower_trace(&o("w+3"), &o("w^(2)*2")).unwrap().elements(),
            os(&["0", "w", "w+2"])
        );
    }

    #[test]
    fn e_value_examples() {
        assert_eq!(e_value(&o("3"), &o("w")).unwrap(), 2);
        assert_eq!(e_value(&o("0"), &o("w^(3)")).unwrap(), 0);
        assert_eq!(e_value(&o("w"), &o("w^(2)")).unwrap(), 0);
        assert!(e_value(&o("w"), &o("w")).is_err());
    }

    #[test]
    fn osc_examples() {
        assert_eq!(osc(&o("3"), &o("w")).unwrap(), 0);
        assert_eq!(osc(&o("0"), &o("w*2")).unwrap(), 0);
        assert_eq!(osc(&o("w+3"), &o("w^(2)*2")).unwrap(), 0);
        assert!(osc(&o("0"), &o("0")).is_err());
    }

    #[test]
    fn memo_table_agrees() {
        let table = OscTable::new();
        let (a, b) = (o("w+3"), o("w^(2)*2"));
        assert_eq!(table.osc(&a, &b).unwrap(), osc(&a, &b).unwrap());
        assert_eq!(table.osc(&a, &b).unwrap(), osc(&a, &b).unwrap());
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn merged_successor_runs_match_the_full_walk() {
        let points = os(&[
            "0",
            "1",
            "7",
            "w",
            "w+40",
            "w*3+2",
            "w^(2)+w*2+300",
            "w^(2)*3+w+2000",
            "w^(3)+5",
        ]);
        for beta in &points {
            for alpha in points.iter().filter(|a| *a < beta) {
                let full = walk(alpha, beta).unwrap();
                let e_full = full.weights.iter().map(|w| w.ladder_below).max().unwrap_or(0);
                assert_eq!(
                    lower_trace(alpha, beta).unwrap(),
                    LowerTrace::from(&full),
                    "{alpha} {beta}"
                );
                assert_eq!(e_value(alpha, beta).unwrap(), e_full, "{alpha} {beta}");
            }
        }
    }
}
