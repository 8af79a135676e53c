//! Straight-line re-derivation of walks, traces and `osc`.
//!
//! Ladder cuts are found by scanning `β[0], β[1], …` one at a time and no
//! value is cached. Slow, but it shares nothing with the fast path beyond the
//! ladder rule itself, which makes it the re-validation route for lab
//! witnesses and the oracle the fast path is tested against.

use super::{ladder_point_unchecked, WalkError, WALK_STEP_CAP};
use crate::ordinal::Ordinal;

/// One step of the walk: `(next, |C ∩ α|, max(C ∩ α))`.
fn scan_step(current: &Ordinal, alpha: &Ordinal) -> (Ordinal, u64, Option<Ordinal>) {
    if let Some(pred) = current.predecessor() {
        return (pred, 0, None);
    }
    let mut n = 0u64;
    let mut below = None;
    loop {
        let p = ladder_point_unchecked(current, n);
        if p >= *alpha {
            return (p, n, below);
        }
        below = Some(p);
        n += 1;
    }
}

fn steps(alpha: &Ordinal, beta: &Ordinal) -> Result<Vec<(u64, Option<Ordinal>)>, WalkError> {
    if alpha > beta {
        return Err(WalkError::AlphaAboveBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    let mut out = Vec::new();
    let mut current = beta.clone();
    while current != *alpha {
        if out.len() >= WALK_STEP_CAP {
            return Err(WalkError::StepCap(WALK_STEP_CAP));
        }
        let (next, below, max) = scan_step(&current, alpha);
        out.push((below, max));
        current = next;
    }
    Ok(out)
}

/// `L(α, β)` in increasing order.
pub fn lower_trace(alpha: &Ordinal, beta: &Ordinal) -> Result<Vec<Ordinal>, WalkError> {
    let mut running: Option<Ordinal> = None;
    let mut out = Vec::new();
    for (i, (_, max)) in steps(alpha, beta)?.into_iter().enumerate() {
        let value = match max {
            Some(m) => m,
            None if i == 0 && !alpha.is_zero() => Ordinal::zero(),
            None => continue,
        };
        let bigger = match &running {
            None => true,
            Some(r) => value > *r,
        };
        if bigger {
            running = Some(value.clone());
            out.push(value);
        }
    }
    Ok(out)
}

pub fn e_value(alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
    if alpha >= beta {
        return Err(WalkError::AlphaNotBelowBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    let mut best = 0;
    for (below, _) in steps(alpha, beta)? {
        best = best.max(below);
    }
    Ok(best)
}

pub fn osc(alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
    if alpha >= beta {
        return Err(WalkError::AlphaNotBelowBeta {
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    let trace = lower_trace(alpha, beta)?;
    let mut count = 0;
    for i in 1..trace.len() {
        let xi = &trace[i];
        let xi_minus = &trace[i - 1];
        let agree_below = e_value(xi_minus, alpha)? == e_value(xi_minus, beta)?;
        if agree_below && e_value(xi, alpha)? > e_value(xi, beta)? {
            count += 1;
        }
    }
    Ok(count)
}
