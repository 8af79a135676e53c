use std::collections::BTreeSet;

use super::Ordinal;
use crate::walks::ladder_point_unchecked;

/// A deterministic finite sample of ordinals below `bound`.
///
/// Contains the finite ordinals below `min(bound, breadth)` and, starting from
/// `bound` itself (when it is a limit), the first `breadth` ladder points of
/// every included limit, refined `depth` times. Finite ladder points are left
/// to the initial segment, so the finite part is exactly `0..min(bound, breadth)`.
pub fn staircase(bound: &Ordinal, depth: usize, breadth: usize) -> BTreeSet<Ordinal> {
    let mut out = BTreeSet::new();
    let finite_cap = bound.as_u64().map_or(breadth as u64, |b| b.min(breadth as u64));
    for i in 0..finite_cap {
        out.insert(Ordinal::finite(i));
    }
    if breadth == 0 || depth == 0 || !bound.is_limit() {
        return out;
    }
    let mut frontier = vec![bound.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for limit in &frontier {
            for n in 0..breadth {
                let p = ladder_point_unchecked(limit, n as u64);
                if p.is_finite() {
                    continue;
                }
                if out.insert(p.clone()) && p.is_limit() {
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}
