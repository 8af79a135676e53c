//! Finite set families: Δ-systems and pairwise disjoint tuple families.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ordinal::Ordinal;

/// Families up to this size get the exact root search.
pub const EXACT_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("tuple {index} is not strictly increasing")]
    NotIncreasing { index: usize },
    #[error("tuple {index} has length {found}, expected {arity}")]
    ArityMismatch { index: usize, arity: usize, found: usize },
    #[error("window of {available} ordinals cannot hold {count} disjoint {arity}-tuples")]
    WindowTooSmall {
        available: usize,
        arity: usize,
        count: usize,
    },
    #[error("family is not pairwise disjoint")]
    NotDisjoint,
}

/// `max a < min b`.
pub fn tuple_lt(a: &[Ordinal], b: &[Ordinal]) -> bool {
    match (a.last(), b.first()) {
        (Some(x), Some(y)) => x < y,
        _ => true,
    }
}

/// Strictly increasing `k`-tuples of ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleFamily {
    arity: usize,
    tuples: Vec<Vec<Ordinal>>,
    pairwise_disjoint: bool,
}

impl TupleFamily {
    pub fn new(arity: usize, tuples: Vec<Vec<Ordinal>>) -> Result<TupleFamily, FamilyError> {
        for (index, t) in tuples.iter().enumerate() {
            if t.len() != arity {
                return Err(FamilyError::ArityMismatch {
                    index,
                    arity,
                    found: t.len(),
                });
            }
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FamilyError::NotIncreasing { index });
            }
        }
        let mut seen = BTreeSet::new();
        let pairwise_disjoint = tuples.iter().flatten().all(|x| seen.insert(x.clone()));
        Ok(TupleFamily {
            arity,
            tuples,
            pairwise_disjoint,
        })
    }

    pub fn empty(arity: usize) -> TupleFamily {
        TupleFamily {
            arity,
            tuples: Vec::new(),
            pairwise_disjoint: true,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<Ordinal>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_pairwise_disjoint(&self) -> bool {
        self.pairwise_disjoint
    }

    /// Every ordinal used by some tuple, in increasing order.
    pub fn support(&self) -> Vec<Ordinal> {
        let set: BTreeSet<&Ordinal> = self.tuples.iter().flatten().collect();
        set.into_iter().cloned().collect()
    }
}

impl Serialize for TupleFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.tuples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TupleFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tuples: Vec<Vec<Ordinal>> = Vec::deserialize(d)?;
        let arity = tuples.first().map_or(0, Vec::len);
        TupleFamily::new(arity, tuples).map_err(serde::de::Error::custom)
    }
}

/// A subfamily whose members pairwise intersect in exactly `root`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaSystem<T: Ord> {
    pub root: BTreeSet<T>,
    pub petals: Vec<BTreeSet<T>>,
}

impl<T: Ord + Clone> DeltaSystem<T> {
    /// Exhaustive pairwise check; petals must also be distinct.
    pub fn verify(&self) -> bool {
        for (i, s) in self.petals.iter().enumerate() {
            if !self.root.is_subset(s) {
                return false;
            }
            for t in &self.petals[i + 1..] {
                if s == t || s.intersection(t).cloned().collect::<BTreeSet<T>>() != self.root {
                    return false;
                }
            }
        }
        true
    }
}

/// Clique search in the compatibility graph restricted to `candidates`,
/// stopping as soon as a clique of size `target` is found.
struct CliqueSearch<'a> {
    compatible: &'a [u64],
    target: usize,
    best: Vec<usize>,
}

impl CliqueSearch<'_> {
    fn run(&mut self, current: &mut Vec<usize>, mut candidates: u64) -> bool {
        if current.len() > self.best.len() {
            self.best = current.clone();
            if self.best.len() >= self.target {
                return true;
            }
        }
        // Greedy colouring gives an upper bound on the clique still reachable.
        let (order, colours) = self.colour(candidates);
        for (v, c) in order.into_iter().zip(colours).rev() {
            if current.len() + c <= self.best.len() {
                return false;
            }
            current.push(v);
            if self.run(current, candidates & self.compatible[v]) {
                return true;
            }
            current.pop();
            candidates &= !(1u64 << v);
        }
        false
    }

    fn colour(&self, candidates: u64) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut uncoloured = candidates;
        let mut colour = 0;
        while uncoloured != 0 {
            colour += 1;
            let mut avail = uncoloured;
            while avail != 0 {
                let v = avail.trailing_zeros() as usize;
                avail &= !(1u64 << v);
                avail &= !self.compatible[v];
                uncoloured &= !(1u64 << v);
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }
}

fn candidate_roots<T: Ord + Clone>(members: &[BTreeSet<T>]) -> BTreeSet<BTreeSet<T>> {
    let mut roots = BTreeSet::new();
    for (i, s) in members.iter().enumerate() {
        for t in &members[i + 1..] {
            roots.insert(s.intersection(t).cloned().collect());
        }
    }
    roots
}

fn meets_in<T: Ord>(s: &BTreeSet<T>, t: &BTreeSet<T>, root: &BTreeSet<T>) -> bool {
    s.intersection(t).count() == root.len() && root.is_subset(s) && root.is_subset(t)
}

fn greedy_extend<T: Ord + Clone>(members: &[BTreeSet<T>], root: &BTreeSet<T>, chosen: &mut Vec<usize>) {
    for (i, s) in members.iter().enumerate() {
        if chosen.contains(&i) || !root.is_subset(s) {
            continue;
        }
        if chosen.iter().all(|&j| meets_in(s, &members[j], root)) {
            chosen.push(i);
        }
    }
}

/// A Δ-system with at least `min_petals` petals drawn from `family`.
/// Exact (every pairwise intersection is tried as the root, with a complete
/// clique search under it) for at most [`EXACT_LIMIT`] distinct members,
/// greedy beyond. Found systems are extended greedily and always verified.
pub fn extract_delta_system<T: Ord + Clone>(family: &[BTreeSet<T>], min_petals: usize) -> Option<DeltaSystem<T>> {
    let members: Vec<BTreeSet<T>> = family.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if min_petals == 0 {
        return Some(DeltaSystem {
            root: BTreeSet::new(),
            petals: Vec::new(),
        });
    }
    if members.len() < min_petals {
        return None;
    }
    if min_petals == 1 && members.len() == 1 {
        return Some(DeltaSystem {
            root: members[0].clone(),
            petals: members,
        });
    }
    let exact = members.len() <= EXACT_LIMIT;
    for root in candidate_roots(&members) {
        let mut chosen = if exact {
            let holders: Vec<usize> = (0..members.len()).filter(|&i| root.is_subset(&members[i])).collect();
            if holders.len() < min_petals.max(2) {
                continue;
            }
            let mut compatible = vec![0u64; members.len()];
            for (a, &i) in holders.iter().enumerate() {
                for &j in &holders[a + 1..] {
                    if meets_in(&members[i], &members[j], &root) {
                        compatible[i] |= 1 << j;
                        compatible[j] |= 1 << i;
                    }
                }
            }
            let all = holders.iter().fold(0u64, |m, &i| m | 1 << i);
            let mut search = CliqueSearch {
                compatible: &compatible,
                target: min_petals,
                best: Vec::new(),
            };
            search.run(&mut Vec::new(), all);
            search.best
        } else {
            Vec::new()
        };
        if !exact || chosen.len() >= min_petals {
            greedy_extend(&members, &root, &mut chosen);
        }
        if chosen.len() >= min_petals {
            chosen.sort_unstable();
            let system = DeltaSystem {
                root,
                petals: chosen.into_iter().map(|i| members[i].clone()).collect(),
            };
            assert!(system.verify(), "extracted Δ-system failed verification");
            return Some(system);
        }
    }
    None
}

/// `count` pairwise disjoint increasing `arity`-tuples from `window`, drawn
/// by a seeded shuffle.
pub fn sample_disjoint_family(
    window: &[Ordinal],
    arity: usize,
    count: usize,
    seed: u64,
) -> Result<TupleFamily, FamilyError> {
    let mut pool: Vec<Ordinal> = window.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if pool.len() < arity * count {
        return Err(FamilyError::WindowTooSmall {
            available: pool.len(),
            arity,
            count,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let tuples = pool
        .chunks(arity.max(1))
        .take(count)
        .map(|c| {
            let mut t = c.to_vec();
            t.sort();
            if arity == 0 {
                t.clear();
            }
            t
        })
        .collect();
    TupleFamily::new(arity, tuples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(v: &[&[u32]]) -> Vec<BTreeSet<u32>> {
        v.iter().map(|s| s.iter().copied().collect()).collect()
    }

    #[test]
    fn disjoint_family_has_empty_root() {
        let f = sets(&[&[1, 2], &[3, 4], &[5], &[6, 7, 8]]);
        let d = extract_delta_system(&f, 4).unwrap();
        assert!(d.root.is_empty());
        assert_eq!(d.petals.len(), 4);
    }

    #[test]
    fn common_element_root() {
        let f = sets(&[&[1, 2], &[1, 3], &[1, 4]]);
        let d = extract_delta_system(&f, 3).unwrap();
        assert_eq!(d.root, [1].into_iter().collect());
        assert!(d.verify());
    }

    #[test]
    fn impossible_request() {
        let f = sets(&[&[1, 2], &[2, 3], &[3, 1]]);
        assert!(extract_delta_system(&f, 3).is_none());
        assert_eq!(extract_delta_system(&f, 2).unwrap().petals.len(), 2);
    }

    #[test]
    fn verify_rejects_bad_systems() {
        let bad = DeltaSystem {
            root: BTreeSet::from([1u32]),
            petals: sets(&[&[1, 2], &[1, 2, 3]]),
        };
        assert!(!bad.verify());
    }

    #[test]
    fn greedy_path_on_large_family() {
        let mut f: Vec<BTreeSet<u32>> = (0..100).map(|i| BTreeSet::from([0, 1000 + i])).collect();
        f.push(BTreeSet::from([5, 6]));
        let d = extract_delta_system(&f, 50).unwrap();
        assert_eq!(d.root, BTreeSet::from([0]));
        assert_eq!(d.petals.len(), 100);
    }

    #[test]
    fn sampling() {
        let w: Vec<Ordinal> = (0..3u64).map(Ordinal::from).collect();
        let f = sample_disjoint_family(&w, 1, 3, 7).unwrap();
        let mut flat: Vec<_> = f.tuples().iter().flatten().cloned().collect();
        flat.sort();
        assert_eq!(flat, w);
        let w4: Vec<Ordinal> = (0..4u64).map(Ordinal::from).collect();
        let pairs = sample_disjoint_family(&w4, 2, 2, 1).unwrap();
        assert!(pairs.is_pairwise_disjoint() && pairs.len() == 2);
        assert_eq!(pairs, sample_disjoint_family(&w4, 2, 2, 1).unwrap());
        assert!(matches!(
            sample_disjoint_family(&w4, 3, 2, 1),
            Err(FamilyError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn family_serializes_as_literals() {
        let f = TupleFamily::new(2, vec![vec![Ordinal::from(1), Ordinal::omega()]]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"[["1","w"]]"#);
        let back: TupleFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(TupleFamily::new(2, vec![vec![Ordinal::omega(), Ordinal::from(1)]]).is_err());
    }
}
