//! Numerical witness that small integer combinations of the generators stay
//! away from the integers.
//!
//! Generators are taken at 128 bits, where sums reduce mod 1 by plain
//! wrapping `u128` arithmetic. Each generator interval is one ulp wide, so a
//! combination with coefficients `n` is enclosed in `[r, r + Σ|n_i|]`.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sqrt_fraction;
use crate::exec::Exec;

const BITS: u32 = 128;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub generators: usize,
    pub bound: u32,
    pub checked: u64,
    pub violations: u64,
    /// Smallest certified distance to an integer, in units of `2^-128`.
    pub min_distance_ulps: u128,
    pub worst: Option<Vec<i64>>,
}

impl IndependenceReport {
    fn empty(generators: usize, bound: u32) -> Self {
        IndependenceReport {
            generators,
            bound,
            checked: 0,
            violations: 0,
            min_distance_ulps: u128::MAX,
            worst: None,
        }
    }

    fn absorb(&mut self, other: IndependenceReport) {
        self.checked += other.checked;
        self.violations += other.violations;
        if other.min_distance_ulps < self.min_distance_ulps {
            self.min_distance_ulps = other.min_distance_ulps;
            self.worst = other.worst;
        }
    }

    /// `min_distance_ulps · 2^-128` as a float.
    pub fn min_distance(&self) -> f64 {
        self.min_distance_ulps as f64 / 2f64.powi(BITS as i32)
    }
}

struct Checker {
    thetas: Vec<u128>,
    /// Least numerator `t` with `t·2^-128 > 10^-digits`.
    threshold: u128,
}

impl Checker {
    fn new(generators: usize, digits: u32) -> Checker {
        let thetas = super::first_primes(generators)
            .into_iter()
            .map(|p| sqrt_fraction(p, BITS).lo().to_u128().expect("fraction below one"))
            .collect();
        let scaled = (num_bigint::BigUint::from(1u32) << BITS) / num_bigint::BigUint::from(10u32).pow(digits);
        Checker {
            thetas,
            threshold: scaled.to_u128().expect("threshold fits") + 1,
        }
    }

    /// Certified lower bound on the distance to the nearest integer.
    fn distance(&self, n: &[i64]) -> u128 {
        let mut r: u128 = 0;
        let mut width: u128 = 0;
        for (&c, &t) in n.iter().zip(&self.thetas) {
            r = r.wrapping_add((c as i128 as u128).wrapping_mul(t));
            if c < 0 {
                // The lower end of c·[t, t+1] is c·(t+1).
                r = r.wrapping_add(c as i128 as u128);
            }
            width += c.unsigned_abs() as u128;
        }
        match r.checked_add(width) {
            Some(top) if r != 0 => r.min(top.wrapping_neg()),
            _ => 0,
        }
    }

    fn check(&self, n: &[i64], report: &mut IndependenceReport) {
        let d = self.distance(n);
        report.checked += 1;
        if d < self.threshold {
            report.violations += 1;
        }
        if d < report.min_distance_ulps {
            report.min_distance_ulps = d;
            report.worst = Some(n.to_vec());
        }
    }
}

/// Every nonzero `n` with `|n_i| ≤ bound` over the first `generators` generators.
pub fn independence_exhaustive(generators: usize, bound: u32, digits: u32, exec: Exec) -> IndependenceReport {
    let checker = Checker::new(generators, digits);
    let side = 2 * bound as u64 + 1;
    let total = side.pow(generators as u32);
    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK) as usize;
    let parts = exec.map_range(0..chunks, |c| {
        let mut report = IndependenceReport::empty(generators, bound);
        let mut n = vec![0i64; generators];
        let start = c as u64 * CHUNK;
        for index in start..(start + CHUNK).min(total) {
            let mut rest = index;
            for slot in n.iter_mut() {
                *slot = (rest % side) as i64 - bound as i64;
                rest /= side;
            }
            if n.iter().any(|&x| x != 0) {
                checker.check(&n, &mut report);
            }
        }
        report
    });
    let mut report = IndependenceReport::empty(generators, bound);
    for part in parts {
        report.absorb(part);
    }
    report
}

/// `samples` seeded random nonzero vectors with `|n_i| ≤ bound`.
pub fn independence_random(generators: usize, bound: u32, samples: u64, digits: u32, seed: u64) -> IndependenceReport {
    let checker = Checker::new(generators, digits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IndependenceReport::empty(generators, bound);
    let b = bound as i64;
    while report.checked < samples {
        let n: Vec<i64> = (0..generators).map(|_| rng.random_range(-b..=b)).collect();
        if n.iter().any(|&x| x != 0) {
            checker.check(&n, &mut report);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_exhaustive_sweep() {
        let seq = independence_exhaustive(3, 3, 30, Exec::Sequential);
        let par = independence_exhaustive(3, 3, 30, Exec::Parallel);
        assert_eq!(seq, par);
        assert_eq!(seq.checked, 7u64.pow(3) - 1);
        assert_eq!(seq.violations, 0);
    }

    #[test]
    fn distance_matches_float_estimate() {
        let checker = Checker::new(2, 30);
        // √2 − √3 + 0 ≈ −0.3178; distance to the nearest integer ≈ 0.3178.
        let d = checker.distance(&[1, -1]) as f64 / 2f64.powi(128);
        assert!((d - (3f64.sqrt() - 2f64.sqrt())).abs() < 1e-12);
        let d = checker.distance(&[-2, 0]) as f64 / 2f64.powi(128);
        let f = (2.0 * 2f64.sqrt()).fract();
        assert!((d - f.min(1.0 - f)).abs() < 1e-12);
    }

    #[test]
    fn an_integer_combination_is_flagged() {
        let mut checker = Checker::new(1, 30);
        checker.thetas[0] = 1u128 << 127;
        assert_eq!(checker.distance(&[2]), 0);
        let report = {
            let mut r = IndependenceReport::empty(1, 2);
            checker.check(&[2], &mut r);
            r
        };
        assert_eq!(report.violations, 1);
    }

    #[test]
    fn random_is_reproducible() {
        let a = independence_random(4, 20, 500, 30, 9);
        assert_eq!(a, independence_random(4, 20, 500, 30, 9));
        assert_eq!(a.violations, 0);
    }
}
