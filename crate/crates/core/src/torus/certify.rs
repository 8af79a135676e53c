//! A second, deliberately different evaluation route for circle distances.
//!
//! Orbit points are built by double-and-add over exact rationals, π comes from
//! Euler's arctangent identity, and the chord is bounded through the cosine
//! Taylor series. Nothing here touches the fixed-point routines the searches
//! use, so a result that passes both routes is unlikely to share a bug.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Angle;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn angle_bounds(a: &Angle) -> (BigRational, BigRational) {
    let denom = BigInt::one() << a.precision();
    (
        BigRational::new(a.lo().clone(), denom.clone()),
        BigRational::new(a.hi().clone(), denom),
    )
}

/// Rounds `x` to a multiple of `2^-bits`, down or up.
fn to_dyadic(x: &BigRational, bits: u32, up: bool) -> BigRational {
    let denom = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(denom.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() };
    BigRational::new(n.to_integer(), denom)
}

/// `atan(1/k)` bracketed by consecutive partial sums of its series.
fn atan_inv_bounds(k: i64, bits: u32) -> (BigRational, BigRational) {
    let x = BigRational::new(BigInt::one(), BigInt::from(k));
    let x2 = &x * &x;
    let eps = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let mut power = x.clone();
    let mut sum = BigRational::zero();
    let mut j: i64 = 0;
    loop {
        let term = &power / rat(2 * j + 1);
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        let next = &power * &x2 / rat(2 * j + 3);
        if next < eps {
            // Terms decrease, so the next partial sum lands on the other side.
            let other = if j % 2 == 0 { &sum - &next } else { &sum + &next };
            return if j % 2 == 0 { (other, sum) } else { (sum, other) };
        }
        power *= &x2;
        j += 1;
    }
}

/// Dyadic bounds `π_lo < π < π_hi` from `π = 4·(atan(1/2) + atan(1/3))`.
pub fn pi_bounds(bits: u32) -> (BigRational, BigRational) {
    let (a_lo, a_hi) = atan_inv_bounds(2, bits + 8);
    let (b_lo, b_hi) = atan_inv_bounds(3, bits + 8);
    let four = rat(4);
    let lo = &four * (a_lo + b_lo);
    let hi = four * (a_hi + b_hi);
    (to_dyadic(&lo, bits, false), to_dyadic(&hi, bits, true))
}

/// A lower bound on `cos t`: partial sums of the series that stop after a
/// negative term never exceed the cosine, for any real `t`.
fn cos_lower(t: &BigRational, bits: u32) -> BigRational {
    let t2 = t * t;
    let eps = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut j: i64 = 1;
    loop {
        term = term * &t2 / rat((2 * j - 1) * (2 * j));
        if j % 2 == 1 {
            sum -= &term;
            if term < eps {
                return sum;
            }
        } else {
            sum += &term;
        }
        j += 1;
    }
}

/// Bounds on `u + m·z − v` in turns, without reduction mod 1.
pub fn orbit_point(u: &Angle, z: &Angle, m: u64, v: &Angle) -> (BigRational, BigRational) {
    let (z_lo, z_hi) = angle_bounds(z);
    let mut acc_lo = BigRational::zero();
    let mut acc_hi = BigRational::zero();
    let mut step_lo = z_lo;
    let mut step_hi = z_hi;
    let mut k = m;
    while k > 0 {
        if k & 1 == 1 {
            acc_lo += &step_lo;
            acc_hi += &step_hi;
        }
        step_lo = &step_lo + &step_lo;
        step_hi = &step_hi + &step_hi;
        k >>= 1;
    }
    let (u_lo, u_hi) = angle_bounds(u);
    let (v_lo, v_hi) = angle_bounds(v);
    (acc_lo + u_lo - v_hi, acc_hi + u_hi - v_lo)
}

/// Largest circular distance from an integer over `[lo, hi]`, in `[0, 1/2]`.
pub fn max_circular_distance(lo: &BigRational, hi: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let shift = lo.floor();
    let a = lo - &shift;
    let b = hi - &shift;
    let three_halves = BigRational::new(BigInt::from(3), BigInt::from(2));
    if &b - &a >= BigRational::one() || (a <= half && b >= half) || b >= three_halves {
        return half;
    }
    let tri = |x: &BigRational| {
        let f = x - x.floor();
        let g = BigRational::one() - &f;
        if f < g {
            f
        } else {
            g
        }
    };
    let (ta, tb) = (tri(&a), tri(&b));
    if ta > tb {
        ta
    } else {
        tb
    }
}

/// Certifies `2·sin(π·d) < ε` for `d ∈ [0, 1/2]`; `false` means "not shown".
pub fn chord_below(d: &BigRational, epsilon: f64, bits: u32) -> bool {
    let Some(eps) = BigRational::from_float(epsilon) else {
        return false;
    };
    if eps > rat(2) {
        return true;
    }
    if !eps.is_positive() {
        return false;
    }
    let (pi_lo, pi_hi) = pi_bounds(bits);
    let t = to_dyadic(&(rat(2) * &pi_hi * d), bits, true);
    // chord² = 2 − 2·cos(2πd), increasing while 2πd stays within [0, π].
    if t > pi_lo {
        return false;
    }
    let chord_sq = rat(2) - rat(2) * cos_lower(&t, bits);
    chord_sq < &eps * &eps
}

/// Independent check that `|u_i·z_i^m − v_i| < ε` on every coordinate.
pub fn certify_within(u: &[Angle], v: &[Angle], z: &[Angle], m: u64, epsilon: f64) -> bool {
    if u.len() != v.len() || u.len() != z.len() {
        return false;
    }
    u.iter().zip(v).zip(z).all(|((u, v), z)| {
        let bits = 2 * z.precision().max(u.precision()).max(v.precision()) + 64;
        let (lo, hi) = orbit_point(u, z, m, v);
        chord_below(&max_circular_distance(&lo, &hi), epsilon, bits)
    })
}

/// Index of the grid cell (of width `2^-grid_bits`) that certainly holds
/// `m·z`, or `None` if the enclosure touches a cell boundary.
pub fn grid_cell(z: &Angle, m: u64, grid_bits: u32) -> Option<u64> {
    let zero = Angle::identity(z.precision());
    let (lo, hi) = orbit_point(&zero, z, m, &zero);
    let g = BigRational::from_integer(BigInt::one() << grid_bits);
    let shift = lo.floor();
    let a = (lo - &shift) * &g;
    let b = (hi - &shift) * &g;
    let cell = a.floor();
    if b.floor() != cell {
        return None;
    }
    let (_, cell) = cell.to_integer().div_mod_floor(&(BigInt::one() << grid_bits));
    u64::try_from(cell).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_bracket() {
        let (lo, hi) = pi_bounds(80);
        let reference = BigRational::new(
            BigInt::parse_bytes(b"57952155664616982739", 10).unwrap(),
            BigInt::one() << 64u32,
        );
        let ulp = BigRational::new(BigInt::one(), BigInt::one() << 64u32);
        assert!(lo <= &reference + &ulp && reference <= hi);
        assert!(&hi - &lo < BigRational::new(BigInt::one(), BigInt::one() << 70u32));
    }

    #[test]
    fn cosine_lower_bound() {
        for &(t, c) in &[(0.0f64, 1.0f64), (1.0, 1f64.cos()), (3.0, 3f64.cos())] {
            let lb = cos_lower(&BigRational::from_float(t).unwrap(), 80);
            let lb: f64 = num_traits::ToPrimitive::to_f64(&lb).unwrap();
            assert!(lb <= c + 1e-15 && lb >= c - 1e-12);
        }
    }

    #[test]
    fn chord_threshold() {
        let d = |x: f64| BigRational::from_float(x).unwrap();
        // chord(0.1) = 2·sin(0.1π) ≈ 0.618.
        assert!(chord_below(&d(0.1), 0.62, 128));
        assert!(!chord_below(&d(0.1), 0.61, 128));
        assert!(chord_below(&d(0.5), 2.1, 128));
        assert!(!chord_below(&d(0.5), 2.0, 128));
    }

    #[test]
    fn circular_distance() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(max_circular_distance(&r(1, 10), &r(2, 10)), r(2, 10));
        assert_eq!(max_circular_distance(&r(9, 10), &r(11, 10)), r(1, 10));
        assert_eq!(max_circular_distance(&r(-3, 10), &r(-2, 10)), r(3, 10));
        assert_eq!(max_circular_distance(&r(4, 10), &r(6, 10)), r(1, 2));
    }

    #[test]
    fn double_and_add_matches_multiplication() {
        let z = super::super::sqrt_fraction(2, 64);
        let zero = Angle::identity(64);
        for m in [0u64, 1, 7, 1000, 123_456] {
            let (lo, hi) = orbit_point(&zero, &z, m, &zero);
            let direct = z.mul_i64(m as i64);
            let denom = BigInt::one() << 64u32;
            let k = lo.floor();
            let lo_red = &lo - &k;
            let hi_red = &hi - &k;
            assert_eq!(lo_red, BigRational::new(direct.lo().clone(), denom.clone()));
            assert_eq!(hi_red, BigRational::new(direct.hi().clone(), denom));
        }
    }
}
