//! Fixed-point enclosures used by the circle metric: π, sin on `[0, 2]`, and
//! the arc threshold matching a chordal radius.
//!
//! Every routine works at `scale + GUARD` bits, tracks a bound on the
//! accumulated truncation error in ulps, and rounds outward on the way back.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};

pub(crate) const GUARD: u32 = 32;

/// `[lo, hi] · 2^-scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Fx {
    pub lo: BigInt,
    pub hi: BigInt,
    pub scale: u32,
}

fn shr_floor(x: &BigInt, bits: u32) -> BigInt {
    x.div_floor(&(BigInt::one() << bits))
}

fn shr_ceil(x: &BigInt, bits: u32) -> BigInt {
    -shr_floor(&-x, bits)
}

impl Fx {
    /// Encloses `approx ± err` (at `from` bits) at the coarser `to` bits.
    fn from_approx(approx: &BigInt, err: u64, from: u32, to: u32) -> Fx {
        let err = BigInt::from(err);
        Fx {
            lo: shr_floor(&(approx - &err), from - to),
            hi: shr_ceil(&(approx + &err), from - to),
            scale: to,
        }
    }
}

/// `atan(1/k)·2^q` by its alternating series, with an error bound in ulps.
fn atan_inv(k: u32, q: u32) -> (BigInt, u64) {
    let k2 = BigInt::from(k) * BigInt::from(k);
    // power = floor(2^q / k^(2j+1)); floor(floor(x)/m) = floor(x/m) keeps it exact.
    let mut power = (BigInt::one() << q) / BigInt::from(k);
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * j + 1);
        if j.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &k2;
        j += 1;
    }
    // One ulp per term from the division plus the (sub-ulp) tail.
    (sum, j + 1)
}

/// π enclosed at `scale` bits (Machin's formula).
pub(crate) fn pi(scale: u32) -> Fx {
    let q = scale + GUARD;
    let (a5, e5) = atan_inv(5, q);
    let (a239, e239) = atan_inv(239, q);
    let approx = a5 * 16 - a239 * 4;
    Fx::from_approx(&approx, 16 * e5 + 4 * e239, q, scale)
}

/// `sin(x)` for `x = x_num · 2^-x_scale` in `[0, 2]`, enclosed at `out_scale` bits.
pub(crate) fn sin_point(x_num: &BigInt, x_scale: u32, out_scale: u32) -> Fx {
    debug_assert!(!x_num.is_negative());
    let q = (out_scale + GUARD).max(x_scale);
    let x = x_num << (q - x_scale);
    let x2 = &x * &x;
    let mut term = x.clone();
    let mut sum = x;
    let mut k: u64 = 1;
    while !term.is_zero() {
        term = ((&term * &x2) >> (2 * q)) / BigInt::from((2 * k) * (2 * k + 1));
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    // Each computed term is within 6 ulps of the true one (the ratio x²/((2k)(2k+1))
    // is below 1 on [0, 2]), and the alternating tail is below the last term.
    let err = 6 * k + 12;
    let mut out = Fx::from_approx(&sum, err, q, out_scale);
    if out.lo.is_negative() {
        out.lo = BigInt::zero();
    }
    out
}

/// `2·sin(π·d)` for `d` in `[lo, hi]·2^-scale ⊂ [0, 1/2]`, at `scale + GUARD` bits.
pub(crate) fn chord_of_arc(d_lo: &BigInt, d_hi: &BigInt, scale: u32, pi: &Fx) -> Fx {
    let out_scale = pi.scale;
    let arg_lo = shr_floor(&(&pi.lo * d_lo), scale);
    let arg_hi = shr_ceil(&(&pi.hi * d_hi), scale);
    let lower = sin_point(&arg_lo, out_scale, out_scale).lo;
    let upper = if &arg_hi * 2 <= pi.lo {
        sin_point(&arg_hi, out_scale, out_scale).hi
    } else {
        BigInt::one() << out_scale
    };
    Fx {
        lo: lower * 2,
        hi: upper * 2,
        scale: out_scale,
    }
}

/// Exact comparison of `num · 2^-scale` with a finite non-negative `f64`.
pub(crate) fn cmp_with_f64(num: &BigInt, scale: u32, value: f64) -> Ordering {
    let (mantissa, exponent, sign) = Float::integer_decode(value);
    debug_assert!(sign > 0 || mantissa == 0);
    let m = BigInt::from(mantissa);
    let shift = exponent as i64 + scale as i64;
    if shift >= 0 {
        num.cmp(&(m << shift as u32))
    } else {
        (num << (-shift) as u32).cmp(&m)
    }
}

/// Arc-length threshold for a chordal radius: a point at circular distance
/// `d ∈ [0, 1/2]` (in turns) lies within chordal distance `ε` iff `d < τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum ArcThreshold {
    /// `ε > 2`: the ball is the whole circle.
    Everything,
    /// `τ ∈ [lo, hi]·2^-scale`, with `chord(lo) < ε ≤ chord(hi)`.
    Bracket { lo: BigInt, hi: BigInt, scale: u32 },
}

impl ArcThreshold {
    /// `Some(true)` if every `d ≤ d_hi` is certainly inside, `Some(false)` if
    /// every `d ≥ d_lo` is certainly outside, `None` if undecided.
    pub(crate) fn classify(&self, d_lo: &BigInt, d_hi: &BigInt) -> Option<bool> {
        match self {
            ArcThreshold::Everything => Some(true),
            ArcThreshold::Bracket { lo, hi, .. } => {
                if d_hi < lo {
                    Some(true)
                } else if d_lo >= hi {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub(crate) enum ThresholdError {
    #[error("epsilon must be a positive finite number")]
    InvalidEpsilon,
    #[error("could not separate the threshold from epsilon")]
    Indeterminate,
}

pub(crate) fn arc_threshold(epsilon: f64, scale: u32) -> Result<ArcThreshold, ThresholdError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ThresholdError::InvalidEpsilon);
    }
    if epsilon > 2.0 {
        return Ok(ArcThreshold::Everything);
    }
    let half = BigInt::one() << (scale - 1);
    if epsilon == 2.0 {
        return Ok(ArcThreshold::Bracket {
            lo: half.clone(),
            hi: half,
            scale,
        });
    }
    let mut lo = BigInt::zero();
    let mut hi = half;
    let mut guard = 0;
    let mut pi_enc = pi(scale + GUARD);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        let chord = chord_of_arc(&mid, &mid, scale, &pi_enc);
        if cmp_with_f64(&chord.hi, chord.scale, epsilon) == Ordering::Less {
            lo = mid;
        } else if cmp_with_f64(&chord.lo, chord.scale, epsilon) != Ordering::Less {
            hi = mid;
        } else {
            guard += GUARD;
            if guard > 8 * GUARD {
                return Err(ThresholdError::Indeterminate);
            }
            pi_enc = pi(scale + GUARD + guard);
        }
    }
    Ok(ArcThreshold::Bracket { lo, hi, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_f64(x: &BigInt, scale: u32) -> f64 {
        let digits = x.to_string();
        digits.parse::<f64>().unwrap() / 2f64.powi(scale as i32)
    }

    #[test]
    fn pi_encloses_reference_digits() {
        let p = pi(200);
        // floor(π · 2^64) = 57952155664616982739.
        let reference = BigInt::parse_bytes(b"57952155664616982739", 10).unwrap();
        assert!(shr_floor(&p.lo, 136) <= reference);
        assert!(shr_floor(&p.hi, 136) >= reference);
        assert!(&p.hi - &p.lo < BigInt::from(64));
    }

    #[test]
    fn sin_matches_f64() {
        for &x in &[0.0, 0.1, 0.5, 1.0, 1.57, 2.0] {
            let num = BigInt::from((x * 2f64.powi(40)) as i64);
            let s = sin_point(&num, 40, 80);
            let expect = (to_f64(&num, 40)).sin();
            assert!(to_f64(&s.lo, 80) <= expect + 1e-15, "{x}");
            assert!(to_f64(&s.hi, 80) >= expect - 1e-15, "{x}");
            assert!(&s.hi - &s.lo < BigInt::from(1u64 << 16));
        }
    }

    #[test]
    fn threshold_matches_asin() {
        for &eps in &[0.05, 0.5, 0.8, 1.0, 1.99] {
            let t = arc_threshold(eps, 96).unwrap();
            let ArcThreshold::Bracket { lo, hi, scale } = t else {
                panic!()
            };
            let tau = (eps / 2.0).asin() / std::f64::consts::PI;
            assert!((to_f64(&lo, scale) - tau).abs() < 1e-14);
            assert_eq!(&hi - &lo, BigInt::one());
        }
        assert_eq!(arc_threshold(2.1, 64).unwrap(), ArcThreshold::Everything);
        assert!(arc_threshold(0.0, 64).is_err());
        assert!(arc_threshold(f64::NAN, 64).is_err());
    }

    #[test]
    fn exact_f64_comparison() {
        assert_eq!(cmp_with_f64(&BigInt::from(1), 1, 0.5), Ordering::Equal);
        assert_eq!(cmp_with_f64(&BigInt::from(3), 2, 0.5), Ordering::Greater);
        assert_eq!(cmp_with_f64(&BigInt::from(1), 0, 0.75), Ordering::Greater);
        assert_eq!(cmp_with_f64(&BigInt::from(0), 10, 1e-300), Ordering::Less);
    }
}
