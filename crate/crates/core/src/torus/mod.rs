//! The circle group as turns `θ ∈ [0, 1)` (the point `e^{2πiθ}`), held as
//! dyadic intervals, together with the generator points `z_α`, the points
//! `w_β`, the bounded-exponent subgroup, and Kronecker approximation.

pub mod certify;
pub(crate) mod fixed;
mod independence;
mod kronecker;

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::ordinal::Ordinal;
use crate::walks::{OscTable, WalkError};

pub use independence::{independence_exhaustive, independence_random, IndependenceReport};
pub use kronecker::{kronecker_bound, kronecker_m, kronecker_m_escalating, CoveringCertificate, KroneckerBound};

pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TorusError {
    #[error("{0} is not a registered window coordinate")]
    NotInWindow(Ordinal),
    #[error("point vectors live on different windows")]
    WindowMismatch,
    #[error("angles carry different precisions ({0} vs {1} bits)")]
    PrecisionMismatch(u32, u32),
    #[error("inputs have mismatched lengths")]
    LengthMismatch,
    #[error("exponent {exponent} exceeds the declared bound {bound}")]
    ExponentExceedsBound { exponent: i64, bound: u64 },
    #[error("epsilon must be a positive finite number")]
    InvalidEpsilon,
    #[error("interval comparison undecided at {precision} bits; retry at higher precision")]
    Indeterminate { precision: u32 },
    #[error("search cap {cap} reached ({detail})")]
    CapExceeded { cap: u64, detail: String },
    #[error("m = {m} failed independent re-verification")]
    CertificationFailed { m: u64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// A point of the circle as an interval of turns, `[lo, hi]·2^-precision`,
/// with `0 ≤ lo < 2^precision` and `lo ≤ hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    lo: BigInt,
    hi: BigInt,
    precision: u32,
}

impl Angle {
    fn normalized(mut lo: BigInt, mut hi: BigInt, precision: u32) -> Angle {
        debug_assert!(lo <= hi);
        let modulus = BigInt::one() << precision;
        let k = lo.div_floor(&modulus);
        if !k.is_zero() {
            let shift = k * &modulus;
            lo -= &shift;
            hi -= &shift;
        }
        Angle { lo, hi, precision }
    }

    /// The group identity, stored exactly.
    pub fn identity(precision: u32) -> Angle {
        Angle {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            precision,
        }
    }

    /// The tightest enclosure of `turns` (any finite real) at `precision` bits.
    pub fn from_turns(turns: f64, precision: u32) -> Angle {
        assert!(turns.is_finite(), "angle must be finite");
        let (mantissa, exponent, sign) = Float::integer_decode(turns);
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        let shift = exponent as i64 + precision as i64;
        let (lo, hi) = if shift >= 0 {
            let v = m << shift as u32;
            (v.clone(), v)
        } else {
            let d = BigInt::one() << (-shift) as u32;
            let (q, r) = m.div_mod_floor(&d);
            if r.is_zero() {
                (q.clone(), q)
            } else {
                (q.clone(), q + 1)
            }
        };
        Angle::normalized(lo, hi, precision)
    }

    /// Builds `[lo, hi]·2^-precision` from raw numerators (reduced mod 1).
    pub fn from_bounds(lo: BigInt, hi: BigInt, precision: u32) -> Angle {
        assert!(lo <= hi, "interval bounds out of order");
        Angle::normalized(lo, hi, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi(&self) -> &BigInt {
        &self.hi
    }

    /// Interval width as a numerator at this precision.
    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_identity(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    fn check(&self, other: &Angle) -> Result<(), TorusError> {
        if self.precision != other.precision {
            return Err(TorusError::PrecisionMismatch(self.precision, other.precision));
        }
        Ok(())
    }

    pub fn add(&self, other: &Angle) -> Result<Angle, TorusError> {
        self.check(other)?;
        Ok(Angle::normalized(
            &self.lo + &other.lo,
            &self.hi + &other.hi,
            self.precision,
        ))
    }

    pub fn neg(&self) -> Angle {
        Angle::normalized(-&self.hi, -&self.lo, self.precision)
    }

    pub fn sub(&self, other: &Angle) -> Result<Angle, TorusError> {
        self.add(&other.neg())
    }

    /// `n·θ`, i.e. the `n`-th power of the circle point.
    pub fn mul_int(&self, n: &BigInt) -> Angle {
        if n.is_negative() {
            Angle::normalized(n * &self.hi, n * &self.lo, self.precision)
        } else {
            Angle::normalized(n * &self.lo, n * &self.hi, self.precision)
        }
    }

    pub fn mul_i64(&self, n: i64) -> Angle {
        self.mul_int(&BigInt::from(n))
    }

    /// Re-expresses the interval at `precision` bits, rounding outward when coarsening.
    pub fn with_precision(&self, precision: u32) -> Angle {
        if precision >= self.precision {
            let s = precision - self.precision;
            Angle::normalized(&self.lo << s, &self.hi << s, precision)
        } else {
            let d = BigInt::one() << (self.precision - precision);
            let lo = self.lo.div_floor(&d);
            let hi = -((-&self.hi).div_floor(&d));
            Angle::normalized(lo, hi, precision)
        }
    }

    /// Whether `inner` (at this or a finer precision) lies inside `self` modulo 1.
    pub fn contains_mod1(&self, inner: &Angle) -> bool {
        if inner.precision < self.precision {
            return false;
        }
        let s = inner.precision - self.precision;
        let (lo, hi) = (&self.lo << s, &self.hi << s);
        let modulus = BigInt::one() << inner.precision;
        [-1i32, 0, 1].iter().any(|&k| {
            let shift = BigInt::from(k) * &modulus;
            lo <= &inner.lo + &shift && &inner.hi + &shift <= hi
        })
    }

    /// Midpoint as an `f64` number of turns in `[0, 1)`.
    pub fn midpoint_f64(&self) -> f64 {
        let mid = self.with_precision(60);
        let v = ((mid.lo + mid.hi) >> 1u32).to_f64().unwrap_or(0.0) / 2f64.powi(60);
        v.rem_euclid(1.0)
    }

    /// Midpoint rounded to `digits` decimal places, reduced into `[0, 1)`.
    pub fn midpoint_decimal(&self, digits: usize) -> String {
        let ten_pow = BigInt::from(10u32).pow(digits as u32);
        // round((lo + hi)/2 · 10^d / 2^p) = floor(((lo + hi)·10^d + 2^p) / 2^(p+1))
        let num = (&self.lo + &self.hi) * &ten_pow + (BigInt::one() << self.precision);
        let scaled = num.div_floor(&(BigInt::one() << (self.precision + 1)));
        let scaled = scaled.mod_floor(&ten_pow);
        if digits == 0 {
            return "0".to_string();
        }
        format!("0.{:0>width$}", scaled.to_string(), width = digits)
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| !candidate.is_multiple_of(p))
        {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// `frac(√prime)` enclosed in one ulp at `precision` bits.
pub fn sqrt_fraction(prime: u64, precision: u32) -> Angle {
    let p = BigUint::from(prime);
    let scaled = (&p << (2 * precision)).sqrt();
    let whole = p.sqrt() << precision;
    let lo = BigInt::from(scaled - whole);
    let hi = &lo + 1;
    Angle::from_bounds(lo, hi, precision)
}

/// The generators `z_α` on a finite window: the `i`-th window coordinate (in
/// increasing order) gets `frac(√p_i)` for the `i`-th prime `p_i`.
#[derive(Clone, Debug)]
pub struct GeneratorMap {
    window: Arc<[Ordinal]>,
    primes: Vec<u64>,
    thetas: Vec<Angle>,
    precision: u32,
}

impl GeneratorMap {
    pub fn new(window: impl IntoIterator<Item = Ordinal>, precision: u32) -> GeneratorMap {
        let mut coords: Vec<Ordinal> = window.into_iter().collect();
        coords.sort();
        coords.dedup();
        let primes = first_primes(coords.len());
        let thetas = primes.iter().map(|&p| sqrt_fraction(p, precision)).collect();
        GeneratorMap {
            window: Arc::from(coords),
            primes,
            thetas,
            precision,
        }
    }

    pub fn with_precision(&self, precision: u32) -> GeneratorMap {
        GeneratorMap::new(self.window.iter().cloned(), precision)
    }

    pub fn window(&self) -> &Arc<[Ordinal]> {
        &self.window
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn thetas(&self) -> &[Angle] {
        &self.thetas
    }

    pub fn prime(&self, index: usize) -> u64 {
        self.primes[index]
    }

    pub fn index_of(&self, alpha: &Ordinal) -> Option<usize> {
        self.window.binary_search(alpha).ok()
    }

    /// `z_α`.
    pub fn z(&self, alpha: &Ordinal) -> Result<&Angle, TorusError> {
        self.index_of(alpha)
            .map(|i| &self.thetas[i])
            .ok_or_else(|| TorusError::NotInWindow(alpha.clone()))
    }
}

/// A finitely supported point of the torus: one angle per window coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointVector {
    window: Arc<[Ordinal]>,
    values: Vec<Angle>,
}

impl PointVector {
    pub fn new(window: Arc<[Ordinal]>, values: Vec<Angle>) -> Result<PointVector, TorusError> {
        if window.len() != values.len() {
            return Err(TorusError::LengthMismatch);
        }
        Ok(PointVector { window, values })
    }

    pub fn identity(window: Arc<[Ordinal]>, precision: u32) -> PointVector {
        let values = vec![Angle::identity(precision); window.len()];
        PointVector { window, values }
    }

    pub fn window(&self) -> &Arc<[Ordinal]> {
        &self.window
    }

    pub fn values(&self) -> &[Angle] {
        &self.values
    }

    pub fn get(&self, alpha: &Ordinal) -> Option<&Angle> {
        self.window.binary_search(alpha).ok().map(|i| &self.values[i])
    }

    fn same_window(&self, other: &PointVector) -> Result<(), TorusError> {
        if Arc::ptr_eq(&self.window, &other.window) || self.window == other.window {
            Ok(())
        } else {
            Err(TorusError::WindowMismatch)
        }
    }

    pub fn multiply(&self, other: &PointVector) -> Result<PointVector, TorusError> {
        self.same_window(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(PointVector {
            window: self.window.clone(),
            values,
        })
    }

    pub fn invert(&self) -> PointVector {
        PointVector {
            window: self.window.clone(),
            values: self.values.iter().map(Angle::neg).collect(),
        }
    }

    pub fn power(&self, n: i64) -> PointVector {
        PointVector {
            window: self.window.clone(),
            values: self.values.iter().map(|a| a.mul_i64(n)).collect(),
        }
    }

    /// Every coordinate is within `tolerance` (a numerator at each angle's
    /// precision) of the identity.
    pub fn is_identity_within(&self, tolerance: &BigInt) -> bool {
        self.values.iter().all(|a| {
            let modulus = BigInt::one() << a.precision;
            a.hi <= *tolerance || (a.lo >= &modulus - tolerance && a.hi <= &modulus + tolerance)
        })
    }
}

/// A point of the subgroup generated by the `z_α`, stored by exponents:
/// coordinate `α` carries `z_α^exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ExponentVector {
    window: Arc<[Ordinal]>,
    exponents: Vec<i64>,
}

impl ExponentVector {
    pub fn new(window: Arc<[Ordinal]>, exponents: Vec<i64>) -> Result<ExponentVector, TorusError> {
        if window.len() != exponents.len() {
            return Err(TorusError::LengthMismatch);
        }
        Ok(ExponentVector { window, exponents })
    }

    pub fn identity(window: Arc<[Ordinal]>) -> ExponentVector {
        let exponents = vec![0; window.len()];
        ExponentVector { window, exponents }
    }

    pub fn window(&self) -> &Arc<[Ordinal]> {
        &self.window
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// `max |exponent|`.
    pub fn bound(&self) -> u64 {
        self.exponents.iter().map(|e| e.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn multiply(&self, other: &ExponentVector) -> Result<ExponentVector, TorusError> {
        if !(Arc::ptr_eq(&self.window, &other.window) || self.window == other.window) {
            return Err(TorusError::WindowMismatch);
        }
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ExponentVector {
            window: self.window.clone(),
            exponents,
        })
    }

    pub fn power(&self, n: i64) -> ExponentVector {
        ExponentVector {
            window: self.window.clone(),
            exponents: self.exponents.iter().map(|e| e * n).collect(),
        }
    }

    /// Evaluates the angles through the generators.
    pub fn realize(&self, generators: &GeneratorMap) -> Result<PointVector, TorusError> {
        let values = self
            .window
            .iter()
            .zip(&self.exponents)
            .map(|(alpha, &p)| {
                if p == 0 {
                    Ok(Angle::identity(generators.precision()))
                } else {
                    generators.z(alpha).map(|z| z.mul_i64(p))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(PointVector {
            window: self.window.clone(),
            values,
        })
    }
}

/// An element `(z_α^{p_α})` of the bounded-exponent subgroup on a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KElement {
    exponents: ExponentVector,
    bound: u64,
}

impl KElement {
    pub fn new(exponents: ExponentVector, bound: u64) -> Result<KElement, TorusError> {
        if let Some(&bad) = exponents.exponents.iter().find(|e| e.unsigned_abs() > bound) {
            return Err(TorusError::ExponentExceedsBound { exponent: bad, bound });
        }
        Ok(KElement { exponents, bound })
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.exponents
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }
}

/// `coordinate α ↦ z_α^{p_α}` over the generator window, after checking the bound.
pub fn k_element(exponents: &[i64], bound: u64, generators: &GeneratorMap) -> Result<PointVector, TorusError> {
    let ev = ExponentVector::new(generators.window().clone(), exponents.to_vec())?;
    KElement::new(ev, bound)?.exponents.realize(generators)
}

/// `o(α, β) = z_α^{osc(α,β)+1}` for `α < β`.
pub fn o(alpha: &Ordinal, beta: &Ordinal, generators: &GeneratorMap, table: &OscTable) -> Result<Angle, TorusError> {
    let osc = table.osc(alpha, beta)?;
    Ok(generators.z(alpha)?.mul_i64(osc as i64 + 1))
}

/// Exponents of `w_β` restricted to `window`: `osc(α,β)+1` below `β`, `0` elsewhere.
pub fn w_exponents(beta: &Ordinal, window: &Arc<[Ordinal]>, table: &OscTable) -> Result<ExponentVector, TorusError> {
    let exponents = window
        .iter()
        .map(|alpha| {
            if alpha < beta {
                table.osc(alpha, beta).map(|v| v as i64 + 1)
            } else {
                Ok(0)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(ExponentVector {
        window: window.clone(),
        exponents,
    })
}

/// `w_β` on the generator window.
pub fn w(beta: &Ordinal, generators: &GeneratorMap, table: &OscTable) -> Result<PointVector, TorusError> {
    w_exponents(beta, generators.window(), table)?.realize(generators)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o_(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn window(items: &[&str]) -> Vec<Ordinal> {
        items.iter().map(|s| o_(s)).collect()
    }

    #[test]
    fn generators_are_sqrt_fractions() {
        let g = GeneratorMap::new(window(&["3", "5", "w"]), 128);
        let z0 = g.z(&o_("3")).unwrap();
        assert!((z0.midpoint_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let z1 = g.z(&o_("5")).unwrap();
        assert!((z1.midpoint_f64() - (3f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(g.z(&o_("3")).unwrap(), g.z(&o_("3")).unwrap());
        assert!(matches!(g.z(&o_("4")), Err(TorusError::NotInWindow(_))));
        assert_eq!(z0.width(), BigInt::one());
        assert_eq!(g.z(&o_("w")).unwrap().midpoint_decimal(8), "0.23606798");
    }

    #[test]
    fn sqrt_enclosure_is_certified() {
        // lo² ≤ frac part bounds: (whole·2^p + lo)² ≤ P·4^p < (whole·2^p + lo + 1)².
        for &(prime, whole) in &[(2u64, 1u64), (3, 1), (13, 3), (97, 9)] {
            let a = sqrt_fraction(prime, 100);
            let base = BigInt::from(whole) << 100u32;
            let lo = &base + a.lo();
            let hi = &base + a.hi();
            let target = BigInt::from(prime) << 200u32;
            assert!(&lo * &lo <= target && target < &hi * &hi);
        }
    }

    #[test]
    fn angle_arithmetic_and_wraparound() {
        let a = Angle::from_turns(0.75, 16);
        let b = Angle::from_turns(0.5, 16);
        assert_eq!(a.add(&b).unwrap(), Angle::from_turns(0.25, 16));
        assert_eq!(a.neg(), Angle::from_turns(0.25, 16));
        assert_eq!(a.mul_i64(3), Angle::from_turns(0.25, 16));
        assert_eq!(a.mul_i64(-1), Angle::from_turns(0.25, 16));
        assert!(a.add(&Angle::identity(8)).is_err());
        assert_eq!(Angle::from_turns(-0.25, 8), Angle::from_turns(0.75, 8));
        let third = Angle::from_turns(1.0 / 3.0, 8);
        assert_eq!(third.width(), BigInt::one());
        assert_eq!(Angle::from_turns(0.5, 8).midpoint_decimal(3), "0.500");
    }

    #[test]
    fn precision_change_contains() {
        let z = sqrt_fraction(5, 64);
        let fine = sqrt_fraction(5, 128);
        assert!(z.contains_mod1(&fine));
        assert!(z.contains_mod1(&z.with_precision(100)));
        assert!(z.with_precision(32).contains_mod1(&z));
    }

    #[test]
    fn k_elements() {
        let g = GeneratorMap::new(window(&["1", "2", "w"]), 64);
        let id = k_element(&[0, 0, 0], 0, &g).unwrap();
        assert!(id.values().iter().all(Angle::is_identity));
        let ones = k_element(&[1, 1, 1], 1, &g).unwrap();
        for (alpha, v) in g.window().iter().zip(ones.values()) {
            assert_eq!(v, g.z(alpha).unwrap());
        }
        let mixed = k_element(&[2, -3, 5], 5, &g).unwrap();
        assert_eq!(mixed.values()[1], g.thetas()[1].mul_i64(-3));
        assert!(matches!(
            k_element(&[2, -6, 0], 5, &g),
            Err(TorusError::ExponentExceedsBound { exponent: -6, bound: 5 })
        ));
    }

    #[test]
    fn w_points() {
        let table = OscTable::new();
        let g = GeneratorMap::new(window(&["3", "5", "w", "w+1"]), 128);
        let pt = w(&o_("w"), &g, &table).unwrap();
        assert_eq!(pt.values()[0], o(&o_("3"), &o_("w"), &g, &table).unwrap());
        assert_eq!(pt.values()[1], o(&o_("5"), &o_("w"), &g, &table).unwrap());
        assert!(pt.values()[2].is_identity() && pt.values()[3].is_identity());
        // osc(3, w) = 0, so o(3, w) = z_3.
        assert_eq!(pt.values()[0], *g.z(&o_("3")).unwrap());
        let zero = w(&Ordinal::zero(), &g, &table).unwrap();
        assert!(zero.values().iter().all(Angle::is_identity));
        assert!(o(&o_("w"), &o_("3"), &g, &table).is_err());
    }

    #[test]
    fn group_laws() {
        let g = GeneratorMap::new(window(&["1", "2"]), 64);
        let a = k_element(&[3, -2], 3, &g).unwrap();
        let tol = BigInt::from(16);
        assert!(a.multiply(&a.invert()).unwrap().is_identity_within(&tol));
        assert!(a.power(0).values().iter().all(Angle::is_identity));
        let other = PointVector::identity(Arc::from(window(&["1", "3"])), 64);
        assert_eq!(a.multiply(&other), Err(TorusError::WindowMismatch));
    }
}
