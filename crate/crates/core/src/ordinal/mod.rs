//! Ordinals below ε₀ in Cantor normal form.
//!
//! An [`Ordinal`] is a finite list of terms `ω^e·c` with strictly decreasing
//! exponents and positive coefficients. Exponents are themselves ordinals, so
//! the representation is a finite tree. Comparison is lexicographic on the
//! term list, which coincides with the ordinal order for normal forms.

mod parse;
mod staircase;

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parse::{ParseError, ParseErrorKind};
pub use staircase::staircase;

/// One Cantor-normal-form term `ω^exponent · coefficient`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: BigUint,
}

impl Term {
    pub fn new(exponent: Ordinal, coefficient: impl Into<BigUint>) -> Self {
        Term {
            exponent,
            coefficient: coefficient.into(),
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exponent
            .cmp(&other.exponent)
            .then_with(|| self.coefficient.cmp(&other.coefficient))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Errors raised when assembling an ordinal from raw terms.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalFormError {
    #[error("term {index} has coefficient 0")]
    ZeroCoefficient { index: usize },
    #[error("exponents not strictly decreasing at term {index}")]
    ExponentsNotDecreasing { index: usize },
}

/// An ordinal below ε₀. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ordinal(Arc<[Term]>);

static ZERO: OnceLock<Ordinal> = OnceLock::new();

impl Ordinal {
    pub fn zero() -> Ordinal {
        ZERO.get_or_init(|| Ordinal(Arc::from(Vec::new()))).clone()
    }

    pub fn one() -> Ordinal {
        Ordinal::finite(1u32)
    }

    pub fn omega() -> Ordinal {
        Ordinal::omega_pow_times(Ordinal::one(), 1u32)
    }

    pub fn finite(n: impl Into<BigUint>) -> Ordinal {
        let n = n.into();
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal(Arc::from(vec![Term::new(Ordinal::zero(), n)]))
        }
    }

    /// `ω^exponent · coefficient`; zero when the coefficient is zero.
    pub fn omega_pow_times(exponent: Ordinal, coefficient: impl Into<BigUint>) -> Ordinal {
        let coefficient = coefficient.into();
        if coefficient.is_zero() {
            return Ordinal::zero();
        }
        Ordinal(Arc::from(vec![Term::new(exponent, coefficient)]))
    }

    pub fn omega_pow(exponent: Ordinal) -> Ordinal {
        Ordinal::omega_pow_times(exponent, 1u32)
    }

    /// Builds an ordinal from terms, rejecting anything not in normal form.
    pub fn from_terms(terms: Vec<Term>) -> Result<Ordinal, NormalFormError> {
        for (index, term) in terms.iter().enumerate() {
            if term.coefficient.is_zero() {
                return Err(NormalFormError::ZeroCoefficient { index });
            }
            if index > 0 && terms[index - 1].exponent <= term.exponent {
                return Err(NormalFormError::ExponentsNotDecreasing { index });
            }
        }
        Ok(Ordinal(Arc::from(terms)))
    }

    pub(crate) fn from_terms_unchecked(terms: Vec<Term>) -> Ordinal {
        debug_assert!(Ordinal::from_terms(terms.clone()).is_ok());
        Ordinal(Arc::from(terms))
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|t| t.exponent.is_zero())
    }

    /// Limit iff nonzero and the last exponent is positive.
    pub fn is_limit(&self) -> bool {
        self.0.last().is_some_and(|t| !t.exponent.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.0.last().is_some_and(|t| t.exponent.is_zero())
    }

    pub fn last_term(&self) -> Option<&Term> {
        self.0.last()
    }

    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.0.first().map(|t| &t.exponent)
    }

    /// The value as a machine integer, if finite and small enough.
    pub fn as_u64(&self) -> Option<u64> {
        match &*self.0 {
            [] => Some(0),
            [t] if t.exponent.is_zero() => t.coefficient.to_u64(),
            _ => None,
        }
    }

    pub fn successor(&self) -> Ordinal {
        let mut terms = self.0.to_vec();
        match terms.last_mut() {
            Some(t) if t.exponent.is_zero() => t.coefficient += 1u32,
            _ => terms.push(Term::new(Ordinal::zero(), 1u32)),
        }
        Ordinal(Arc::from(terms))
    }

    pub fn predecessor(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.0.to_vec();
        let last = terms.last_mut().expect("successor has a last term");
        if last.coefficient.is_one() {
            terms.pop();
        } else {
            last.coefficient -= 1u32;
        }
        Some(Ordinal(Arc::from(terms)))
    }

    /// Ordinal addition: terms of `self` below the leading exponent of
    /// `other` are absorbed.
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.0.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.0.len() + other.0.len());
        let mut merged = false;
        for t in self.0.iter() {
            match t.exponent.cmp(&lead.exponent) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => {
                    terms.push(Term::new(lead.exponent.clone(), &t.coefficient + &lead.coefficient));
                    merged = true;
                    break;
                }
                Ordering::Less => break,
            }
        }
        let rest = if merged { &other.0[1..] } else { &other.0[..] };
        terms.extend(rest.iter().cloned());
        Ordinal(Arc::from(terms))
    }

    /// Splits off the final `ω^e` of the normal form: `self = head + ω^e`.
    /// Returns `None` for zero.
    pub(crate) fn split_last_power(&self) -> Option<(Ordinal, &Ordinal)> {
        let last = self.0.last()?;
        let mut head = self.0[..self.0.len() - 1].to_vec();
        if !last.coefficient.is_one() {
            head.push(Term::new(last.exponent.clone(), &last.coefficient - 1u32));
        }
        Some((Ordinal(Arc::from(head)), &last.exponent))
    }
}

impl Default for Ordinal {
    fn default() -> Self {
        Ordinal::zero()
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.iter().cmp(other.0.iter())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Ordinal {
    type Output = Ordinal;

    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            if t.exponent.as_u64() == Some(1) {
                f.write_str("w")?;
            } else {
                write!(f, "w^({})", t.exponent)?;
            }
            if !t.coefficient.is_one() {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(Ordinal::zero().cmp(&Ordinal::zero()), Ordering::Equal);
        assert!(o("w") < o("w+1"));
        assert!(o("w^(2)") > o("w*5+3"));
    }

    #[test]
    fn add_examples() {
        assert_eq!(o("3").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("3")), o("w+3"));
        assert_eq!(o("w^(2)+w").add(&o("w*4")), o("w^(2)+w*5"));
        assert_eq!(o("w^(2)+w*3+7").add(&o("w*4+1")), o("w^(2)+w*7+1"));
        assert_eq!(o("w+5").add(&Ordinal::zero()), o("w+5"));
    }

    #[test]
    fn successor_and_limit() {
        assert_eq!(Ordinal::zero().successor(), Ordinal::one());
        assert!(o("w*2").is_limit());
        assert!(!o("w^(w)+5").is_limit());
        assert!(!Ordinal::zero().is_limit());
        assert!(Ordinal::zero().is_zero());
        assert_eq!(o("w+5").predecessor(), Some(o("w+4")));
        assert_eq!(o("w+1").predecessor(), Some(o("w")));
        assert_eq!(o("w").predecessor(), None);
    }

    #[test]
    fn from_terms_rejects_non_normal() {
        let bad = vec![Term::new(Ordinal::one(), 1u32), Term::new(Ordinal::finite(2u32), 1u32)];
        assert_eq!(
            Ordinal::from_terms(bad),
            Err(NormalFormError::ExponentsNotDecreasing { index: 1 })
        );
        assert_eq!(
            Ordinal::from_terms(vec![Term::new(Ordinal::one(), 0u32)]),
            Err(NormalFormError::ZeroCoefficient { index: 0 })
        );
    }

    #[test]
    fn split_last_power_peels_one_copy() {
        let x = o("w^(2)*3");
        let (head, e) = x.split_last_power().unwrap();
        assert_eq!(head, o("w^(2)*2"));
        assert_eq!(*e, o("2"));
    }

    #[test]
    fn serde_uses_literals() {
        let v = serde_json::to_string(&o("w^(w)+w*2")).unwrap();
        assert_eq!(v, "\"w^(w)+w*2\"");
        let back: Ordinal = serde_json::from_str(&v).unwrap();
        assert_eq!(back, o("w^(w)+w*2"));
    }
}
