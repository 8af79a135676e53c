//! Literal grammar:
//!
//! ```text
//! sum  := term ("+" term)*
//! term := "w^(" sum ")" ("*" nat)? | "w" ("*" nat)? | nat
//! ```
//!
//! Only normal forms are accepted: exponents must strictly decrease and no
//! coefficient may be zero. Spaces between tokens are ignored.

use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Ordinal, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected character {0:?}")]
    Unexpected(char),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("exponents not decreasing")]
    ExponentsNotDecreasing,
    #[error("zero coefficient")]
    ZeroCoefficient,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos) == Some(&b' ') {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn unexpected(&mut self) -> ParseError {
        match self.peek() {
            None => self.err(ParseErrorKind::UnexpectedEnd),
            Some(c) => self.err(ParseErrorKind::Unexpected(c as char)),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else if self.peek().is_none() {
            Err(self.err(ParseErrorKind::UnexpectedEnd))
        } else {
            Err(self.err(ParseErrorKind::Expected(what)))
        }
    }

    fn nat(&mut self) -> Result<BigUint, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.src.len() {
                self.err(ParseErrorKind::UnexpectedEnd)
            } else {
                self.err(ParseErrorKind::Expected("natural number"))
            });
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("nonempty digit string"))
    }

    fn coefficient(&mut self) -> Result<BigUint, ParseError> {
        if self.eat(b'*') {
            let at = self.pos;
            let c = self.nat()?;
            if c.is_zero() {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::ZeroCoefficient,
                });
            }
            Ok(c)
        } else {
            Ok(BigUint::from(1u32))
        }
    }

    fn term(&mut self) -> Result<(usize, Term), ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') {
                    self.expect(b'(', "'(' after '^'")?;
                    let e = self.sum()?;
                    self.expect(b')', "')'")?;
                    e
                } else {
                    Ordinal::one()
                };
                Ok((start, Term::new(exponent, self.coefficient()?)))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.nat()?;
                Ok((start, Term::new(Ordinal::zero(), n)))
            }
            _ => Err(self.unexpected()),
        }
    }

    fn sum(&mut self) -> Result<Ordinal, ParseError> {
        let (first_at, first) = self.term()?;
        if first.coefficient.is_zero() {
            // A bare "0" is only valid as the whole sum.
            if self.peek() == Some(b'+') {
                return Err(ParseError {
                    position: first_at,
                    kind: ParseErrorKind::ZeroCoefficient,
                });
            }
            return Ok(Ordinal::zero());
        }
        let mut terms = vec![first];
        while self.eat(b'+') {
            let (at, t) = self.term()?;
            if t.coefficient.is_zero() {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::ZeroCoefficient,
                });
            }
            if terms.last().expect("nonempty").exponent <= t.exponent {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::ExponentsNotDecreasing,
                });
            }
            terms.push(t);
        }
        Ok(Ordinal::from_terms_unchecked(terms))
    }
}

impl FromStr for Ordinal {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.is_ascii() {
            let position = s.find(|c: char| !c.is_ascii()).unwrap_or(0);
            let c = s[position..].chars().next().unwrap_or('?');
            return Err(ParseError {
                position,
                kind: ParseErrorKind::Unexpected(c),
            });
        }
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let value = p.sum()?;
        if p.peek().is_some() {
            return Err(p.unexpected());
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let a: Ordinal = "w^(2)*3+w+5".parse().unwrap();
        let expect = Ordinal::from_terms(vec![
            Term::new(Ordinal::finite(2u32), 3u32),
            Term::new(Ordinal::one(), 1u32),
            Term::new(Ordinal::zero(), 5u32),
        ])
        .unwrap();
        assert_eq!(a, expect);
        assert_eq!(a.to_string(), "w^(2)*3+w+5");
        assert_eq!("w*1".parse::<Ordinal>().unwrap().to_string(), "w");
        assert_eq!("w^(1)".parse::<Ordinal>().unwrap().to_string(), "w");
        assert_eq!("w^(0)*4".parse::<Ordinal>().unwrap().to_string(), "4");
        assert_eq!(" w ^( w ) + 2 ".parse::<Ordinal>().unwrap().to_string(), "w^(w)+2");
        assert_eq!("0".parse::<Ordinal>().unwrap(), Ordinal::zero());
    }

    #[test]
    fn rejects_non_canonical() {
        let e = "w+w^(2)".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ExponentsNotDecreasing);
        assert_eq!(e.position, 2);
        assert_eq!(
            "w+w".parse::<Ordinal>().unwrap_err().kind,
            ParseErrorKind::ExponentsNotDecreasing
        );
        assert_eq!(
            "w*0".parse::<Ordinal>().unwrap_err().kind,
            ParseErrorKind::ZeroCoefficient
        );
        assert_eq!(
            "w+0".parse::<Ordinal>().unwrap_err().kind,
            ParseErrorKind::ZeroCoefficient
        );
        assert_eq!(
            "0+w".parse::<Ordinal>().unwrap_err().kind,
            ParseErrorKind::ZeroCoefficient
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = "w^(2".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = "w^2".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.position, 2);
        let e = "w+x".parse::<Ordinal>().unwrap_err();
        assert_eq!((e.position, e.kind), (2, ParseErrorKind::Unexpected('x')));
        let e = "".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = "w ω".parse::<Ordinal>().unwrap_err();
        assert_eq!(e.position, 2);
    }
}
