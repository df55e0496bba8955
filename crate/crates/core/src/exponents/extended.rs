//! The extended exponent type: a positive rational or infinity.
//!
//! Every exponent in the inequality machinery (domain exponents p_i, mixed-norm
//! exponents q_i, thresholds, conjugates) is an [`ExtendedExponent`]. Arithmetic
//! is exact; the convention `1/infinity = 0` is built into [`ExtendedExponent::recip`].
//! Floats appear only at the boundary ([`ExtendedExponent::to_f64`]) where the
//! numeric layers consume exponents.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExponentError;

/// A positive rational exponent or the distinguished value infinity.
///
/// Ordering places infinity above every finite value. Finite values compare
/// exactly as rationals, so boundary membership tests (for example `q >= 3/2`)
/// are decided without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedExponent {
    Finite(Rational64),
    Infinity,
}

impl ExtendedExponent {
    pub const INFINITY: ExtendedExponent = ExtendedExponent::Infinity;

    /// Builds a finite exponent `num/den`, rejecting non-positive values.
    pub fn new(num: i64, den: i64) -> Result<Self, ExponentError> {
        if den == 0 {
            return Err(ExponentError::NonPositive(format!("{num}/{den}")));
        }
        Self::from_rational(Rational64::new(num, den))
    }

    /// Wraps an exact rational, rejecting non-positive values.
    pub fn from_rational(r: Rational64) -> Result<Self, ExponentError> {
        if r.is_positive() {
            Ok(ExtendedExponent::Finite(r))
        } else {
            Err(ExponentError::NonPositive(r.to_string()))
        }
    }

    /// Builds a finite integer exponent.
    pub fn from_int(v: i64) -> Result<Self, ExponentError> {
        Self::new(v, 1)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedExponent::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    /// Exact reciprocal with the convention `1/infinity = 0`.
    pub fn recip(&self) -> Rational64 {
        match self {
            ExtendedExponent::Finite(r) => r.recip(),
            ExtendedExponent::Infinity => Rational64::zero(),
        }
    }

    /// Inverse of [`recip`](Self::recip): builds the exponent whose reciprocal
    /// is `r`, mapping 0 to infinity. Rejects negative `r`.
    pub fn from_recip(r: Rational64) -> Result<Self, ExponentError> {
        if r.is_zero() {
            Ok(ExtendedExponent::Infinity)
        } else if r.is_positive() {
            Ok(ExtendedExponent::Finite(r.recip()))
        } else {
            Err(ExponentError::NonPositiveReciprocal {
                position: 0,
                value: r.to_string(),
            })
        }
    }

    /// The conjugate exponent `p* = p/(p-1)`, with `1* = infinity` and
    /// `infinity* = 1`. Defined for `p >= 1` only.
    pub fn conjugate(&self) -> Result<Self, ExponentError> {
        let one = Rational64::from_integer(1);
        match self {
            ExtendedExponent::Infinity => Ok(ExtendedExponent::Finite(one)),
            ExtendedExponent::Finite(p) => match p.cmp(&one) {
                Ordering::Less => Err(ExponentError::Precondition(format!(
                    "conjugate exponent requires p >= 1, got {p}"
                ))),
                Ordering::Equal => Ok(ExtendedExponent::Infinity),
                Ordering::Greater => Ok(ExtendedExponent::Finite(*p / (*p - one))),
            },
        }
    }

    /// Lossy conversion for the floating-point layers; infinity maps to
    /// `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedExponent::Finite(r) => {
                r.to_f64().expect("rational within f64 range")
            }
            ExtendedExponent::Infinity => f64::INFINITY,
        }
    }

    /// The finite rational value, if any.
    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            ExtendedExponent::Finite(r) => Some(*r),
            ExtendedExponent::Infinity => None,
        }
    }
}

impl PartialOrd for ExtendedExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedExponent::*;
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Finite(_), Infinity) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedExponent::Infinity => write!(f, "inf"),
            ExtendedExponent::Finite(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl FromStr for ExtendedExponent {
    type Err = ExponentError;

    /// Parses `inf`, an integer `a`, or a fraction `a/b`. Decimal literals are
    /// rejected so boundary cases stay exactly classifiable.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtendedExponent::Infinity);
        }
        if s.contains('.') {
            return Err(ExponentError::Literal {
                input: s.to_string(),
                reason: "decimal literals are not accepted; use a rational a/b or inf".into(),
            });
        }
        let parse_int = |part: &str| -> Result<i64, ExponentError> {
            part.parse::<i64>().map_err(|e| ExponentError::Literal {
                input: s.to_string(),
                reason: e.to_string(),
            })
        };
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (parse_int(a)?, parse_int(b)?),
            None => (parse_int(s)?, 1),
        };
        if den == 0 {
            return Err(ExponentError::Literal {
                input: s.to_string(),
                reason: "zero denominator".into(),
            });
        }
        ExtendedExponent::new(num, den)
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Shorthand used pervasively in tests and examples: `exp("4/3")`, `exp("inf")`.
///
/// Panics on invalid literals; use [`ExtendedExponent::from_str`] for fallible
/// parsing.
pub fn exp(literal: &str) -> ExtendedExponent {
    literal
        .parse()
        .unwrap_or_else(|e| panic!("bad exponent literal {literal:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_of_infinity_is_zero() {
        assert_eq!(ExtendedExponent::Infinity.recip(), Rational64::zero());
        assert_eq!(exp("4/3").recip(), Rational64::new(3, 4));
    }

    #[test]
    fn rejects_non_positive_values() {
        assert!(ExtendedExponent::new(0, 1).is_err());
        assert!(ExtendedExponent::new(-3, 2).is_err());
        assert!(ExtendedExponent::new(3, -2).is_err());
        assert!(ExtendedExponent::new(1, 0).is_err());
    }

    #[test]
    fn parses_integer_fraction_and_inf_literals() {
        assert_eq!(exp("inf"), ExtendedExponent::Infinity);
        assert_eq!(exp("3"), ExtendedExponent::new(3, 1).unwrap());
        assert_eq!(exp("12/5"), ExtendedExponent::new(12, 5).unwrap());
        assert_eq!(exp(" 3/2 "), ExtendedExponent::new(3, 2).unwrap());
    }

    #[test]
    fn rejects_decimal_literals() {
        assert!("1.5".parse::<ExtendedExponent>().is_err());
        assert!("2.".parse::<ExtendedExponent>().is_err());
    }

    #[test]
    fn ordering_places_infinity_on_top() {
        assert!(exp("inf") > exp("1000000"));
        assert!(exp("3/2") < exp("2"));
        assert!(exp("12/5") < exp("5/2"));
        assert_eq!(exp("4/2"), exp("2"));
    }

    #[test]
    fn conjugates_match_duality_table() {
        assert_eq!(exp("1").conjugate().unwrap(), exp("inf"));
        assert_eq!(exp("inf").conjugate().unwrap(), exp("1"));
        assert_eq!(exp("2").conjugate().unwrap(), exp("2"));
        assert_eq!(exp("4").conjugate().unwrap(), exp("4/3"));
        assert_eq!(exp("3/2").conjugate().unwrap(), exp("3"));
        assert!(exp("1/2").conjugate().is_err());
    }

    #[test]
    fn display_round_trips_through_parse() {
        for lit in ["inf", "2", "4/3", "12/5", "10000"] {
            let e = exp(lit);
            assert_eq!(e.to_string(), lit);
            assert_eq!(exp(&e.to_string()), e);
        }
    }

    #[test]
    fn serde_uses_literal_strings() {
        let q = exp("12/5");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "\"12/5\"");
        let back: ExtendedExponent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        let inf: ExtendedExponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(inf, ExtendedExponent::Infinity);
    }
}
