//! Exact rational arithmetic.
//!
//! Every time and size quantity in the simulator is a [`Rat`]: a reduced
//! fraction with an `i128` numerator and a positive `i128` denominator.
//! All operations are exact; overflow aborts loudly instead of rounding.
//! The instance format keeps rationals as strings ("3/4", "0.25") so that
//! serialization round-trips bit-exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A rational number in canonical reduced form: `den > 0`, `gcd(|num|, den) = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rat {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatParseError {
    #[error("empty rational string")]
    Empty,
    #[error("invalid rational {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

impl Rat {
    pub const ZERO: Rat = Rat { num: 0, den: 1 };
    pub const ONE: Rat = Rat { num: 1, den: 1 };

    /// Builds `num/den` in canonical form. Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "rational with zero denominator");
        let g = gcd(num, den);
        let sign = if den < 0 { -1 } else { 1 };
        if g == 0 {
            return Rat::ZERO;
        }
        Rat {
            num: sign * num / g,
            den: (den / g).abs(),
        }
    }

    pub fn from_int(n: i64) -> Rat {
        Rat {
            num: n as i128,
            den: 1,
        }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(&self) -> Rat {
        Rat {
            num: self.num.abs(),
            den: self.den,
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(self.num != 0, "reciprocal of zero");
        Rat::new(self.den, self.num)
    }

    /// Approximate value for display and SVG layout only; never used in
    /// simulation or checks.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn checked_bin(a: Rat, b: Rat, f: impl Fn(i128, i128, i128, i128) -> Option<(i128, i128)>) -> Rat {
        match f(a.num, a.den, b.num, b.den) {
            Some((n, d)) => Rat::new(n, d),
            None => panic!("rational overflow in {a} op {b}"),
        }
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat::checked_bin(self, rhs, |an, ad, bn, bd| {
            let g = gcd(ad, bd);
            let l = ad.checked_mul(bd / g)?;
            let x = an.checked_mul(bd / g)?;
            let y = bn.checked_mul(ad / g)?;
            Some((x.checked_add(y)?, l))
        })
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        self + (-rhs)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        // cross-reduce first to keep intermediates small
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        Rat::checked_bin(self, rhs, |an, ad, bn, bd| {
            let n = (an / g1).checked_mul(bn / g2)?;
            let d = (ad / g2).checked_mul(bd / g1)?;
            Some((n, d))
        })
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self * rhs.recip()
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat {
            num: -self.num,
            den: self.den,
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        // a/b vs c/d with b,d > 0: compare a*d vs c*b
        let l = self.num.checked_mul(other.den);
        let r = other.num.checked_mul(self.den);
        match (l, r) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => panic!("rational overflow comparing {self} and {other}"),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = RatParseError;

    /// Accepts "a/b", integer, or decimal literals ("0.25" becomes 1/4 exactly).
    fn from_str(s: &str) -> Result<Rat, RatParseError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RatParseError::Empty);
        }
        let invalid = || RatParseError::Invalid(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num: i128 = n.trim().parse().map_err(|_| invalid())?;
            let den: i128 = d.trim().parse().map_err(|_| invalid())?;
            if den == 0 {
                return Err(RatParseError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rat::new(num, den));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            let negative = int_part.starts_with('-');
            let int: i128 = if int_part == "-" || int_part.is_empty() {
                0
            } else {
                int_part.parse().map_err(|_| invalid())?
            };
            let frac: i128 = frac_part.parse().map_err(|_| invalid())?;
            let scale = 10i128
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(invalid)?;
            let magnitude = int
                .abs()
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(invalid)?;
            let num = if negative { -magnitude } else { magnitude };
            return Ok(Rat::new(num, scale));
        }
        let num: i128 = s.parse().map_err(|_| invalid())?;
        Ok(Rat { num, den: 1 })
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the tests.
pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(-2, -4), rat(1, 2));
        assert_eq!(rat(2, -4), rat(-1, 2));
        assert_eq!(rat(0, 5), Rat::ZERO);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1/2".parse::<Rat>().unwrap(), rat(1, 2));
        assert_eq!("0.25".parse::<Rat>().unwrap(), rat(1, 4));
        assert_eq!("-0.5".parse::<Rat>().unwrap(), rat(-1, 2));
        assert_eq!("3".parse::<Rat>().unwrap(), Rat::from_int(3));
        assert_eq!("1.10".parse::<Rat>().unwrap(), rat(11, 10));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("".parse::<Rat>().is_err());
        assert!("a".parse::<Rat>().is_err());
        assert!("1.".parse::<Rat>().is_err());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(rat(1, 2) + rat(1, 3), rat(5, 6));
        assert_eq!(rat(1, 2) - rat(1, 3), rat(1, 6));
        assert_eq!(rat(2, 3) * rat(3, 4), rat(1, 2));
        assert_eq!(rat(1, 2) / rat(1, 4), Rat::from_int(2));
        assert!(rat(1, 3) < rat(1, 2));
    }

    #[test]
    fn display_roundtrip() {
        for r in [rat(3, 7), Rat::from_int(-4), rat(-5, 6), Rat::ZERO] {
            assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
        }
    }

    proptest! {
        #[test]
        fn field_props(an in -50i128..50, ad in 1i128..20, bn in -50i128..50, bd in 1i128..20) {
            let a = Rat::new(an, ad);
            let b = Rat::new(bn, bd);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a + b - b, a);
            prop_assert_eq!(a * b, b * a);
            if !b.is_zero() {
                prop_assert_eq!(a / b * b, a);
            }
        }

        #[test]
        fn parse_display_roundtrip(n in -10000i128..10000, d in 1i128..10000) {
            let r = Rat::new(n, d);
            prop_assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
        }
    }
}
