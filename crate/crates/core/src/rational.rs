//! Exact rational numbers for sizes, penalties and window grids.
//!
//! Every feasibility decision in the crate (bin capacity, strict pricing
//! capacities, window dominance) is made on these values, never on floats.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Maximum number of fractional digits accepted when parsing decimals.
pub const MAX_FRACTION_DIGITS: usize = 18;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("`{0}` has more than {MAX_FRACTION_DIGITS} fractional digits")]
    TooPrecise(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Canonical exact rational (gcd-reduced, positive denominator).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators gracefully.
        self.0.to_f64().unwrap_or_else(|| {
            if self.0.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    /// Parses `"0.375"`, `"-2"`, `"1e-3"`-free decimals and `"3/8"` fractions.
    pub fn parse(text: &str) -> Result<Self, ParseRationalError> {
        let s = text.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim())
                .map_err(|_| ParseRationalError::Malformed(s.to_owned()))?;
            let d = BigInt::from_str(d.trim())
                .map_err(|_| ParseRationalError::Malformed(s.to_owned()))?;
            if d.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_owned()));
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseRationalError::Malformed(s.to_owned()));
        }
        let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok(int_part) || !digits_ok(frac_part) {
            return Err(ParseRationalError::Malformed(s.to_owned()));
        }
        if frac_part.len() > MAX_FRACTION_DIGITS {
            return Err(ParseRationalError::TooPrecise(s.to_owned()));
        }
        let mut digits = String::with_capacity(int_part.len() + frac_part.len() + 1);
        digits.push_str(if int_part.is_empty() { "0" } else { int_part });
        digits.push_str(frac_part);
        let numer = BigInt::from_str(&digits).map_err(|_| ParseRationalError::Malformed(s.to_owned()))?;
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let numer = if negative { -numer } else { numer };
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// Exact decimal rendering, or `None` when the expansion does not terminate.
    pub fn to_decimal_string(&self) -> Option<String> {
        let denom = self.0.denom().clone();
        let mut rest = denom.clone();
        let two = BigInt::from(2u32);
        let five = BigInt::from(5u32);
        let (mut twos, mut fives) = (0usize, 0usize);
        while rest.is_even() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10u32), places);
        let scaled = self.0.numer() * (&scale / &denom);
        let negative = scaled.sign() == Sign::Minus;
        let mut digits = scaled.abs().to_string();
        if places == 0 {
            return Some(if negative { format!("-{digits}") } else { digits });
        }
        if digits.len() <= places {
            digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
        }
        let split = digits.len() - places;
        let out = format!("{}.{}", &digits[..split], &digits[split..]);
        Some(if negative { format!("-{out}") } else { out })
    }

    /// Decimal when terminating, `p/q` otherwise. Round-trips through [`Rational::parse`].
    pub fn to_exact_string(&self) -> String {
        self.to_decimal_string()
            .unwrap_or_else(|| format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_exact_string())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_exact_string())
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational(BigRational::from_integer(v))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_exact_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the tests: `q(3, 8)` is 3/8.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse("0.375").unwrap(), q(3, 8));
        assert_eq!(Rational::parse("1").unwrap(), q(1, 1));
        assert_eq!(Rational::parse(".5").unwrap(), q(1, 2));
        assert_eq!(Rational::parse("-0.25").unwrap(), q(-1, 4));
        assert_eq!(Rational::parse("3/9").unwrap(), q(1, 3));
        assert_eq!(Rational::parse("0.1").unwrap() + Rational::parse("0.2").unwrap(), Rational::parse("0.3").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Rational::parse("").is_err());
        assert!(Rational::parse("1e-3").is_err());
        assert!(Rational::parse("0.1.2").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse(".").is_err());
        assert!(matches!(
            Rational::parse("0.0000000000000000001"),
            Err(ParseRationalError::TooPrecise(_))
        ));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(q(3, 8).to_decimal_string().as_deref(), Some("0.375"));
        assert_eq!(q(7, 1).to_decimal_string().as_deref(), Some("7"));
        assert_eq!(q(-1, 20).to_decimal_string().as_deref(), Some("-0.05"));
        assert_eq!(q(1, 3).to_decimal_string(), None);
        assert_eq!(q(1, 3).to_exact_string(), "1/3");
        assert_eq!(q(123, 100).to_string(), "1.23");
    }

    #[test]
    fn canonical_form() {
        let r = Rational::new(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    proptest::proptest! {
        #[test]
        fn exact_string_round_trips(n in -1_000_000i64..1_000_000, d in 1i64..5000) {
            let r = Rational::new(n, d);
            proptest::prop_assert_eq!(Rational::parse(&r.to_exact_string()).unwrap(), r);
        }
    }
}
