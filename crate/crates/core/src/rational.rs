//! Arbitrary-precision rationals.
//!
//! Every location, satisfaction and probability in the crate is a
//! [`Rational`]. Values are kept in lowest terms with a positive
//! denominator, so structural equality is numeric equality.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    /// Builds `num/den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Rational(BigRational::new(num, den)))
        }
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn half() -> Self {
        Rational::new(1, 2)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
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

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// `|self - other|`
    pub fn dist(&self, other: &Rational) -> Self {
        Rational((&self.0 - &other.0).abs())
    }

    /// True if `0 <= self <= 1`.
    pub fn in_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Nearest fraction `k/den` to `x`, ties away from zero.
    pub fn nearest_on_grid(x: f64, den: u32) -> Self {
        let k = (x * f64::from(den)).round() as i64;
        Rational::new(k, i64::from(den))
    }

    /// Exact value of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn min_of<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Option<Rational> {
        values.into_iter().min().cloned()
    }

    pub fn max_of<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Option<Rational> {
        values.into_iter().max().cloned()
    }

    /// Decimal rendering with `places` digits after the point, rounded
    /// half away from zero.
    pub fn to_decimal_string(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = scaled.round().to_integer();
        let negative = rounded.is_negative();
        let digits = rounded.abs().to_string();
        let digits = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        let sign = if negative { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p`, `p/q`, and finite decimals such as `-0.125` (read
/// exactly as `k/10^d`).
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let invalid = || ParseRationalError::Invalid(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num = parse_int(num.trim()).ok_or_else(invalid)?;
            let den = parse_int(den.trim()).ok_or_else(invalid)?;
            if den.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rational(BigRational::new(num, den)));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let negative = int_part.starts_with('-');
            let int_digits = int_part.trim_start_matches(['-', '+']);
            if frac_part.is_empty() && int_digits.is_empty() {
                return Err(invalid());
            }
            if !int_digits.chars().all(|c| c.is_ascii_digit())
                || !frac_part.chars().all(|c| c.is_ascii_digit())
                || int_part.len() > int_digits.len() + 1
            {
                return Err(invalid());
            }
            let all_digits = format!("{int_digits}{frac_part}");
            let magnitude: BigInt = if all_digits.is_empty() {
                BigInt::zero()
            } else {
                all_digits.parse().map_err(|_| invalid())?
            };
            let den = BigInt::from(10u32).pow(frac_part.len() as u32);
            let num = if negative { -magnitude } else { magnitude };
            return Ok(Rational(BigRational::new(num, den)));
        }
        let n = parse_int(s).ok_or_else(invalid)?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.trim_start_matches(['-', '+']);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) || s.len() > digits.len() + 1 {
        return None;
    }
    s.parse().ok()
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
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

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn lowest_terms() {
        let x = Rational::new(4, -6);
        assert_eq!(x.to_string(), "-2/3");
        assert_eq!(x, r("-2/3"));
        assert!(x.denom() > &BigInt::zero());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(r("0.5"), Rational::half());
        assert_eq!(r("0.125"), Rational::new(1, 8));
        assert_eq!(r("-.25"), Rational::new(-1, 4));
        assert_eq!(r("3"), Rational::from_integer(3));
        assert_eq!(r(" 10/4 "), Rational::new(5, 2));
        assert_eq!(r("1."), Rational::one());
        assert!(matches!("1/0".parse::<Rational>(), Err(ParseRationalError::ZeroDenominator(_))));
        for bad in ["", "abc", "1/2/3", "--1", "1e3", ".", "0x10", "1/-"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::new(4, 3).to_decimal_string(6), "1.333333");
        assert_eq!(Rational::new(17, 16).to_decimal_string(6), "1.062500");
        assert_eq!(Rational::new(-1, 3).to_decimal_string(2), "-0.33");
        assert_eq!(Rational::new(1, 2000).to_decimal_string(3), "0.001");
        assert_eq!(Rational::from_integer(2).to_decimal_string(0), "2");
    }

    #[test]
    fn grid_rounding() {
        let eps = 0.5 - 2f64.sqrt() / 4.0;
        assert_eq!(Rational::nearest_on_grid(eps, 256), Rational::new(37, 256));
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Rational::new(1, 6);
        let b = Rational::new(5, 6);
        assert_eq!(&a + &b, Rational::one());
        assert_eq!(a.dist(&b), Rational::new(2, 3));
        assert_eq!((&a * &b) / &b, a);
        assert_eq!(vec![a.clone(), b.clone()].into_iter().sum::<Rational>(), Rational::one());
    }
}
