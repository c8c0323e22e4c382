//! Exact rational scalars and the comparison policy used by every
//! inequality check in the crate.
//!
//! Equilibrium conditions are weak inequalities; a boundary game can sit
//! exactly on one of them. All probabilities, utilities and thresholds are
//! therefore kept as arbitrary-precision rationals, and the only place
//! rounding can enter is [`NumericMode::Float`], which deliberately treats
//! values within `epsilon` of each other as equal.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Arbitrary-precision rational number, stored in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    /// Builds `num/den`. Panics when `den == 0`; use [`Rational::from_str`]
    /// for untrusted input.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational denominator must be nonzero");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Nonnegative integer power.
    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = BigRational::one();
        let mut base = self.0.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Rational(acc)
    }

    /// Smallest integer `>= self`, as `usize`. Negative values clamp to 0;
    /// values beyond `usize::MAX` return `None`.
    pub fn ceil_to_usize(&self) -> Option<usize> {
        if self.is_negative() {
            return Some(0);
        }
        self.0.ceil().to_integer().to_usize()
    }

    /// Nearest `f64`; values far outside the `f64` range map to +/-inf.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub(crate) fn from_big(value: BigRational) -> Self {
        Rational(value)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Div<&Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        &self / rhs
    }
}

impl Div<Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self / &rhs
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

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
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
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

/// Parse error for [`Rational`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    input: String,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cannot parse {:?} as a rational (expected \"p\", \"p/q\" or a decimal like \"0.3\")",
            self.input
        )
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts integers (`"3"`, `"-7"`), fractions (`"16/7"`), and decimal
    /// strings with optional exponent (`"0.3"`, `"1e-6"`). Decimals parse
    /// exactly: `"0.3"` becomes 3/10, never a binary float.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError { input: s.to_string() };
        let s = s.trim();
        if s.is_empty() {
            return Err(err());
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            return Ok(Rational(BigRational::new(num, den)));
        }
        // Decimal form: [sign] digits [. digits] [e [sign] digits]
        let (mantissa, exponent) = match s.split_once(['e', 'E']) {
            Some((m, e)) => (m, i32::from_str(e).map_err(|_| err())?),
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits: String = format!("{}{}", int_part, frac_part);
        if digits == "-" || digits == "+" {
            return Err(err());
        }
        let num = BigInt::from_str(&digits).map_err(|_| err())?;
        let scale = frac_part.len() as i32 - exponent;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::new(num, ten.pow(scale as u32))
        } else {
            BigRational::from_integer(num * ten.pow((-scale) as u32))
        };
        Ok(Rational(value))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::from_str(&s).map_err(D::Error::custom)
    }
}

/// How inequality checks are decided.
///
/// `Exact` compares rationals with no tolerance. `Float` treats
/// `|x - y| <= epsilon` as equality, so a deviation must improve a player's
/// utility by more than `epsilon` to break an equilibrium.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum NumericMode {
    #[default]
    Exact,
    Float { epsilon: f64 },
}

impl NumericMode {
    fn within_epsilon(epsilon: f64, a: &Rational, b: &Rational) -> bool {
        (a - b).to_f64().abs() <= epsilon
    }

    pub fn eq(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            NumericMode::Exact => a == b,
            NumericMode::Float { epsilon } => Self::within_epsilon(*epsilon, a, b),
        }
    }

    /// `a >= b`, up to tolerance in `Float` mode.
    pub fn ge(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            NumericMode::Exact => a >= b,
            NumericMode::Float { epsilon } => a >= b || Self::within_epsilon(*epsilon, a, b),
        }
    }

    /// `a <= b`, up to tolerance in `Float` mode.
    pub fn le(&self, a: &Rational, b: &Rational) -> bool {
        self.ge(b, a)
    }

    /// `a > b` strictly, beyond tolerance in `Float` mode.
    pub fn gt(&self, a: &Rational, b: &Rational) -> bool {
        !self.le(a, b)
    }

    /// `a < b` strictly, beyond tolerance in `Float` mode.
    pub fn lt(&self, a: &Rational, b: &Rational) -> bool {
        !self.ge(a, b)
    }

    pub fn cmp(&self, a: &Rational, b: &Rational) -> Ordering {
        if self.eq(a, b) {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn decimal_strings_parse_as_exact_rationals() {
        assert_eq!(rat("0.3"), Rational::ratio(3, 10));
        assert_eq!(rat("1.25"), Rational::ratio(5, 4));
        assert_eq!(rat("-0.5"), Rational::ratio(-1, 2));
        assert_eq!(rat("16/7"), Rational::ratio(16, 7));
        assert_eq!(rat("3"), Rational::from_int(3));
        assert_eq!(rat("1e-3"), Rational::ratio(1, 1000));
        assert_eq!(rat("2.5e2"), Rational::from_int(250));
        assert_eq!(rat(".5"), Rational::ratio(1, 2));
    }

    #[test]
    fn bad_strings_are_rejected() {
        for s in ["", "abc", "1/0", "1.2.3", "--3", "e5", "."] {
            assert!(s.parse::<Rational>().is_err(), "should reject {s:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "3", "-7/2", "16/7", "1/1000000000000000000000"] {
            let r = rat(s);
            assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = rat("1/3");
        let b = rat("1/6");
        assert_eq!(&a + &b, rat("1/2"));
        assert_eq!(&a - &b, rat("1/6"));
        assert_eq!(&a * &b, rat("1/18"));
        assert_eq!(&a / &b, rat("2"));
        assert_eq!(rat("0.3").pow(3), rat("27/1000"));
    }

    #[test]
    fn ceil_to_usize_handles_boundaries() {
        assert_eq!(rat("4").ceil_to_usize(), Some(4));
        assert_eq!(rat("40").ceil_to_usize(), Some(40));
        assert_eq!(rat("39.1").ceil_to_usize(), Some(40));
        assert_eq!(rat("-2.5").ceil_to_usize(), Some(0));
    }

    #[test]
    fn float_mode_absorbs_small_gaps() {
        let mode = NumericMode::Float { epsilon: 1e-6 };
        let a = rat("1");
        let b = rat("1.0000001");
        assert!(mode.eq(&a, &b));
        assert!(mode.ge(&a, &b));
        assert!(!mode.gt(&b, &a));
        let c = rat("1.1");
        assert!(mode.gt(&c, &a));
        assert!(mode.lt(&a, &c));
    }

    #[test]
    fn exact_mode_is_strict() {
        let mode = NumericMode::Exact;
        let a = rat("1");
        let b = &a + &rat("1/1000000000000000000000000");
        assert!(mode.gt(&b, &a));
        assert!(!mode.eq(&a, &b));
    }

    #[test]
    fn serde_uses_fraction_strings() {
        let r = rat("16/7");
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"16/7\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
