//! Exact rational scalars.
//!
//! Every constant that reaches the polyhedra engine (guard bounds, flow rates,
//! sample values, timestamps) is a [`Rational`]. Values are kept in lowest terms
//! with a positive denominator after every operation, so equality is structural.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Arbitrary-precision rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, NumericError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, NumericError> {
        Rational::one().checked_div(self)
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion for reporting only; never used in geometry.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub(crate) fn from_big(value: BigRational) -> Self {
        Rational(value)
    }
}

/// Parses `[+-]digits[.digits]` or `[+-]digits/digits`.
pub fn rational_from_decimal_string(text: &str) -> Result<Rational, NumericError> {
    let trimmed = text.trim();
    let malformed = || NumericError::Malformed(text.to_string());
    let (negative, body) = match trimmed.as_bytes().first() {
        Some(b'-') => (true, &trimmed[1..]),
        Some(b'+') => (false, &trimmed[1..]),
        _ => (false, trimmed),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());

    let value = if let Some((num, den)) = body.split_once('/') {
        let (num, den) = (num.trim(), den.trim());
        if !all_digits(num) || !all_digits(den) {
            return Err(malformed());
        }
        let den: BigInt = den.parse().map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(NumericError::ZeroDenominator(text.to_string()));
        }
        let num: BigInt = num.parse().map_err(|_| malformed())?;
        BigRational::new(num, den)
    } else {
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !(int_part.is_empty() || all_digits(int_part)) || !(frac_part.is_empty() || all_digits(frac_part)) {
            return Err(malformed());
        }
        if body.contains('.') && frac_part.is_empty() && int_part.is_empty() {
            return Err(malformed());
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().map_err(|_| malformed())?;
        let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
        BigRational::new(num, den)
    };
    Ok(Rational(if negative { -value } else { value }))
}

impl FromStr for Rational {
    type Err = NumericError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rational_from_decimal_string(s)
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

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division panics on a zero divisor like the integer types do; use
// `checked_div` where the divisor is not known to be nonzero.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
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
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Accept both "17/2" strings and bare JSON numbers; numbers go through
        // their shortest decimal rendering so 8.5 stays exactly 17/2.
        let value = serde_json::Value::deserialize(deserializer)?;
        let text = match value {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected rational, got {other}"))),
        };
        if text.contains(['e', 'E']) {
            return Err(serde::de::Error::custom(format!("exponent notation not supported: {text}")));
        }
        rational_from_decimal_string(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("8.5"), Rational::new(17, 2).unwrap());
        assert_eq!(q("-0.25"), Rational::new(-1, 4).unwrap());
        assert_eq!(q("34/3"), Rational::new(34, 3).unwrap());
        assert_eq!(q("+7"), Rational::from(7));
        assert_eq!(q(".5"), Rational::new(1, 2).unwrap());
        assert_eq!(q("3."), Rational::from(3));
        assert_eq!(q("-6/4"), Rational::new(-3, 2).unwrap());
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "-", "1.2.3", "abc", "1/", "/2", "1e3", "--1", "1/-2", "."] {
            assert!(rational_from_decimal_string(bad).is_err(), "{bad}");
        }
        assert_eq!(
            rational_from_decimal_string("3/0"),
            Err(NumericError::ZeroDenominator("3/0".into()))
        );
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(q("17/2") + q("1/2"), Rational::from(9));
        assert_eq!((q("123") - q("40")).checked_div(&q("10")).unwrap(), q("83/10"));
        assert_eq!(q("34/3") * q("3"), Rational::from(34));
        assert_eq!(q("1").checked_div(&Rational::zero()), Err(NumericError::DivisionByZero));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(q("8.50").to_string(), "17/2");
        assert_eq!(q("-4/2").to_string(), "-2");
    }

    #[test]
    fn json_numbers_are_exact() {
        let r: Rational = serde_json::from_str("8.5").unwrap();
        assert_eq!(r, q("17/2"));
        let r: Rational = serde_json::from_str("0.1").unwrap();
        assert_eq!(r, q("1/10"));
        let r: Rational = serde_json::from_str("\"-34/3\"").unwrap();
        assert_eq!(r, q("-34/3"));
        assert_eq!(serde_json::to_string(&q("17/2")).unwrap(), "\"17/2\"");
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-10_000i64..10_000, 1i64..500).prop_map(|(n, d)| Rational::new(n, d).unwrap())
    }

    fn canonical(r: &Rational) -> bool {
        r.denom().is_positive() && r.numer().gcd(r.denom()) == BigInt::one()
    }

    proptest! {
        #[test]
        fn canonical_form_is_closed(a in arb_rational(), b in arb_rational()) {
            prop_assert!(canonical(&(&a + &b)));
            prop_assert!(canonical(&(&a - &b)));
            prop_assert!(canonical(&(&a * &b)));
            if !b.is_zero() {
                prop_assert!(canonical(&a.checked_div(&b).unwrap()));
            }
        }

        #[test]
        fn field_axioms(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!((&a + &b) + c.clone(), a.clone() + (&b + &c));
            prop_assert_eq!((&a * &b) * c.clone(), a.clone() * (&b * &c));
            prop_assert_eq!(&a * &(&b + &c), (&a * &b) + (&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn format_then_parse_round_trips(a in arb_rational()) {
            prop_assert_eq!(rational_from_decimal_string(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn decimal_expansion_is_exact(int in -1000i64..1000, frac in 0u32..1000) {
            let text = format!("{int}.{frac:03}");
            let expected = if text.starts_with('-') {
                Rational::from(int) - Rational::new(frac, 1000).unwrap()
            } else {
                Rational::from(int) + Rational::new(frac, 1000).unwrap()
            };
            prop_assert_eq!(q(&text), expected);
        }
    }
}
