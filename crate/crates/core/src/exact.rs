//! Exact rational numbers.
//!
//! Every valuation, price, MBB ratio and price-rise rate in the solver is an
//! [`Exact`]. The wrapper keeps values in lowest terms with a positive
//! denominator and serializes as the canonical string `"p/q"`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An arbitrary-precision rational in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exact(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational number")]
pub struct ParseExactError {
    input: String,
}

impl Exact {
    pub fn zero() -> Self {
        Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Exact(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`, reduced. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Exact(BigRational::new(num, den))
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

    pub fn recip(&self) -> Self {
        Exact(self.0.recip())
    }

    pub fn pow(&self, exp: u32) -> Self {
        Exact(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// Lossy conversion for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big_rational(self) -> BigRational {
        self.0
    }
}

impl From<BigRational> for Exact {
    fn from(value: BigRational) -> Self {
        Exact(value)
    }
}

impl From<i64> for Exact {
    fn from(value: i64) -> Self {
        Exact::from_integer(value)
    }
}

impl From<BigInt> for Exact {
    fn from(value: BigInt) -> Self {
        Exact(BigRational::from_integer(value))
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Exact {
    type Err = ParseExactError;

    /// Accepts `"p"` or `"p/q"` with optional surrounding whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseExactError { input: s.to_string() };
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| err())?;
        let den: BigInt = den.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Exact(BigRational::new(num, den)))
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExactVisitor;

        impl<'de> Visitor<'de> for ExactVisitor {
            type Value = Exact;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact::from(BigInt::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
                Err(E::custom(format!("floating-point value {v} not accepted; write it as \"p/q\"")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExactVisitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                Exact((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Exact> for &Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                Exact((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Exact> for &Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl<'a> AddAssign<&'a Exact> for Exact {
    fn add_assign(&mut self, rhs: &'a Exact) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Exact> for Exact {
    fn add_assign(&mut self, rhs: Exact) {
        self.0 += rhs.0;
    }
}

impl<'a> SubAssign<&'a Exact> for Exact {
    fn sub_assign(&mut self, rhs: &'a Exact) {
        self.0 -= &rhs.0;
    }
}

impl<'a> MulAssign<&'a Exact> for Exact {
    fn mul_assign(&mut self, rhs: &'a Exact) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact(-self.0)
    }
}

impl Sum for Exact {
    fn sum<I: Iterator<Item = Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Exact> for Exact {
    fn sum<I: Iterator<Item = &'a Exact>>(iter: I) -> Exact {
        iter.fold(Exact::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!("6".parse::<Exact>().unwrap(), Exact::from_integer(6));
        assert_eq!("10/4".parse::<Exact>().unwrap(), Exact::ratio(5, 2));
        assert_eq!(" -3 / 9 ".parse::<Exact>().unwrap(), Exact::ratio(-1, 3));
        assert!("1/0".parse::<Exact>().is_err());
        assert!("abc".parse::<Exact>().is_err());
        assert!("1.5".parse::<Exact>().is_err());
    }

    #[test]
    fn displays_canonical_form() {
        assert_eq!(Exact::ratio(10, -4).to_string(), "-5/2");
        assert_eq!(Exact::from_integer(7).to_string(), "7/1");
        assert_eq!(Exact::zero().to_string(), "0/1");
    }

    #[test]
    fn serde_accepts_numbers_and_strings() {
        let v: Vec<Exact> = serde_json::from_str(r#"[3, "35/4", "2"]"#).unwrap();
        assert_eq!(v, vec![Exact::from_integer(3), Exact::ratio(35, 4), Exact::from_integer(2)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["3/1","35/4","2/1"]"#);
        assert!(serde_json::from_str::<Exact>("1.5").is_err());
    }

    fn big_operand() -> impl Strategy<Value = Exact> {
        (any::<i128>(), any::<i128>(), 1u64..u64::MAX).prop_map(|(a, b, d)| {
            let num = BigInt::from(a) * BigInt::from(b);
            Exact::from_bigints(num, BigInt::from(d))
        })
    }

    proptest! {
        #[test]
        fn add_then_sub_round_trips(x in big_operand(), y in big_operand()) {
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert_eq!(x.to_string().parse::<Exact>().unwrap(), x);
        }

        #[test]
        fn mul_then_div_round_trips(x in big_operand(), y in big_operand()) {
            prop_assume!(!y.is_zero());
            prop_assert_eq!(&(&x * &y) / &y, x);
        }
    }
}
