//! Exact rational scalars used for instance data and the reformulation.
//!
//! Buffer feasibility is decided by integer floor/ceil of rational expressions,
//! so instance arithmetic must not lose precision. `Real` wraps an
//! arbitrary-precision rational and accepts three input forms: integers,
//! decimal literals (recovered exactly, `0.1` becomes 1/10) and `"p/q"`
//! strings for values with no finite decimal expansion.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Real(BigRational);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid real literal {literal:?}: {reason}")]
pub struct ParseRealError {
    pub literal: String,
    pub reason: String,
}

impl Real {
    pub fn zero() -> Self {
        Real(BigRational::zero())
    }

    pub fn one() -> Self {
        Real(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Real(BigRational::from_integer(BigInt::from(v)))
    }

    /// Exact ratio p/q; panics if q = 0.
    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Real(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Floor to an integer, treating values within `tol` of an integer as that
    /// integer. Keeps float-free pipelines honest when inputs carry tiny
    /// representation error.
    pub fn snapped_floor(&self, tol: &Real) -> BigInt {
        let nearest = self.0.round();
        if (&self.0 - &nearest).abs() <= tol.0 {
            nearest.to_integer()
        } else {
            self.0.floor().to_integer()
        }
    }

    /// Ceiling counterpart of [`Real::snapped_floor`].
    pub fn snapped_ceil(&self, tol: &Real) -> BigInt {
        let nearest = self.0.round();
        if (&self.0 - &nearest).abs() <= tol.0 {
            nearest.to_integer()
        } else {
            self.0.ceil().to_integer()
        }
    }

    fn from_decimal_str(s: &str) -> Result<Self, ParseRealError> {
        let err = |reason: &str| ParseRealError {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s.trim();
        if body.is_empty() {
            return Err(err("empty"));
        }
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(pos) => {
                let exp: i64 = body[pos + 1..]
                    .parse()
                    .map_err(|_| err("bad exponent"))?;
                (&body[..pos], exp)
            }
            None => (body, 0),
        };
        let (sign, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err("non-digit in mantissa"));
        }
        let all_digits: String = [int_part, frac_part].concat();
        let numer: BigInt = all_digits.parse().map_err(|_| err("mantissa overflow"))?;
        let shift = exponent - frac_part.len() as i64;
        if shift.unsigned_abs() > 10_000 {
            return Err(err("exponent out of range"));
        }
        let scale = BigInt::from(10).pow(shift.unsigned_abs() as u32);
        let value = if shift >= 0 {
            BigRational::from_integer(numer * scale)
        } else {
            BigRational::new(numer, scale)
        };
        Ok(Real(BigRational::from_integer(BigInt::from(sign)) * value))
    }
}

impl FromStr for Real {
    type Err = ParseRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim();
        if let Some((p, q)) = body.split_once('/') {
            let err = |reason: &str| ParseRealError {
                literal: s.to_string(),
                reason: reason.to_string(),
            };
            let numer: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
            let denom: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
            if denom.is_zero() {
                return Err(err("zero denominator"));
            }
            Ok(Real(BigRational::new(numer, denom)))
        } else {
            Real::from_decimal_str(body)
        }
    }
}

impl fmt::Display for Real {
    /// Canonical text form: integers plain, finite decimal expansions as
    /// decimals, everything else as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            return write!(f, "{}", self.0.numer());
        }
        let denom = self.0.denom();
        let mut rest = denom.clone();
        let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
        let mut twos = 0u32;
        let mut fives = 0u32;
        while (&rest % &two).is_zero() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if rest.is_one() {
            let places = twos.max(fives);
            let scaled = (self.0.numer() * ten.pow(places)) / denom;
            let digits = scaled.abs().to_string();
            let sign = if scaled.is_negative() { "-" } else { "" };
            let places = places as usize;
            let padded = format!("{digits:0>width$}", width = places + 1);
            let split = padded.len() - places;
            write!(f, "{sign}{}.{}", &padded[..split], &padded[split..])
        } else {
            write!(f, "{}/{}", self.0.numer(), denom)
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({self})")
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(v) = self.0.numer().to_i64() {
                return serializer.serialize_i64(v);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RealVisitor;

        impl de::Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal/\"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real::from_int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                // Shortest round-trip text of an f64 recovers the decimal the
                // author wrote for typical literals, so 0.1 parses to 1/10.
                Real::from_decimal_str(&v.to_string()).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RealVisitor)
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$method(&rhs.0))
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-&self.0)
    }
}

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Real> for Real {
    fn sub_assign(&mut self, rhs: &Real) {
        self.0 -= &rhs.0;
    }
}

impl PartialEq<i64> for Real {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Real {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0
            .partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

/// True when `v` lies within `tol` of an integer.
pub fn near_integer(v: f64, tol: f64) -> bool {
    (v - v.round()).abs() <= tol
}

/// Floor that treats values within `tol` of an integer as that integer.
pub fn snapped_floor(v: f64, tol: f64) -> f64 {
    if near_integer(v, tol) {
        v.round()
    } else {
        v.floor()
    }
}

/// Ceiling counterpart of [`snapped_floor`].
pub fn snapped_ceil(v: f64, tol: f64) -> f64 {
    if near_integer(v, tol) {
        v.round()
    } else {
        v.ceil()
    }
}
