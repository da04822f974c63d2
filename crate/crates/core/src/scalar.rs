//! Scalar abstraction shared by every numeric type in the engine.
//!
//! All simplex arithmetic is written once, generically. Auditors, samplers
//! and payment rules instantiate it with exact rationals; divergence and
//! entropy computations instantiate it with floats.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

/// Field-like scalar with a total order on the values we actually produce.
///
/// `Signed` pulls in the ring operations plus `abs`/`signum`, which is
/// everything the preference order and the samplers need.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + Signed + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding anywhere).
    const EXACT: bool;

    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Parses `"a/b"`, plain integers and decimal notation.
    fn parse_literal(s: &str) -> Option<Self>;

    /// Round-trippable text form; rationals keep exact `num/den` strings.
    fn literal(&self) -> String;

    /// Allowed |sum - 1| when validating a distribution.
    fn sum_slack() -> Self;
}

/// Scalars with transcendental functions, for KL/entropy work.
pub trait FloatScalar: Scalar + Float {}

impl FloatScalar for f64 {}
impl FloatScalar for f32 {}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            return Some(n / d);
        }
        s.parse().ok()
    }

    fn literal(&self) -> String {
        format!("{self}")
    }

    fn sum_slack() -> Self {
        1e-6
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f32
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn parse_literal(s: &str) -> Option<Self> {
        f64::parse_literal(s).map(|v| v as f32)
    }

    fn literal(&self) -> String {
        format!("{self}")
    }

    fn sum_slack() -> Self {
        1e-4
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn literal(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn sum_slack() -> Self {
        Zero::zero()
    }
}

/// Exact parse of `"a/b"`, integer, or decimal text into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s),
    };
    let ratio = match body.split_once('.') {
        None => {
            let n: BigInt = body.parse().ok()?;
            BigRational::from_integer(n)
        }
        Some((int_part, frac_part)) => {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let int_part = if int_part.is_empty() { "0" } else { int_part };
            let whole: BigInt = int_part.parse().ok()?;
            let frac: BigInt = frac_part.parse().ok()?;
            let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
            BigRational::new(whole * &scale + frac, scale)
        }
    };
    Some(ratio * BigRational::from_integer(BigInt::from(sign)))
}

/// Exact rational from an `f64` (every finite float is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}
