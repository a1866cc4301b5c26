//! Numeric backends.
//!
//! Everything in the crate is generic over [`Scalar`]. Two implementations
//! ship: [`Rational`] (arbitrary precision, every comparison exact) and
//! [`Float`] (an `f64` newtype whose comparisons treat values within a
//! relative tolerance as equal; see [`set_float_tolerance`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact scalar.
pub type Rational = BigRational;

/// Default comparison tolerance used by [`Float`].
pub const FLOAT_TOLERANCE: f64 = 1e-9;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695);

/// Sets the process-wide [`Float`] comparison tolerance.
pub fn set_float_tolerance(tol: f64) {
    assert!(
        tol.is_finite() && tol >= 0.0,
        "tolerance must be finite and non-negative"
    );
    TOLERANCE_BITS.store(tol.to_bits(), AtomicOrdering::Relaxed);
}

/// Current [`Float`] comparison tolerance.
pub fn float_tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(AtomicOrdering::Relaxed))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse scalar {input:?}: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: &'static str,
}

impl ParseScalarError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self {
            input: input.to_string(),
            reason,
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` for exact arithmetic.
    const EXACT: bool;
    /// Mode name as used on the command line.
    const MODE: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;

    /// Tolerance applied by [`Scalar::compare`]; zero for exact types.
    fn tolerance() -> f64;

    /// Three-way comparison honoring the backend tolerance.
    fn compare(&self, other: &Self) -> Ordering;

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError>;

    /// Canonical textual form: `p/q` or `p` for rationals, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String;

    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_zero_tol(&self) -> bool {
        self.compare(&Self::zero()) == Ordering::Equal
    }
    fn is_positive(&self) -> bool {
        self.compare(&Self::zero()) == Ordering::Greater
    }
    fn is_negative(&self) -> bool {
        self.compare(&Self::zero()) == Ordering::Less
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
    fn less_than(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Less
    }
    fn at_most(&self, other: &Self) -> bool {
        self.compare(other) != Ordering::Greater
    }
    fn greater_than(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Greater
    }
    fn at_least(&self, other: &Self) -> bool {
        self.compare(other) != Ordering::Less
    }

    fn max_of(self, other: Self) -> Self {
        if other.greater_than(&self) {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other.less_than(&self) {
            other
        } else {
            self
        }
    }

    /// `2^-k`.
    fn inv_pow2(k: u32) -> Self {
        let den = BigInt::one() << (k as usize);
        Self::from_rational(&BigRational::new(BigInt::one(), den))
    }
}

/// Parses `p/q`, integers and decimals with an optional exponent into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseScalarError::new(s, "empty"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_decimal(num.trim()).map_err(|r| ParseScalarError::new(s, r))?;
        let den = parse_decimal(den.trim()).map_err(|r| ParseScalarError::new(s, r))?;
        if den.is_zero() {
            return Err(ParseScalarError::new(s, "zero denominator"));
        }
        return Ok(num / den);
    }
    parse_decimal(t).map_err(|r| ParseScalarError::new(s, r))
}

fn parse_decimal(t: &str) -> Result<BigRational, &'static str> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| "bad exponent")?;
            if e.abs() > 4096 {
                return Err("exponent out of range");
            }
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err("no digits");
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err("not a rational literal");
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| "bad digits")?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> f64 {
        0.0
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero_tol(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// `f64` with tolerance-aware comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Float(pub f64);

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! float_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Float {
            type Output = Float;
            #[inline]
            fn $method(self, rhs: Float) -> Float {
                Float(self.0 $op rhs.0)
            }
        }
    };
}
float_binop!(Add, add, +);
float_binop!(Sub, sub, -);
float_binop!(Mul, mul, *);
float_binop!(Div, div, /);

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float(-self.0)
    }
}

impl Scalar for Float {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn zero() -> Self {
        Float(0.0)
    }
    fn one() -> Self {
        Float(1.0)
    }
    fn from_int(v: i64) -> Self {
        Float(v as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Float(num as f64 / den as f64)
    }
    fn from_rational(r: &BigRational) -> Self {
        Float(ToPrimitive::to_f64(r).unwrap_or(f64::NAN))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn tolerance() -> f64 {
        float_tolerance()
    }
    fn compare(&self, other: &Self) -> Ordering {
        let scale = 1f64.max(self.0.abs()).max(other.0.abs());
        if (self.0 - other.0).abs() <= float_tolerance() * scale {
            Ordering::Equal
        } else if self.0 < other.0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        let r = parse_rational(s)?;
        Ok(Self::from_rational(&r))
    }
    fn render(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerance_bits() {
        assert_eq!(f64::from_bits(0x3E11_2E0B_E826_D695), FLOAT_TOLERANCE);
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("5/2").unwrap(), q(5, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5E1").unwrap(), q(25, 1));
        assert_eq!(parse_rational(" 17/6 ").unwrap(), q(17, 6));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
    }

    #[test]
    fn rejects_non_rational_literals() {
        for bad in ["", "NaN", "inf", "1/0", "1..2", "0x10", "1/", "abc"] {
            assert!(parse_rational(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn rational_render_is_canonical() {
        assert_eq!(q(10, 4).render(), "5/2");
        assert_eq!(q(6, 3).render(), "2");
        assert_eq!(q(-1, 36).render(), "-1/36");
    }

    #[test]
    fn float_compare_uses_tolerance() {
        let a = Float(1.0);
        assert!(a.approx_eq(&Float(1.0 + 1e-12)));
        assert!(a.less_than(&Float(1.0 + 1e-6)));
        assert!(Float(1e6).approx_eq(&Float(1e6 + 1e-4)));
    }

    #[test]
    fn inverse_powers_of_two() {
        assert_eq!(Rational::inv_pow2(4), q(1, 16));
        assert_eq!(Float::inv_pow2(3), Float(0.125));
    }
}
