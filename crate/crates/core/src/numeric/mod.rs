//! Scalar abstraction shared by the float and fixed-point engines.
//!
//! The curve algorithms only need the four basic operations, comparisons,
//! a square root and a handful of directed-rounding variants. Directed
//! rounding matters only in fixed point, where it is used to keep the
//! reserve on the safe side of every truncation; in `f64` the `_up`
//! variants are the plain operations.

mod counted;
mod fixed;

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

pub use counted::{measure, Counted, OpCount};
pub use fixed::Fixed18;

use crate::error::{PammError, Result};

pub trait Scalar:
    Copy
    + Debug
    + Display
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
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// Exact rational constant where representable (`1/2`, `1/4`).
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn parse_decimal(s: &str) -> Result<Self>;
    fn to_decimal(self) -> String;

    /// Square root rounded down (toward zero).
    fn sqrt(self) -> Self;
    /// Square root rounded up.
    fn sqrt_up(self) -> Self;
    /// Product rounded toward `+inf`.
    fn mul_up(self, rhs: Self) -> Self;
    /// Quotient rounded toward `+inf`.
    fn div_up(self, rhs: Self) -> Self;

    /// Clamp a discriminant that is negative only through rounding.
    ///
    /// Returns `None` when the value is negative beyond rounding noise;
    /// `magnitude` is the size of the terms whose difference produced it.
    fn clamp_radicand(self, magnitude: Self) -> Option<Self>;

    /// Absolute tolerance for re-verifying stored constants of order one.
    fn verify_tolerance() -> Self;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn parse_decimal(s: &str) -> Result<Self> {
        let v = f64::from_str(s.trim()).map_err(|e| PammError::Parse(format!("{s:?}: {e}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PammError::Parse(format!("{s:?}: not a finite number")))
        }
    }
    fn to_decimal(self) -> String {
        // shortest representation that round-trips
        format!("{self}")
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sqrt_up(self) -> Self {
        f64::sqrt(self)
    }
    fn mul_up(self, rhs: Self) -> Self {
        self * rhs
    }
    fn div_up(self, rhs: Self) -> Self {
        self / rhs
    }
    fn clamp_radicand(self, magnitude: Self) -> Option<Self> {
        if self >= 0.0 {
            Some(self)
        } else if self >= -8.0 * f64::EPSILON * magnitude.abs().max(f64::MIN_POSITIVE) {
            Some(0.0)
        } else {
            None
        }
    }
    fn verify_tolerance() -> Self {
        1e-12
    }
}

/// Which scalar engine a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumericMode {
    /// IEEE-754 binary64.
    Float,
    /// Decimal with [`Fixed18::DIGITS`] fractional digits; payouts round toward zero.
    #[default]
    Fixed,
}

impl FromStr for NumericMode {
    type Err = PammError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Self::Float),
            "fixed" => Ok(Self::Fixed),
            other => Err(PammError::Parse(format!("unknown numeric mode {other:?}"))),
        }
    }
}

impl Display for NumericMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Float => "float",
            Self::Fixed => "fixed",
        })
    }
}
