use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use ethnum::{I256, U256};

use super::Scalar;
use crate::error::{PammError, Result};

const SCALE: i128 = 1_000_000_000_000_000_000;

/// Signed decimal fixed point with 18 fractional digits on an `i128`.
///
/// `*` and `/` truncate toward zero; [`Scalar::mul_up`] and
/// [`Scalar::div_up`] round toward `+inf`. Products and quotients use a
/// 256-bit intermediate, so they are exact before the final rounding.
/// Overflow of the `i128` range panics.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed18(i128);

impl Fixed18 {
    pub const DIGITS: u32 = 18;
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(SCALE);
    /// One unit in the last place.
    pub const ULP: Self = Self(1);

    pub const fn from_raw(raw: i128) -> Self {
        Self(raw)
    }

    pub const fn raw(self) -> i128 {
        self.0
    }

    fn narrow(v: I256, op: &str) -> Self {
        match i128::try_from(v) {
            Ok(raw) => Self(raw),
            Err(_) => panic!("Fixed18 overflow in {op}"),
        }
    }

    fn mul_parts(self, rhs: Self) -> (I256, I256) {
        let p = I256::from(self.0) * I256::from(rhs.0);
        let scale = I256::from(SCALE);
        (p / scale, p % scale)
    }

    fn div_parts(self, rhs: Self) -> (I256, I256, bool) {
        assert!(rhs.0 != 0, "Fixed18 division by zero");
        let n = I256::from(self.0) * I256::from(SCALE);
        let d = I256::from(rhs.0);
        (n / d, n % d, (n >= 0) == (d > 0))
    }

    /// `floor(sqrt(n))` by Newton iteration from an overestimate.
    fn isqrt(n: U256) -> U256 {
        if n < 2 {
            return n;
        }
        let bits = 256 - n.leading_zeros();
        let mut x = U256::ONE << bits.div_ceil(2);
        loop {
            let y = (x + n / x) >> 1;
            if y >= x {
                return x;
            }
            x = y;
        }
    }

    fn sqrt_parts(self) -> (U256, bool) {
        assert!(self.0 >= 0, "Fixed18 sqrt of negative value {self}");
        let n = U256::from(self.0 as u128) * U256::from(SCALE as u128);
        let s = Self::isqrt(n);
        (s, s * s != n)
    }
}

impl Add for Fixed18 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0.checked_add(rhs.0).expect("Fixed18 overflow in add"))
    }
}

impl Sub for Fixed18 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0.checked_sub(rhs.0).expect("Fixed18 overflow in sub"))
    }
}

impl Mul for Fixed18 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::narrow(self.mul_parts(rhs).0, "mul")
    }
}

impl Div for Fixed18 {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::narrow(self.div_parts(rhs).0, "div")
    }
}

impl Neg for Fixed18 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for Fixed18 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let mag = self.0.unsigned_abs();
        let int = mag / SCALE as u128;
        let frac = mag % SCALE as u128;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:018}");
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl fmt::Debug for Fixed18 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed18({self})")
    }
}

impl std::str::FromStr for Fixed18 {
    type Err = PammError;

    fn from_str(s: &str) -> Result<Self> {
        let err = |why: &str| PammError::Parse(format!("{s:?}: {why}"));
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err("empty number"));
        }
        if !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
            return Err(err("expected a plain decimal number"));
        }
        if frac.len() > Self::DIGITS as usize {
            return Err(err("more than 18 fractional digits"));
        }
        let int_val: i128 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| err("integer part out of range"))?
        };
        let frac_val: i128 = if frac.is_empty() {
            0
        } else {
            let padded = format!("{frac:0<18}");
            padded.parse().map_err(|_| err("bad fraction"))?
        };
        let raw = int_val
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| err("out of range"))?;
        Ok(Self(if neg { -raw } else { raw }))
    }
}

impl Scalar for Fixed18 {
    fn zero() -> Self {
        Self::ZERO
    }
    fn one() -> Self {
        Self::ONE
    }
    fn from_int(n: i64) -> Self {
        Self(n as i128 * SCALE)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
    fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "Fixed18::from_f64 of non-finite {v}");
        // shortest round-trip decimal, truncated to 18 fractional digits
        let mut s = format!("{v}");
        if let Some(dot) = s.find('.') {
            s.truncate((dot + 1 + Self::DIGITS as usize).min(s.len()));
        }
        s.parse().unwrap_or_else(|e| panic!("Fixed18::from_f64({v}): {e}"))
    }
    fn to_f64(self) -> f64 {
        self.to_string().parse().expect("decimal string is a valid f64")
    }
    fn parse_decimal(s: &str) -> Result<Self> {
        s.parse()
    }
    fn to_decimal(self) -> String {
        self.to_string()
    }
    fn sqrt(self) -> Self {
        let (s, _) = self.sqrt_parts();
        Self(s.as_i128())
    }
    fn sqrt_up(self) -> Self {
        let (s, inexact) = self.sqrt_parts();
        Self(s.as_i128() + i128::from(inexact))
    }
    fn mul_up(self, rhs: Self) -> Self {
        let (q, r) = self.mul_parts(rhs);
        Self::narrow(if r > 0 { q + 1 } else { q }, "mul_up")
    }
    fn div_up(self, rhs: Self) -> Self {
        let (q, r, positive) = self.div_parts(rhs);
        Self::narrow(if r != 0 && positive { q + 1 } else { q }, "div_up")
    }
    fn clamp_radicand(self, _magnitude: Self) -> Option<Self> {
        match self.0.cmp(&0) {
            Ordering::Less if self.0 >= -2 => Some(Self::ZERO),
            Ordering::Less => None,
            _ => Some(self),
        }
    }
    fn verify_tolerance() -> Self {
        Self(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(s: &str) -> Fixed18 {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(fx("0.396").to_string(), "0.396");
        assert_eq!(fx("-1.50").to_string(), "-1.5");
        assert_eq!(fx("12").to_string(), "12");
        assert_eq!(fx(".5").to_string(), "0.5");
        assert_eq!(fx("0.000000000000000001"), Fixed18::ULP);
        assert!("0.0000000000000000001".parse::<Fixed18>().is_err());
        assert!("1e3".parse::<Fixed18>().is_err());
        assert!("".parse::<Fixed18>().is_err());
        assert!("-".parse::<Fixed18>().is_err());
    }

    #[test]
    fn products_truncate_toward_zero() {
        let third = Fixed18::one() / Fixed18::from_int(3);
        assert_eq!(third.to_string(), "0.333333333333333333");
        assert_eq!((-Fixed18::one() / Fixed18::from_int(3)).to_string(), "-0.333333333333333333");
        assert_eq!(Fixed18::one().div_up(Fixed18::from_int(3)).to_string(), "0.333333333333333334");
        let a = fx("0.000000000000000003");
        let h = fx("0.5");
        assert_eq!(a * h, fx("0.000000000000000001"));
        assert_eq!(a.mul_up(h), fx("0.000000000000000002"));
        assert_eq!(fx("0.4") * fx("0.01"), fx("0.004"));
    }

    #[test]
    fn wide_intermediates_do_not_overflow() {
        let big = fx("10000000000");
        assert_eq!(big * big / big, big);
        assert_eq!((big * big).to_string(), "100000000000000000000");
        let tiny = fx("0.000000001");
        assert_eq!((big * tiny) / tiny, big);
    }

    #[test]
    fn sqrt_is_within_one_ulp() {
        assert_eq!(fx("0.25").sqrt(), fx("0.5"));
        assert_eq!(fx("0.25").sqrt_up(), fx("0.5"));
        let two = Fixed18::from_int(2);
        let lo = two.sqrt();
        let hi = two.sqrt_up();
        assert_eq!(lo.to_string(), "1.414213562373095048");
        assert_eq!(hi.raw() - lo.raw(), 1);
        assert!(lo.mul_up(lo) <= two || lo * lo <= two);
        assert!(hi * hi >= two || hi.mul_up(hi) >= two);
        assert_eq!(Fixed18::ZERO.sqrt(), Fixed18::ZERO);
    }

    #[test]
    fn radicand_clamp_allows_two_ulp() {
        let z = Fixed18::one();
        assert_eq!(Fixed18::from_raw(-2).clamp_radicand(z), Some(Fixed18::ZERO));
        assert_eq!(Fixed18::from_raw(-3).clamp_radicand(z), None);
        assert_eq!(Fixed18::from_raw(7).clamp_radicand(z), Some(Fixed18::from_raw(7)));
    }

    #[test]
    fn f64_conversions() {
        assert_eq!(Fixed18::from_f64(0.9), fx("0.9"));
        assert_eq!(fx("0.396").to_f64(), 0.396);
        assert_eq!(Fixed18::from_f64(1e-20), Fixed18::ZERO);
        assert_eq!(Fixed18::from_f64(-2.5), fx("-2.5"));
    }
}
