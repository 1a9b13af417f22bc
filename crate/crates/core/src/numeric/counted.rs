use std::cell::Cell;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::error::Result;

/// Tally of arithmetic operations and square roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCount {
    pub arith: u64,
    pub sqrt: u64,
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.arith += rhs.arith;
        self.sqrt += rhs.sqrt;
    }
}

thread_local! {
    static TALLY: Cell<OpCount> = const { Cell::new(OpCount { arith: 0, sqrt: 0 }) };
}

fn bump(arith: u64, sqrt: u64) {
    TALLY.with(|t| {
        let mut c = t.get();
        c.arith += arith;
        c.sqrt += sqrt;
        t.set(c);
    });
}

/// Run `f` and return the operations performed on [`Counted`] values inside it.
///
/// Nested calls are allowed; the outer measurement includes the inner one.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCount) {
    let outer = TALLY.with(|t| t.replace(OpCount::default()));
    let out = f();
    let inner = TALLY.with(|t| t.get());
    TALLY.with(|t| {
        let mut total = outer;
        total += inner;
        t.set(total);
    });
    (out, inner)
}

/// A scalar that records every operation it performs.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Counted<S>(pub S);

impl<S: Scalar> Counted<S> {
    pub fn into_inner(self) -> S {
        self.0
    }
}

impl<S: fmt::Debug> fmt::Debug for Counted<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<S: fmt::Display> fmt::Display for Counted<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

macro_rules! counted_binop {
    ($tr:ident, $m:ident) => {
        impl<S: Scalar> $tr for Counted<S> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                bump(1, 0);
                Counted(self.0.$m(rhs.0))
            }
        }
    };
}

counted_binop!(Add, add);
counted_binop!(Sub, sub);
counted_binop!(Mul, mul);
counted_binop!(Div, div);

impl<S: Scalar> Neg for Counted<S> {
    type Output = Self;
    fn neg(self) -> Self {
        bump(1, 0);
        Counted(-self.0)
    }
}

impl<S: Scalar> Scalar for Counted<S> {
    fn zero() -> Self {
        Counted(S::zero())
    }
    fn one() -> Self {
        Counted(S::one())
    }
    fn from_int(n: i64) -> Self {
        Counted(S::from_int(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Counted(S::from_ratio(num, den))
    }
    fn from_f64(v: f64) -> Self {
        Counted(S::from_f64(v))
    }
    fn to_f64(self) -> f64 {
        self.0.to_f64()
    }
    fn parse_decimal(s: &str) -> Result<Self> {
        S::parse_decimal(s).map(Counted)
    }
    fn to_decimal(self) -> String {
        self.0.to_decimal()
    }
    fn sqrt(self) -> Self {
        bump(0, 1);
        Counted(self.0.sqrt())
    }
    fn sqrt_up(self) -> Self {
        bump(0, 1);
        Counted(self.0.sqrt_up())
    }
    fn mul_up(self, rhs: Self) -> Self {
        bump(1, 0);
        Counted(self.0.mul_up(rhs.0))
    }
    fn div_up(self, rhs: Self) -> Self {
        bump(1, 0);
        Counted(self.0.div_up(rhs.0))
    }
    fn clamp_radicand(self, magnitude: Self) -> Option<Self> {
        self.0.clamp_radicand(magnitude.0).map(Counted)
    }
    fn verify_tolerance() -> Self {
        Counted(S::verify_tolerance())
    }
    fn abs(self) -> Self {
        Counted(self.0.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_arith_and_sqrt() {
        let ((), c) = measure(|| {
            let a = Counted(2.0_f64);
            let b = a * a + a;
            let _ = b.sqrt() / a;
            assert!(a < b);
        });
        assert_eq!(c, OpCount { arith: 3, sqrt: 1 });
    }

    #[test]
    fn nested_measurements_accumulate() {
        let (inner, outer) = measure(|| {
            let _ = Counted(1.0_f64) + Counted(1.0);
            let ((), inner) = measure(|| {
                let _ = Counted(4.0_f64).sqrt();
            });
            inner
        });
        assert_eq!(inner, OpCount { arith: 0, sqrt: 1 });
        assert_eq!(outer, OpCount { arith: 1, sqrt: 1 });
    }
}
