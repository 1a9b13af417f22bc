//! Domain types and the `y_a = 1` normalization layer.

use crate::error::{PammError, Result};
use crate::numeric::Scalar;

/// Governance parameters, expressed for an anchor supply of one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticParams<S = f64> {
    /// Reserve-ratio floor.
    pub theta_bar: S,
    /// Minimum decay slope for `y_a = 1`.
    pub alpha_bar_norm: S,
    /// Maximum length of the flat segment for `y_a = 1`.
    pub xu_bar_norm: S,
}

impl<S: Scalar> StaticParams<S> {
    pub fn new(theta_bar: S, alpha_bar_norm: S, xu_bar_norm: S) -> Result<Self> {
        let p = Self {
            theta_bar,
            alpha_bar_norm,
            xu_bar_norm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (S::zero(), S::one());
        if !(self.theta_bar >= zero && self.theta_bar <= one) {
            return Err(PammError::InvalidParams(format!(
                "theta_bar = {} must lie in [0, 1]",
                self.theta_bar
            )));
        }
        if !(self.alpha_bar_norm > zero) {
            return Err(PammError::InvalidParams(format!(
                "alpha_bar_norm = {} must be positive",
                self.alpha_bar_norm
            )));
        }
        if !(self.xu_bar_norm >= zero && self.xu_bar_norm <= one) {
            return Err(PammError::InvalidParams(format!(
                "xu_bar_norm = {} must lie in [0, 1]",
                self.xu_bar_norm
            )));
        }
        Ok(())
    }

    /// `1 - theta_bar`.
    pub fn theta(&self) -> S {
        S::one() - self.theta_bar
    }

    /// Minimum slope for anchor supply `y_a`.
    pub fn alpha_bar(&self, y_a: S) -> S {
        self.alpha_bar_norm / y_a
    }

    /// Flat-segment cap for anchor supply `y_a`.
    pub fn xu_bar(&self, y_a: S) -> S {
        self.xu_bar_norm * y_a
    }

    /// Re-express in another scalar type through the decimal representation.
    pub fn convert<T: Scalar>(&self) -> Result<StaticParams<T>> {
        StaticParams::new(
            T::parse_decimal(&self.theta_bar.to_decimal())?,
            T::parse_decimal(&self.alpha_bar_norm.to_decimal())?,
            T::parse_decimal(&self.xu_bar_norm.to_decimal())?,
        )
    }
}

/// The persistent protocol state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState<S = f64> {
    /// Redemption level.
    pub x: S,
    /// Reserve value.
    pub b: S,
    /// Outstanding supply.
    pub y: S,
}

impl<S: Scalar> SystemState<S> {
    pub fn new(x: S, b: S, y: S) -> Result<Self> {
        let s = Self { x, b, y };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = S::zero();
        if !(self.x >= zero) || !(self.b >= zero) || !(self.y >= zero) {
            return Err(PammError::InvalidState(format!(
                "components must be non-negative, got ({}, {}, {})",
                self.x, self.b, self.y
            )));
        }
        if !(self.x + self.y > zero) {
            return Err(PammError::EmptySystem);
        }
        Ok(())
    }

    /// `x + y`, the supply at the anchor point.
    pub fn anchor_supply(&self) -> S {
        self.x + self.y
    }

    /// Reserve ratio `b / y`. Requires `y > 0`.
    pub fn ratio(&self) -> S {
        self.b / self.y
    }

    pub fn to_f64(&self) -> SystemState<f64> {
        SystemState {
            x: self.x.to_f64(),
            b: self.b.to_f64(),
            y: self.y.to_f64(),
        }
    }

    pub fn convert<T: Scalar>(&self) -> Result<SystemState<T>> {
        SystemState::new(
            T::parse_decimal(&self.x.to_decimal())?,
            T::parse_decimal(&self.b.to_decimal())?,
            T::parse_decimal(&self.y.to_decimal())?,
        )
    }
}

/// Virtual initial condition that parameterizes a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorPoint<S = f64> {
    pub b_a: S,
    pub y_a: S,
}

impl<S: Scalar> AnchorPoint<S> {
    pub fn new(b_a: S, y_a: S) -> Result<Self> {
        if !(b_a >= S::zero()) {
            return Err(PammError::InvalidState(format!("anchor reserve {b_a} is negative")));
        }
        if !(y_a > S::zero()) {
            return Err(PammError::EmptySystem);
        }
        Ok(Self { b_a, y_a })
    }

    pub fn ratio(&self) -> S {
        self.b_a / self.y_a
    }

    /// `y_a - b_a`.
    pub fn deficit(&self) -> S {
        self.y_a - self.b_a
    }

    /// Strictly inside `(theta_bar, 1)`, compared without dividing.
    pub fn is_regular(&self, theta_bar: S) -> bool {
        self.b_a < self.y_a && self.b_a > theta_bar * self.y_a
    }

    pub(crate) fn require_regular(&self, theta_bar: S) -> Result<()> {
        if self.is_regular(theta_bar) {
            Ok(())
        } else {
            Err(PammError::TrivialCurve {
                ratio: self.ratio().to_f64(),
                floor: theta_bar.to_f64(),
            })
        }
    }
}

/// Curve shape derived from one anchor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicParams<S = f64> {
    pub alpha: S,
    pub x_u: S,
    pub x_l: S,
    pub r_l: S,
}

impl<S: Scalar> DynamicParams<S> {
    /// `y_a - x_u`.
    pub fn flat_remainder(&self, y_a: S) -> S {
        y_a - self.x_u
    }
}

/// Map a state to the `y_a = 1` space; also returns the scale `y_a`.
pub fn normalize_state<S: Scalar>(s: &SystemState<S>) -> Result<(SystemState<S>, S)> {
    let scale = s.anchor_supply();
    if !(scale > S::zero()) {
        return Err(PammError::EmptySystem);
    }
    Ok((
        SystemState {
            x: s.x / scale,
            b: s.b / scale,
            y: s.y / scale,
        },
        scale,
    ))
}

pub fn denormalize_value<S: Scalar>(v: S, scale: S) -> S {
    v * scale
}
