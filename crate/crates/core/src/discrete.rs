//! The simplified discontinuous curve: price one up to `x_u`, then a
//! single drop to the ratio `r_u` that the remaining reserve sustains.
//!
//! The piecewise conditions are oriented so that the price is one for
//! `x <= x_u`, the only orientation under which the reserve is
//! non-increasing and continuous at `x_u`.

use crate::curve::{CurvePoint, Segment};
use crate::error::{PammError, Result};
use crate::numeric::{measure, Counted, Scalar};
use crate::reconstruct::{check_amount, Quote, QuoteRegion};
use crate::region::Minor;
use crate::state::{normalize_state, AnchorPoint, StaticParams, SystemState};

/// Length of the price-one segment: `min(xu_bar, max(0, y_a (r_a - theta_bar) / (1 - theta_bar)))`.
///
/// `xu_bar` is absolute; any value `>= y_a` leaves the floor as the only limit.
pub fn discrete_xu<S: Scalar>(anchor: &AnchorPoint<S>, theta_bar: S, xu_bar: S) -> S {
    if anchor.b_a >= anchor.y_a {
        return anchor.y_a;
    }
    let cushion = anchor.b_a - theta_bar.mul_up(anchor.y_a);
    let xu_hat = if cushion > S::zero() {
        cushion / (S::one() - theta_bar)
    } else {
        S::zero()
    };
    xu_hat.min_of(xu_bar).min_of(anchor.y_a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteSpec<S = f64> {
    pub anchor: AnchorPoint<S>,
    pub x_u: S,
    /// Price after the drop.
    pub r_u: S,
}

impl<S: Scalar> DiscreteSpec<S> {
    pub fn new(anchor: AnchorPoint<S>, statics: &StaticParams<S>) -> Self {
        Self::with_cap(anchor, statics.theta_bar, statics.xu_bar(anchor.y_a))
    }

    pub fn with_cap(anchor: AnchorPoint<S>, theta_bar: S, xu_bar: S) -> Self {
        let x_u = discrete_xu(&anchor, theta_bar, xu_bar);
        let r_u = if x_u >= anchor.y_a {
            S::one()
        } else {
            (anchor.b_a - x_u) / (anchor.y_a - x_u)
        };
        Self { anchor, x_u, r_u }
    }

    fn check_range(&self, x: S) -> Result<()> {
        if x >= S::zero() && x <= self.anchor.y_a {
            Ok(())
        } else {
            Err(PammError::OutOfRange {
                what: "redemption level",
                value: x.to_f64(),
                lo: 0.0,
                hi: self.anchor.y_a.to_f64(),
            })
        }
    }

    pub fn segment_at(&self, x: S) -> Result<Segment> {
        self.check_range(x)?;
        Ok(if x <= self.x_u { Segment::Flat } else { Segment::Ratio })
    }

    pub fn price_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        Ok(if x <= self.x_u { S::one() } else { self.r_u })
    }

    /// `b_a - x` up to `x_u`, then `b_a - x_u - r_u (x - x_u)`.
    ///
    /// The second piece is evaluated as `(b_a - x_u)(y_a - x) / (y_a - x_u)`,
    /// which is the same quantity and vanishes exactly at `x = y_a`.
    pub fn reserve_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        let AnchorPoint { b_a, y_a } = self.anchor;
        Ok(if x <= self.x_u {
            b_a - x
        } else {
            ((b_a - self.x_u) * (y_a - x)).div_up(y_a - self.x_u)
        })
    }

    pub fn ratio_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        let y_a = self.anchor.y_a;
        Ok(if x > self.x_u || x == y_a {
            self.r_u
        } else {
            (self.anchor.b_a - x) / (y_a - x)
        })
    }

    /// `samples` evenly spaced points from `from` to `y_a`.
    pub fn sample(&self, from: S, samples: usize) -> Result<Vec<CurvePoint<S>>> {
        if samples < 2 {
            return Err(PammError::OutOfRange {
                what: "samples",
                value: samples as f64,
                lo: 2.0,
                hi: f64::INFINITY,
            });
        }
        self.check_range(from)?;
        let y_a = self.anchor.y_a;
        let last = S::from_int(samples as i64 - 1);
        (0..samples)
            .map(|i| {
                let x = if i + 1 == samples {
                    y_a
                } else {
                    from + (y_a - from) * S::from_int(i as i64) / last
                };
                Ok(CurvePoint {
                    x,
                    p: self.price_at(x)?,
                    b: self.reserve_at(x)?,
                    r: self.ratio_at(x)?,
                    segment: self.segment_at(x)?,
                })
            })
            .collect()
    }
}

/// Recover the anchor reserve of a normalized state by trial and error.
///
/// First assume the state is still on the price-one segment; if that
/// anchor's segment does not reach `x`, the state is past the drop with the
/// cap binding.
pub fn discrete_reconstruct<S: Scalar>(s: &SystemState<S>, statics: &StaticParams<S>) -> Result<(S, Minor)> {
    let SystemState { x, b, y } = *s;
    if !(b > statics.theta_bar * y && b < y) {
        return Err(PammError::TrivialCurve {
            ratio: (b / y).to_f64(),
            floor: statics.theta_bar.to_f64(),
        });
    }
    let trial = b + x;
    let anchor = AnchorPoint { b_a: trial, y_a: S::one() };
    if x <= discrete_xu(&anchor, statics.theta_bar, statics.xu_bar_norm) {
        return Ok((trial, Minor::Flat));
    }
    let xu_bar = statics.xu_bar_norm;
    let r = b / y;
    Ok((b + xu_bar + r * (x - xu_bar), Minor::Tail))
}

fn discrete_redeem_inner<S: Scalar>(
    s: &SystemState<S>,
    amount: S,
    statics: &StaticParams<S>,
) -> Result<(S, SystemState<S>, QuoteRegion, AnchorPoint<S>)> {
    s.validate()?;
    check_amount(s, amount)?;
    let y_a = s.anchor_supply();
    let x = s.x + amount;
    let y = s.y - amount;
    let (region, anchor, payout) = if s.y.is_zero() {
        (QuoteRegion::Empty, AnchorPoint { b_a: s.b, y_a }, S::zero())
    } else if s.b >= s.y {
        (QuoteRegion::OverReserved, AnchorPoint { b_a: s.b + s.x, y_a }, amount)
    } else if s.b <= statics.theta_bar * s.y {
        let anchor = AnchorPoint {
            b_a: s.b * y_a / s.y,
            y_a,
        };
        (QuoteRegion::UnderFloor, anchor, s.b * amount / s.y)
    } else {
        let (n, scale) = normalize_state(s)?;
        let (b_a, minor) = discrete_reconstruct(&n, statics)?;
        let anchor = AnchorPoint { b_a: b_a * scale, y_a };
        let spec = DiscreteSpec::new(anchor, statics);
        let after = spec.reserve_at(x)?.max_of(S::zero()).min_of(s.b);
        (QuoteRegion::Discrete(minor), anchor, s.b - after)
    };
    let payout = if amount.is_zero() { S::zero() } else { payout };
    Ok((payout, SystemState { x, b: s.b - payout, y }, region, anchor))
}

/// Quote redeeming `amount` on the discrete curve. Uses no square roots.
pub fn discrete_redeem<S: Scalar>(s: &SystemState<S>, amount: S, statics: &StaticParams<S>) -> Result<Quote<S>> {
    let cs = SystemState {
        x: Counted(s.x),
        b: Counted(s.b),
        y: Counted(s.y),
    };
    let cp = StaticParams {
        theta_bar: Counted(statics.theta_bar),
        alpha_bar_norm: Counted(statics.alpha_bar_norm),
        xu_bar_norm: Counted(statics.xu_bar_norm),
    };
    let (out, ops) = measure(|| discrete_redeem_inner(&cs, Counted(amount), &cp));
    let (payout, state, region, anchor) = out?;
    Ok(Quote {
        payout: payout.0,
        state: SystemState {
            x: state.x.0,
            b: state.b.0,
            y: state.y.0,
        },
        region,
        anchor: AnchorPoint {
            b_a: anchor.b_a.0,
            y_a: anchor.y_a.0,
        },
        ops,
    })
}

/// The discrete curve through `s`, for dumping.
pub fn discrete_curve_of_state<S: Scalar>(s: &SystemState<S>, statics: &StaticParams<S>) -> Result<DiscreteSpec<S>> {
    let (_, _, _, anchor) = discrete_redeem_inner(s, S::zero(), statics)?;
    Ok(DiscreteSpec::new(anchor, statics))
}
