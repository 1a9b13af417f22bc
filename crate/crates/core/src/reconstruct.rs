//! Anchor reconstruction from the current state, and redemption quotes.

use std::fmt;

use crate::curve::{CurvePoint, CurveShape, CurveSpec};
use crate::error::{PammError, Result};
use crate::numeric::{measure, Counted, OpCount, Scalar};
use crate::region::{detect_region, Case, Minor, PrecomputedThresholds, Region};
use crate::state::{normalize_state, AnchorPoint, StaticParams, SystemState};

/// Upper bound on arithmetic operations in one continuous quote.
pub const REDEEM_MAX_ARITH: u64 = 96;
/// Upper bound on arithmetic operations in one [`reconstruct_ba`] call.
pub const RECONSTRUCT_MAX_ARITH: u64 = 24;

/// How a quote was priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuoteRegion {
    Continuous(Region),
    /// Discrete curve; `Flat` before the price drop, `Tail` after it.
    Discrete(Minor),
    /// `b / y >= 1`, paid at par.
    OverReserved,
    /// `b / y <= theta_bar`, paid at the current ratio.
    UnderFloor,
    /// No supply outstanding.
    Empty,
}

impl fmt::Display for QuoteRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Continuous(r) => r.fmt(f),
            Self::Discrete(m) => write!(f, "discrete {}", m.label()),
            Self::OverReserved => f.write_str("over-reserved"),
            Self::UnderFloor => f.write_str("under-floor"),
            Self::Empty => f.write_str("empty"),
        }
    }
}

/// Outcome of one redemption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote<S = f64> {
    pub payout: S,
    pub state: SystemState<S>,
    pub region: QuoteRegion,
    pub anchor: AnchorPoint<S>,
    pub ops: OpCount,
}

/// Recover `b_a` on the normalized curve through state `s` in `region`.
///
/// Uses at most one square root.
pub fn reconstruct_ba<S: Scalar>(s: &SystemState<S>, region: Region, statics: &StaticParams<S>) -> Result<S> {
    let SystemState { x, b, y } = *s;
    let one = S::one();
    let alpha = statics.alpha_bar_norm;
    let xu_bar = statics.xu_bar_norm;
    let theta_bar = statics.theta_bar;
    let theta = statics.theta();
    let r = b / y;
    let radicand = |v: S, magnitude: S| {
        v.clamp_radicand(magnitude).ok_or(PammError::NegativeRadicand {
            context: "anchor reconstruction",
            value: v.to_f64(),
        })
    };

    let deficit = match (region.case, region.minor) {
        (_, Minor::Flat) => return Ok(b + x),
        (Case::I, Minor::Decay) => {
            let d = x - xu_bar;
            return Ok(b + x - S::half() * alpha * d * d);
        }
        (Case::I, Minor::Tail) => {
            let gap = one - r;
            return Ok(one - (one - xu_bar) * gap + gap * gap / (alpha + alpha));
        }
        (Case::IIh, Minor::Decay) => {
            let u = (one - r) / alpha + S::half() * y;
            S::half() * alpha * u * u
        }
        (Case::IIl, Minor::Decay) => {
            let p = theta * (theta / (alpha + alpha) + y);
            let d = theta * theta * (S::from_int(2) / alpha) * (b - theta_bar * y);
            p - radicand(d, p * p)?.sqrt()
        }
        (Case::IIIH, Minor::Decay) => (y - b) / (one - x * x),
        (Case::IIIL, Minor::Decay) => {
            let p = S::half() * (y - b + theta);
            let q = (y - b) * theta + S::from_ratio(1, 4) * theta * theta * x * x;
            p - radicand(p * p - q, p * p)?.sqrt()
        }
        (_, Minor::Tail) => {
            return Err(PammError::InconsistentRegion {
                region: region.to_string(),
                detail: "the terminal segment of this case lies on the reserve floor".into(),
            })
        }
    };
    Ok(one - deficit)
}

/// The curve that the state lies on, with the region used to find it.
pub fn reconstruct_curve<S: Scalar>(
    s: &SystemState<S>,
    statics: &StaticParams<S>,
    t: &PrecomputedThresholds<S>,
) -> Result<(CurveSpec<S>, QuoteRegion)> {
    s.validate()?;
    let y_a = s.anchor_supply();
    let trivial = |b_a: S, shape: CurveShape<S>, region| {
        let spec = CurveSpec {
            anchor: AnchorPoint { b_a, y_a },
            statics: *statics,
            shape,
        };
        Ok((spec, region))
    };
    if s.y.is_zero() {
        return trivial(s.b, CurveShape::OverReserved, QuoteRegion::Empty);
    }
    if s.b >= s.y {
        return trivial(s.b + s.x, CurveShape::OverReserved, QuoteRegion::OverReserved);
    }
    if s.b <= statics.theta_bar * s.y {
        return trivial(s.b * y_a / s.y, CurveShape::UnderFloor, QuoteRegion::UnderFloor);
    }
    let (n, scale) = normalize_state(s)?;
    if n.b >= n.y {
        return trivial(s.b + s.x, CurveShape::OverReserved, QuoteRegion::OverReserved);
    }
    if n.b <= statics.theta_bar * n.y {
        return trivial(s.b * y_a / s.y, CurveShape::UnderFloor, QuoteRegion::UnderFloor);
    }
    let region = detect_region(&n, t, statics)?;
    let b_a = reconstruct_ba(&n, region, statics)? * scale;
    let anchor = AnchorPoint { b_a, y_a };
    // only rounding can push the anchor of a regular state out of the band
    if b_a <= statics.theta_bar * y_a {
        return trivial(s.b * y_a / s.y, CurveShape::UnderFloor, QuoteRegion::UnderFloor);
    }
    if b_a >= y_a {
        return trivial(s.b + s.x, CurveShape::OverReserved, QuoteRegion::OverReserved);
    }
    Ok((CurveSpec::with_case(anchor, *statics, region.case)?, QuoteRegion::Continuous(region)))
}

pub(crate) fn check_amount<S: Scalar>(s: &SystemState<S>, amount: S) -> Result<()> {
    if amount < S::zero() {
        return Err(PammError::NegativeAmount(amount.to_f64()));
    }
    if amount > s.y {
        return Err(PammError::InsufficientSupply {
            amount: amount.to_f64(),
            supply: s.y.to_f64(),
        });
    }
    Ok(())
}

fn redeem_inner<S: Scalar>(
    s: &SystemState<S>,
    amount: S,
    statics: &StaticParams<S>,
    t: &PrecomputedThresholds<S>,
) -> Result<(S, SystemState<S>, QuoteRegion, AnchorPoint<S>)> {
    s.validate()?;
    check_amount(s, amount)?;
    let (spec, region) = reconstruct_curve(s, statics, t)?;
    let x = s.x + amount;
    let y = s.y - amount;
    let payout = if amount.is_zero() {
        S::zero()
    } else {
        match region {
            QuoteRegion::OverReserved => amount,
            QuoteRegion::UnderFloor => s.b * amount / s.y,
            _ => spec.payout_between(s.x, x)?.min_of(s.b),
        }
    };
    let state = SystemState { x, b: s.b - payout, y };
    Ok((payout, state, region, spec.anchor))
}

fn counted_statics<S: Scalar>(p: &StaticParams<S>) -> StaticParams<Counted<S>> {
    StaticParams {
        theta_bar: Counted(p.theta_bar),
        alpha_bar_norm: Counted(p.alpha_bar_norm),
        xu_bar_norm: Counted(p.xu_bar_norm),
    }
}

fn counted_state<S: Scalar>(s: &SystemState<S>) -> SystemState<Counted<S>> {
    SystemState {
        x: Counted(s.x),
        b: Counted(s.b),
        y: Counted(s.y),
    }
}

fn counted_thresholds<S: Scalar>(t: &PrecomputedThresholds<S>) -> PrecomputedThresholds<Counted<S>> {
    PrecomputedThresholds {
        ba_I_II: Counted(t.ba_I_II),
        xl_I_II: Counted(t.xl_I_II),
        ba_II_III: Counted(t.ba_II_III),
        ba_h_l: Counted(t.ba_h_l),
        xu_h_l: Counted(t.xu_h_l),
        ba_H_L: Counted(t.ba_H_L),
        alpha_H_L: Counted(t.alpha_H_L),
    }
}

/// Quote redeeming `amount` from `s` on the continuous curve.
pub fn redeem<S: Scalar>(
    s: &SystemState<S>,
    amount: S,
    statics: &StaticParams<S>,
    t: &PrecomputedThresholds<S>,
) -> Result<Quote<S>> {
    let (out, ops) = measure(|| {
        redeem_inner(
            &counted_state(s),
            Counted(amount),
            &counted_statics(statics),
            &counted_thresholds(t),
        )
    });
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

/// Reserve after redeeming `amount`, without instrumentation.
pub fn redeem_uncounted<S: Scalar>(
    s: &SystemState<S>,
    amount: S,
    statics: &StaticParams<S>,
    t: &PrecomputedThresholds<S>,
) -> Result<Quote<S>> {
    let (payout, state, region, anchor) = redeem_inner(s, amount, statics, t)?;
    Ok(Quote {
        payout,
        state,
        region,
        anchor,
        ops: OpCount::default(),
    })
}

/// Sample the curve through `s` from its current level to full redemption.
pub fn quote_curve<S: Scalar>(
    s: &SystemState<S>,
    statics: &StaticParams<S>,
    t: &PrecomputedThresholds<S>,
    samples: usize,
) -> Result<Vec<CurvePoint<S>>> {
    let (spec, _) = reconstruct_curve(s, statics, t)?;
    spec.sample(s.x, samples)
}
