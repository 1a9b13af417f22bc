//! The continuous three-piece redemption curve.
//!
//! For an anchor `(b_a, y_a)` the marginal redemption price is `1` up to
//! `x_u`, decays linearly with slope `alpha` until it meets the reserve
//! ratio at `x_l`, and stays at `r_l` for the rest of the supply.
//!
//! In fixed point every intermediate that feeds the reserve is rounded so
//! that the reserve comes out high: slopes round up, flat lengths round
//! down and reserve products use [`Scalar::mul_up`]. Payouts are the
//! difference of two reserves and therefore round toward zero.

use std::fmt;

use serde::Serialize;

use crate::error::{PammError, Result};
use crate::numeric::Scalar;
use crate::region::Case;
use crate::state::{AnchorPoint, DynamicParams, StaticParams};

/// Which piece of the curve a redemption level falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Flat,
    Linear,
    Ratio,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Flat => "flat",
            Self::Linear => "linear",
            Self::Ratio => "ratio",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Triviality {
    /// `r_a >= 1`: price is constantly one.
    OverReserved,
    /// `r_a <= theta_bar`: price is constantly `r_a`.
    UnderFloor,
    Regular,
}

/// Result of dynamic-parameter selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveShape<S = f64> {
    OverReserved,
    UnderFloor,
    Regular { case: Case, params: DynamicParams<S> },
}

impl<S: Scalar> CurveShape<S> {
    pub fn triviality(&self) -> Triviality {
        match self {
            Self::OverReserved => Triviality::OverReserved,
            Self::UnderFloor => Triviality::UnderFloor,
            Self::Regular { .. } => Triviality::Regular,
        }
    }

    pub fn params(&self) -> Option<&DynamicParams<S>> {
        match self {
            Self::Regular { params, .. } => Some(params),
            _ => None,
        }
    }

    pub fn case(&self) -> Option<Case> {
        match self {
            Self::Regular { case, .. } => Some(*case),
            _ => None,
        }
    }
}

/// `2 b_a >= (1 + theta_bar) y_a`, the H side of the H/L split.
pub(crate) fn is_high_ratio<S: Scalar>(anchor: &AnchorPoint<S>, theta_bar: S) -> bool {
    anchor.b_a + anchor.b_a >= (S::one() + theta_bar) * anchor.y_a
}

/// `alpha * deficit <= theta^2 / 2`, the h side of the h/l split.
pub(crate) fn is_high_slope_branch<S: Scalar>(alpha: S, anchor: &AnchorPoint<S>, theta: S) -> bool {
    alpha * anchor.deficit() <= S::half() * theta * theta
}

/// Smallest slope that admits a curve with no flat segment.
pub fn compute_alpha_hat<S: Scalar>(anchor: &AnchorPoint<S>, theta_bar: S) -> Result<S> {
    anchor.require_regular(theta_bar)?;
    Ok(alpha_hat_unchecked(anchor, theta_bar))
}

fn alpha_hat_unchecked<S: Scalar>(anchor: &AnchorPoint<S>, theta_bar: S) -> S {
    let theta = S::one() - theta_bar;
    if is_high_ratio(anchor, theta_bar) {
        let two_deficit = anchor.deficit() + anchor.deficit();
        two_deficit.div_up(anchor.y_a * anchor.y_a)
    } else {
        let cushion = anchor.b_a - theta_bar.mul_up(anchor.y_a);
        (theta.mul_up(theta)).div_up(cushion + cushion)
    }
}

/// Longest flat segment compatible with slope `alpha`.
pub fn compute_xu_hat<S: Scalar>(alpha: S, anchor: &AnchorPoint<S>, theta_bar: S) -> Result<S> {
    anchor.require_regular(theta_bar)?;
    let theta = S::one() - theta_bar;
    let x = xu_hat_unchecked(alpha, anchor, theta);
    match x.clamp_radicand(anchor.y_a) {
        Some(x) => Ok(x.min_of(anchor.y_a)),
        None => Err(PammError::SlopeTooSmall {
            alpha: alpha.to_f64(),
            alpha_hat: alpha_hat_unchecked(anchor, theta_bar).to_f64(),
        }),
    }
}

fn xu_hat_unchecked<S: Scalar>(alpha: S, anchor: &AnchorPoint<S>, theta: S) -> S {
    if is_high_slope_branch(alpha, anchor, theta) {
        xu_hat_high(alpha, anchor)
    } else {
        xu_hat_low(alpha, anchor, theta)
    }
}

fn xu_hat_high<S: Scalar>(alpha: S, anchor: &AnchorPoint<S>) -> S {
    let d = anchor.deficit();
    anchor.y_a - (d + d).div_up(alpha).sqrt_up()
}

fn xu_hat_low<S: Scalar>(alpha: S, anchor: &AnchorPoint<S>, theta: S) -> S {
    anchor.y_a - anchor.deficit().div_up(theta) - theta.div_up(alpha + alpha)
}

/// Point where the decaying price meets the reserve ratio, and the ratio there.
pub fn compute_xl<S: Scalar>(alpha: S, x_u: S, anchor: &AnchorPoint<S>) -> Result<(S, S)> {
    let (x_l, r_l, _) = xl_with_radicand(alpha, x_u, anchor)?;
    Ok((x_l, r_l))
}

/// As [`compute_xl`], also returning the (clamped) radicand.
pub(crate) fn xl_with_radicand<S: Scalar>(alpha: S, x_u: S, anchor: &AnchorPoint<S>) -> Result<(S, S, S)> {
    let y_u = anchor.y_a - x_u;
    let y_u2 = y_u * y_u;
    let d = anchor.deficit();
    let raw = y_u2 - (d + d) / alpha;
    let rad = raw.clamp_radicand(y_u2).ok_or(PammError::ReserveExhaustion {
        alpha: alpha.to_f64(),
        required: if y_u.is_zero() {
            f64::INFINITY
        } else {
            ((d + d) / y_u2).to_f64()
        },
    })?;
    let x_l = (anchor.y_a - rad.sqrt_up()).max_of(x_u);
    let r_l = S::one() - alpha * (x_l - x_u);
    Ok((x_l, r_l, rad))
}

/// Whether `r_l >= theta_bar`, decided without the square root.
///
/// True iff `alpha (y_a - x_u) <= theta`, or
/// `alpha (b_a - theta_bar y_a) - alpha theta x_u - theta^2 / 2 >= 0`.
pub fn theta_floor_holds<S: Scalar>(alpha: S, x_u: S, anchor: &AnchorPoint<S>, theta_bar: S) -> bool {
    let theta = S::one() - theta_bar;
    let short = alpha * (anchor.y_a - x_u) <= theta;
    let cushioned = alpha * (anchor.b_a - theta_bar * anchor.y_a) - alpha * theta * x_u - S::half() * theta * theta
        >= S::zero();
    short || cushioned
}

/// Select `alpha = max(alpha_bar, alpha_hat)` and `x_u = min(xu_bar, xu_hat(alpha))`.
pub fn dynamic_params<S: Scalar>(anchor: &AnchorPoint<S>, statics: &StaticParams<S>) -> Result<CurveShape<S>> {
    let theta_bar = statics.theta_bar;
    if anchor.b_a >= anchor.y_a {
        return Ok(CurveShape::OverReserved);
    }
    if anchor.b_a <= theta_bar * anchor.y_a {
        return Ok(CurveShape::UnderFloor);
    }
    let case = classify_case(anchor, statics);
    let params = params_for_case(anchor, statics, case)?;
    Ok(CurveShape::Regular { case, params })
}

/// Major case and its sub-case for a regular anchor.
///
/// At a boundary the earlier case in the order I, II, III wins, as does h
/// over l and H over L.
pub(crate) fn classify_case<S: Scalar>(anchor: &AnchorPoint<S>, statics: &StaticParams<S>) -> Case {
    let theta_bar = statics.theta_bar;
    let theta = statics.theta();
    let alpha_bar = statics.alpha_bar(anchor.y_a);
    let alpha_hat = alpha_hat_unchecked(anchor, theta_bar);
    if alpha_hat > alpha_bar {
        return if is_high_ratio(anchor, theta_bar) {
            Case::IIIH
        } else {
            Case::IIIL
        };
    }
    let xu_hat = xu_hat_unchecked(alpha_bar, anchor, theta);
    if xu_hat >= statics.xu_bar(anchor.y_a) {
        Case::I
    } else if is_high_slope_branch(alpha_bar, anchor, theta) {
        Case::IIh
    } else {
        Case::IIl
    }
}

/// Dynamic parameters when the case is already known.
///
/// Outside case I the decay stop follows from the case without a square
/// root: in II h and III H the decay reaches the end of the supply, in
/// II l and III L it stops exactly at the floor.
pub fn params_for_case<S: Scalar>(
    anchor: &AnchorPoint<S>,
    statics: &StaticParams<S>,
    case: Case,
) -> Result<DynamicParams<S>> {
    anchor.require_regular(statics.theta_bar)?;
    let theta_bar = statics.theta_bar;
    let theta = statics.theta();
    let y_a = anchor.y_a;
    let alpha_bar = statics.alpha_bar(y_a);
    let (alpha, x_u) = match case {
        Case::I => (alpha_bar, statics.xu_bar(y_a)),
        Case::IIh => (alpha_bar, xu_hat_high(alpha_bar, anchor).max_of(S::zero())),
        Case::IIl => (alpha_bar, xu_hat_low(alpha_bar, anchor, theta).max_of(S::zero())),
        Case::IIIH | Case::IIIL => (alpha_hat_unchecked(anchor, theta_bar), S::zero()),
    };
    let (x_l, r_l) = match case {
        Case::I => compute_xl(alpha, x_u, anchor)?,
        Case::IIh | Case::IIIH => (y_a, S::one() - alpha * (y_a - x_u)),
        Case::IIl | Case::IIIL => ((x_u + theta / alpha).min_of(y_a), theta_bar),
    };
    Ok(DynamicParams {
        alpha,
        x_u,
        x_l,
        r_l: r_l.max_of(theta_bar),
    })
}

/// A fully specified curve for one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec<S = f64> {
    pub anchor: AnchorPoint<S>,
    pub statics: StaticParams<S>,
    pub shape: CurveShape<S>,
}

impl<S: Scalar> CurveSpec<S> {
    pub fn new(anchor: AnchorPoint<S>, statics: StaticParams<S>) -> Result<Self> {
        let shape = dynamic_params(&anchor, &statics)?;
        Ok(Self { anchor, statics, shape })
    }

    /// Build the curve for an anchor whose case is already known.
    pub fn with_case(anchor: AnchorPoint<S>, statics: StaticParams<S>, case: Case) -> Result<Self> {
        let params = params_for_case(&anchor, &statics, case)?;
        Ok(Self {
            anchor,
            statics,
            shape: CurveShape::Regular { case, params },
        })
    }

    pub fn triviality(&self) -> Triviality {
        self.shape.triviality()
    }

    pub fn params(&self) -> Option<&DynamicParams<S>> {
        self.shape.params()
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
        Ok(match &self.shape {
            CurveShape::OverReserved => Segment::Flat,
            CurveShape::UnderFloor => Segment::Ratio,
            CurveShape::Regular { params, .. } => segment_of(params, x),
        })
    }

    /// Marginal redemption price at level `x`.
    pub fn price_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        Ok(match &self.shape {
            CurveShape::OverReserved => S::one(),
            CurveShape::UnderFloor => self.anchor.ratio(),
            CurveShape::Regular { params, .. } => match segment_of(params, x) {
                Segment::Flat => S::one(),
                Segment::Linear => S::one() - params.alpha * (x - params.x_u),
                Segment::Ratio => params.r_l,
            },
        })
    }

    /// Reserve left after redeeming up to level `x`.
    pub fn reserve_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        let AnchorPoint { b_a, y_a } = self.anchor;
        Ok(match &self.shape {
            CurveShape::OverReserved => b_a - x,
            CurveShape::UnderFloor => b_a.mul_up(y_a - x).div_up(y_a),
            CurveShape::Regular { params, .. } => match segment_of(params, x) {
                Segment::Flat => b_a - x,
                Segment::Linear => {
                    let d = x - params.x_u;
                    b_a - x + (S::half() * params.alpha).mul_up(d.mul_up(d))
                }
                Segment::Ratio => params.r_l.mul_up(y_a - x),
            },
        })
    }

    /// Price integrated from level `from` to `to`, each piece rounded toward zero.
    pub fn payout_between(&self, from: S, to: S) -> Result<S> {
        self.check_range(from)?;
        self.check_range(to)?;
        if to <= from {
            return Ok(S::zero());
        }
        let span = |lo: S, hi: S| (to.min_of(hi) - from.max_of(lo)).max_of(S::zero());
        let AnchorPoint { b_a, y_a } = self.anchor;
        Ok(match &self.shape {
            CurveShape::OverReserved => to - from,
            CurveShape::UnderFloor => b_a * (to - from) / y_a,
            CurveShape::Regular { params, .. } => {
                let DynamicParams { alpha, x_u, x_l, r_l } = *params;
                let mut paid = span(S::zero(), x_u);
                let decay = span(x_u, x_l);
                if decay > S::zero() {
                    let start = from.max_of(x_u) - x_u;
                    // mean price over the piece
                    let drop = (S::half() * alpha).mul_up(start + start + decay);
                    paid = paid + decay * (S::one() - drop).max_of(S::zero());
                }
                paid + r_l * span(x_l, y_a)
            }
        })
    }

    /// Reserve ratio at level `x`.
    ///
    /// At `x = y_a` no supply is left; the ratio is reported as the limit,
    /// which is the terminal price.
    pub fn ratio_at(&self, x: S) -> Result<S> {
        self.check_range(x)?;
        let y_a = self.anchor.y_a;
        Ok(match &self.shape {
            CurveShape::OverReserved if x == y_a => S::one(),
            CurveShape::OverReserved => (self.anchor.b_a - x) / (y_a - x),
            CurveShape::UnderFloor => self.anchor.ratio(),
            CurveShape::Regular { params, .. } => {
                if x >= params.x_l {
                    params.r_l
                } else {
                    (self.reserve_at(x)? / (y_a - x)).max_of(params.r_l)
                }
            }
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
        let span = self.anchor.y_a - from;
        let last = S::from_int(samples as i64 - 1);
        (0..samples)
            .map(|i| {
                let x = if i + 1 == samples {
                    self.anchor.y_a
                } else {
                    from + span * S::from_int(i as i64) / last
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

fn segment_of<S: Scalar>(params: &DynamicParams<S>, x: S) -> Segment {
    if x <= params.x_u {
        Segment::Flat
    } else if x < params.x_l {
        Segment::Linear
    } else {
        Segment::Ratio
    }
}

/// One row of a curve dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<S = f64> {
    pub x: S,
    pub p: S,
    pub b: S,
    pub r: S,
    pub segment: Segment,
}
