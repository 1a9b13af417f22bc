//! Region taxonomy, threshold precomputation and square-root-free detection.
//!
//! A regular anchor falls into one of three major cases, depending on
//! whether the slope floor `alpha_bar` and the flat-length cap `xu_bar`
//! bind. Case II splits by whether the decay runs to the end of the supply
//! (h) or stops at the reserve floor (l); case III splits the same way (H
//! and L). Along each curve the redemption level is on the flat segment
//! (i), the decay (ii) or the tail (iii).

use std::fmt;
use std::str::FromStr;

use crate::curve::{classify_case, params_for_case};
use crate::error::{PammError, Result};
use crate::numeric::Scalar;
use crate::state::{AnchorPoint, StaticParams, SystemState};

/// Upper bound on arithmetic operations in one [`detect_region`] call.
pub const DETECT_MAX_ARITH: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// Both `alpha_bar` and `xu_bar` bind.
    I,
    /// `alpha_bar` binds, the flat segment is shortened, decay runs to the end.
    IIh,
    /// `alpha_bar` binds, the flat segment is shortened, decay stops at the floor.
    IIl,
    /// No flat segment, slope raised above `alpha_bar`, decay runs to the end.
    IIIH,
    /// No flat segment, slope raised above `alpha_bar`, decay stops at the floor.
    IIIL,
}

impl Case {
    /// 1, 2 or 3.
    pub fn major(self) -> u8 {
        match self {
            Self::I => 1,
            Self::IIh | Self::IIl => 2,
            Self::IIIH | Self::IIIL => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::IIh => "II h",
            Self::IIl => "II l",
            Self::IIIH => "III H",
            Self::IIIL => "III L",
        }
    }

    pub const ALL: [Case; 5] = [Case::I, Case::IIh, Case::IIl, Case::IIIH, Case::IIIL];
}

/// Position along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Minor {
    /// Price is one (i).
    Flat,
    /// Price decays linearly (ii).
    Decay,
    /// Price sits at the terminal ratio (iii).
    Tail,
}

impl Minor {
    pub fn label(self) -> &'static str {
        match self {
            Self::Flat => "i",
            Self::Decay => "ii",
            Self::Tail => "iii",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub case: Case,
    pub minor: Minor,
}

impl Region {
    pub fn new(case: Case, minor: Minor) -> Self {
        Self { case, minor }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.case.label(), self.minor.label())
    }
}

impl FromStr for Region {
    type Err = PammError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s
            .trim()
            .rsplit_once(' ')
            .ok_or_else(|| PammError::Parse(format!("region {s:?}")))?;
        let case = Case::ALL
            .into_iter()
            .find(|c| c.label() == head)
            .ok_or_else(|| PammError::Parse(format!("region case {head:?}")))?;
        let minor = [Minor::Flat, Minor::Decay, Minor::Tail]
            .into_iter()
            .find(|m| m.label() == tail)
            .ok_or_else(|| PammError::Parse(format!("region position {tail:?}")))?;
        Ok(Self { case, minor })
    }
}

/// Anchor reserve (for supply `y_a`) at which the longest admissible flat
/// segment under slope `alpha` has length exactly `z`.
pub fn ba_for_xu_threshold<S: Scalar>(z: S, alpha: S, y_a: S, theta_bar: S) -> S {
    ba_for_xu_branch(z, alpha, y_a, theta_bar).0
}

/// The threshold together with whether the decay-to-end branch applied.
fn ba_for_xu_branch<S: Scalar>(z: S, alpha: S, y_a: S, theta_bar: S) -> (S, bool) {
    let theta = S::one() - theta_bar;
    let y_z = y_a - z;
    if S::one() - alpha * y_z >= theta_bar {
        (y_a - S::half() * alpha * y_z * y_z, true)
    } else {
        (y_a - theta * y_z + theta * theta / (alpha + alpha), false)
    }
}

/// The seven region-boundary constants, for `y_a = 1`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecomputedThresholds<S = f64> {
    /// Anchor reserve separating cases I and II.
    pub ba_I_II: S,
    /// Decay stop of the curve at `ba_I_II`.
    pub xl_I_II: S,
    /// Anchor reserve separating cases II and III.
    pub ba_II_III: S,
    /// Anchor reserve separating II h from II l.
    pub ba_h_l: S,
    /// Flat length of the curve at `ba_h_l`.
    pub xu_h_l: S,
    /// Anchor reserve separating III H from III L.
    pub ba_H_L: S,
    /// Slope of the curve at `ba_H_L`.
    pub alpha_H_L: S,
}

impl<S: Scalar> PrecomputedThresholds<S> {
    /// All seven values in declaration order, with their names.
    pub fn named(&self) -> [(&'static str, S); 7] {
        [
            ("ba_I_II", self.ba_I_II),
            ("xl_I_II", self.xl_I_II),
            ("ba_II_III", self.ba_II_III),
            ("ba_h_l", self.ba_h_l),
            ("xu_h_l", self.xu_h_l),
            ("ba_H_L", self.ba_H_L),
            ("alpha_H_L", self.alpha_H_L),
        ]
    }
}

/// Compute the region thresholds. Uses at most one square root.
pub fn precompute<S: Scalar>(statics: &StaticParams<S>) -> Result<PrecomputedThresholds<S>> {
    statics.validate()?;
    let one = S::one();
    let theta_bar = statics.theta_bar;
    let theta = statics.theta();
    let alpha = statics.alpha_bar_norm;
    let xu_bar = statics.xu_bar_norm;

    let (ba_i_ii, decays_to_end) = ba_for_xu_branch(xu_bar, alpha, one, theta_bar);
    let xl_i_ii = if decays_to_end {
        one
    } else {
        let anchor = AnchorPoint { b_a: ba_i_ii, y_a: one };
        crate::curve::compute_xl(alpha, xu_bar, &anchor)?.0
    };
    let ba_ii_iii = ba_for_xu_threshold(S::zero(), alpha, one, theta_bar);
    let ba_h_l = one - theta * theta / (alpha + alpha);
    let xu_h_l = one - theta / alpha;
    let ba_cap_h_l = (one + theta_bar) * S::half();
    let alpha_cap_h_l = (one - ba_cap_h_l) + (one - ba_cap_h_l);
    Ok(PrecomputedThresholds {
        ba_I_II: ba_i_ii,
        xl_I_II: xl_i_ii,
        ba_II_III: ba_ii_iii,
        ba_h_l,
        xu_h_l,
        ba_H_L: ba_cap_h_l,
        alpha_H_L: alpha_cap_h_l,
    })
}

/// Check every threshold against its defining identity, without square roots.
pub fn verify_precomputed<S: Scalar>(statics: &StaticParams<S>, t: &PrecomputedThresholds<S>) -> bool {
    verification_failures(statics, t).is_empty()
}

/// Names of the thresholds whose identity fails.
pub fn verification_failures<S: Scalar>(statics: &StaticParams<S>, t: &PrecomputedThresholds<S>) -> Vec<&'static str> {
    let mut bad = Vec::new();
    if statics.validate().is_err() {
        return vec!["statics"];
    }
    let one = S::one();
    let tol = S::verify_tolerance();
    let near = |a: S, b: S| (a - b).abs() <= tol;
    let theta_bar = statics.theta_bar;
    let theta = statics.theta();
    let alpha = statics.alpha_bar_norm;
    let xu_bar = statics.xu_bar_norm;

    if !near(t.ba_I_II, ba_for_xu_threshold(xu_bar, alpha, one, theta_bar)) {
        bad.push("ba_I_II");
    }
    // the decay stop is where the decaying price meets the reserve ratio
    let x_l = t.xl_I_II;
    let in_range = x_l >= xu_bar - tol && x_l <= one + tol;
    let d = x_l - xu_bar;
    let reserve = t.ba_I_II - x_l + S::half() * alpha * d * d;
    let price_times_supply = (one - alpha * d) * (one - x_l);
    if !in_range || !near(reserve, price_times_supply) {
        bad.push("xl_I_II");
    }
    if !near(t.ba_II_III, ba_for_xu_threshold(S::zero(), alpha, one, theta_bar)) {
        bad.push("ba_II_III");
    }
    if !near(t.ba_h_l, one - theta * theta / (alpha + alpha)) {
        bad.push("ba_h_l");
    }
    if !near(t.xu_h_l, one - theta / alpha) {
        bad.push("xu_h_l");
    }
    if !near(t.ba_H_L, (one + theta_bar) * S::half()) {
        bad.push("ba_H_L");
    }
    if !near(t.alpha_H_L, (one - t.ba_H_L) + (one - t.ba_H_L)) {
        bad.push("alpha_H_L");
    }
    bad
}

/// Reserve at `x` on a normalized curve given its parameters explicitly.
fn threshold_reserve<S: Scalar>(x: S, b_a: S, alpha: S, x_u: S, x_l: S) -> S {
    if x <= x_u {
        b_a - x
    } else if x <= x_l {
        let d = x - x_u;
        b_a - x + S::half() * alpha * d * d
    } else {
        let r_l = S::one() - alpha * (x_l - x_u);
        r_l * (S::one() - x)
    }
}

/// Region of a regular anchor at redemption level `x`, from the selection rule.
pub fn classify_from_anchor<S: Scalar>(anchor: &AnchorPoint<S>, statics: &StaticParams<S>, x: S) -> Result<Region> {
    anchor.require_regular(statics.theta_bar)?;
    if !(x >= S::zero() && x <= anchor.y_a) {
        return Err(PammError::OutOfRange {
            what: "redemption level",
            value: x.to_f64(),
            lo: 0.0,
            hi: anchor.y_a.to_f64(),
        });
    }
    let case = classify_case(anchor, statics);
    let p = params_for_case(anchor, statics, case)?;
    let minor = if x <= p.x_u {
        Minor::Flat
    } else if x <= p.x_l {
        Minor::Decay
    } else {
        Minor::Tail
    };
    Ok(Region::new(case, minor))
}

/// Region of a normalized state, from the state and thresholds alone.
pub fn detect_region<S: Scalar>(
    s: &SystemState<S>,
    t: &PrecomputedThresholds<S>,
    statics: &StaticParams<S>,
) -> Result<Region> {
    let SystemState { x, b, y } = *s;
    let theta_bar = statics.theta_bar;
    if !(b > theta_bar * y && b < y) {
        return Err(PammError::TrivialCurve {
            ratio: (b / y).to_f64(),
            floor: theta_bar.to_f64(),
        });
    }
    let one = S::one();
    let alpha = statics.alpha_bar_norm;
    let xu_bar = statics.xu_bar_norm;
    let theta = statics.theta();

    if b >= threshold_reserve(x, t.ba_I_II, alpha, xu_bar, t.xl_I_II) {
        let minor = if x <= xu_bar {
            Minor::Flat
        } else if b <= (one - alpha * (x - xu_bar)) * y {
            Minor::Decay
        } else {
            Minor::Tail
        };
        return Ok(Region::new(Case::I, minor));
    }
    // the II/III boundary curve reaches the floor at theta / alpha when alpha > theta
    let xl_ii_iii = if alpha <= theta { one } else { theta / alpha };
    if b >= threshold_reserve(x, t.ba_II_III, alpha, S::zero(), xl_ii_iii) {
        if b >= threshold_reserve(x, t.ba_h_l, alpha, t.xu_h_l, one) {
            let minor = if y - b <= S::half() * alpha * y * y {
                Minor::Flat
            } else {
                Minor::Decay
            };
            return Ok(Region::new(Case::IIh, minor));
        }
        let minor = if b - theta_bar * y >= theta * theta / (alpha + alpha) {
            Minor::Flat
        } else {
            Minor::Decay
        };
        return Ok(Region::new(Case::IIl, minor));
    }
    let case = if b >= threshold_reserve(x, t.ba_H_L, t.alpha_H_L, S::zero(), one) {
        Case::IIIH
    } else {
        Case::IIIL
    };
    Ok(Region::new(case, Minor::Decay))
}
