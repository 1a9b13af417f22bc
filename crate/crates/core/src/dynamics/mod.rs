//! The dynamical-system view of the mechanism.
//!
//! Redemption moves the state along `db/dx = -(rho - gamma)`, `dy/dx = -1`,
//! where `rho` is the marginal redemption price of the current state and
//! `gamma` a redemption fee retained in the reserve. Minting moves `x`
//! down, adds supply one for one and pays `phi >= 1` per unit into the
//! reserve. Everything here runs in `f64`.

pub mod ode;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{CurveShape, CurveSpec};
use crate::error::{PammError, Result};
use crate::reconstruct::{check_amount, reconstruct_curve, redeem_uncounted, QuoteRegion};
use crate::region::{precompute, PrecomputedThresholds};
use crate::state::{AnchorPoint, StaticParams, SystemState};

pub use ode::{integrate, Tolerance};

/// A state-dependent rate `(x, b, y) -> value`.
pub type RateFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Redemption fee `gamma`, retained in the reserve.
#[derive(Clone)]
pub enum RedeemFee {
    /// `gamma = eps * rho`.
    Proportional(f64),
    Custom(RateFn),
}

impl RedeemFee {
    fn is_zero(&self) -> bool {
        matches!(self, Self::Proportional(e) if *e == 0.0)
    }
}

impl fmt::Debug for RedeemFee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Proportional(e) => f.debug_tuple("Proportional").field(e).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Price `phi` paid per stablecoin minted.
#[derive(Clone)]
pub enum MintPrice {
    Constant(f64),
    Custom(RateFn),
}

impl fmt::Debug for MintPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(p) => f.debug_tuple("Constant").field(p).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeeConfig {
    pub redeem_fee: RedeemFee,
    pub mint_price: MintPrice,
}

impl Default for FeeConfig {
    fn default() -> Self {
        Self {
            redeem_fee: RedeemFee::Proportional(0.0),
            mint_price: MintPrice::Constant(1.0),
        }
    }
}

impl FeeConfig {
    /// Proportional redemption fee `eps` and constant mint price `phi`.
    pub fn proportional(eps: f64, phi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(PammError::InvalidParams(format!("redeem fee {eps} outside [0, 1)")));
        }
        if !(phi >= 1.0) || !phi.is_finite() {
            return Err(PammError::InvalidParams(format!("mint price {phi} below 1")));
        }
        Ok(Self {
            redeem_fee: RedeemFee::Proportional(eps),
            mint_price: MintPrice::Constant(phi),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TradeKind {
    Redeem,
    Mint,
}

impl fmt::Display for TradeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Redeem => "redeem",
            Self::Mint => "mint",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeAction {
    pub kind: TradeKind,
    pub amount: f64,
}

impl TradeAction {
    pub fn redeem(amount: f64) -> Self {
        Self {
            kind: TradeKind::Redeem,
            amount,
        }
    }

    pub fn mint(amount: f64) -> Self {
        Self {
            kind: TradeKind::Mint,
            amount,
        }
    }
}

/// One executed action.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub action: TradeAction,
    pub pre: SystemState,
    pub post: SystemState,
    /// Payout for a redemption, cost for a mint.
    pub value: f64,
    /// Reconstructed anchor ratio after the action.
    pub r_a: f64,
    pub region: QuoteRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub initial: SystemState,
    pub initial_r_a: f64,
    pub steps: Vec<TraceStep>,
    /// Set when an action could not be executed; `steps` holds the prefix.
    pub halted: Option<PammError>,
}

impl PathTrace {
    pub fn final_state(&self) -> SystemState {
        self.steps.last().map_or(self.initial, |s| s.post)
    }

    pub fn total_payout(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.action.kind == TradeKind::Redeem)
            .map(|s| s.value)
            .sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.action.kind == TradeKind::Mint)
            .map(|s| s.value)
            .sum()
    }

    /// Payouts received minus mint costs paid.
    pub fn trader_net(&self) -> f64 {
        self.total_payout() - self.total_cost()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.halted {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Curve through a state found by bisection on the anchor reserve.
///
/// Relies only on forward evaluation of the closed-form reserve and its
/// monotonicity in the anchor reserve.
pub fn bisect_anchor(s: &SystemState, statics: &StaticParams) -> Result<CurveSpec> {
    s.validate()?;
    let SystemState { x, b, y } = *s;
    let y_a = x + y;
    if y == 0.0 || b >= y {
        return CurveSpec::new(AnchorPoint::new(b + x, y_a)?, *statics);
    }
    let r = b / y;
    if r <= statics.theta_bar {
        return CurveSpec::new(AnchorPoint::new(r * y_a, y_a)?, *statics);
    }
    let mut lo = (b + statics.theta_bar * x).max(r * y_a);
    let mut hi = (b + x).min(y_a);
    let reserve = |b_a: f64| -> Result<f64> { CurveSpec::new(AnchorPoint::new(b_a, y_a)?, *statics)?.reserve_at(x) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reserve(mid)? < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    CurveSpec::new(AnchorPoint::new(0.5 * (lo + hi), y_a)?, *statics)
}

fn kinks(spec: &CurveSpec) -> Vec<f64> {
    match spec.shape {
        CurveShape::Regular { params, .. } => vec![params.x_u, params.x_l],
        _ => Vec::new(),
    }
}

/// Payout of redeeming `amount`, by integrating the state equations with
/// the price of each visited state found by bisection.
pub fn ode_redeem_oracle(s: &SystemState, amount: f64, statics: &StaticParams, rel_tol: f64) -> Result<f64> {
    s.validate()?;
    check_amount(s, amount)?;
    if !(rel_tol > 0.0) {
        return Err(PammError::InvalidParams(format!("rel_tol {rel_tol} must be positive")));
    }
    if amount == 0.0 {
        return Ok(0.0);
    }
    let start = bisect_anchor(s, statics)?;
    let y_a = s.anchor_supply();
    let rhs = |x: f64, v: &[f64; 2]| -> Result<[f64; 2]> {
        let (b, y) = (v[0].max(0.0), v[1].max(0.0));
        let rho = if y <= 1e-12 * y_a {
            start.price_at(x.min(y_a))?
        } else {
            let spec = bisect_anchor(&SystemState { x, b, y }, statics)?;
            spec.price_at(x.min(spec.anchor.y_a))?
        };
        Ok([-rho, -1.0])
    };
    let end = integrate(
        rhs,
        s.x,
        [s.b, s.y],
        s.x + amount,
        &kinks(&start),
        Tolerance::relative(rel_tol),
    )?;
    Ok(s.b - end[0])
}

/// Marginal redemption price of a state, via region detection and reconstruction.
fn marginal_price(
    s: &SystemState,
    statics: &StaticParams,
    t: &PrecomputedThresholds,
    fallback: &CurveSpec,
) -> Result<f64> {
    let y_a = s.anchor_supply();
    if s.y <= 1e-12 * y_a {
        return fallback.price_at(s.x.min(fallback.anchor.y_a));
    }
    let (spec, _) = reconstruct_curve(s, statics, t)?;
    spec.price_at(s.x.min(spec.anchor.y_a))
}

const FEE_TOLERANCE: Tolerance = Tolerance { rel: 1e-13, abs: 1e-16 };

fn redeem_with_fee(
    s: &SystemState,
    amount: f64,
    fee: &RedeemFee,
    statics: &StaticParams,
    t: &PrecomputedThresholds,
) -> Result<(f64, SystemState)> {
    let (start, _) = reconstruct_curve(s, statics, t)?;
    let rhs = |x: f64, v: &[f64; 2]| -> Result<[f64; 2]> {
        let state = SystemState {
            x,
            b: v[0].max(0.0),
            y: v[1].max(0.0),
        };
        let rho = marginal_price(&state, statics, t, &start)?;
        let gamma = match fee {
            RedeemFee::Proportional(eps) => eps * rho,
            RedeemFee::Custom(g) => g(state.x, state.b, state.y),
        };
        if !(gamma >= 0.0) {
            return Err(PammError::InvalidParams(format!("redeem fee {gamma} is negative at x = {x}")));
        }
        Ok([-(rho - gamma), -1.0])
    };
    let end = integrate(rhs, s.x, [s.b, s.y], s.x + amount, &kinks(&start), FEE_TOLERANCE)?;
    let b = end[0].clamp(0.0, s.b);
    let post = SystemState {
        x: s.x + amount,
        b,
        y: s.y - amount,
    };
    Ok((s.b - b, post))
}

fn mint(s: &SystemState, amount: f64, price: &MintPrice) -> Result<(f64, SystemState)> {
    let x_end = (s.x - amount).max(0.0);
    let cost = match price {
        MintPrice::Constant(phi) => {
            if !(*phi >= 1.0) {
                return Err(PammError::InvalidParams(format!("mint price {phi} below 1")));
            }
            phi * amount
        }
        MintPrice::Custom(phi) => {
            // minted amount is the integration variable; x stops at zero
            let x0 = s.x;
            let rhs = |m: f64, v: &[f64; 2]| -> Result<[f64; 2]> {
                let x = (x0 - m).max(0.0);
                let p = phi(x, v[0], v[1]);
                if !(p >= 1.0) {
                    return Err(PammError::InvalidParams(format!("mint price {p} below 1 at x = {x}")));
                }
                Ok([p, 1.0])
            };
            let end = integrate(rhs, 0.0, [s.b, s.y], amount, &[x0], Tolerance::default())?;
            end[0] - s.b
        }
    };
    Ok((
        cost,
        SystemState {
            x: x_end,
            b: s.b + cost,
            y: s.y + amount,
        },
    ))
}

fn anchor_ratio(s: &SystemState, statics: &StaticParams, t: &PrecomputedThresholds) -> (f64, QuoteRegion) {
    match reconstruct_curve(s, statics, t) {
        Ok((spec, region)) => (spec.anchor.ratio(), region),
        Err(_) => (f64::NAN, QuoteRegion::Empty),
    }
}

/// Execute `actions` in order from `s`.
pub fn apply_path(s: &SystemState, actions: &[TradeAction], fees: &FeeConfig, statics: &StaticParams) -> PathTrace {
    let mut trace = PathTrace {
        initial: *s,
        initial_r_a: f64::NAN,
        steps: Vec::with_capacity(actions.len()),
        halted: None,
    };
    let t = match s.validate().and_then(|_| precompute(statics)) {
        Ok(t) => t,
        Err(e) => {
            trace.halted = Some(e);
            return trace;
        }
    };
    trace.initial_r_a = anchor_ratio(s, statics, &t).0;
    let mut cur = *s;
    for &action in actions {
        match step(&cur, action, fees, statics, &t) {
            Ok((value, post)) => {
                let (r_a, region) = anchor_ratio(&post, statics, &t);
                trace.steps.push(TraceStep {
                    action,
                    pre: cur,
                    post,
                    value,
                    r_a,
                    region,
                });
                cur = post;
            }
            Err(e) => {
                trace.halted = Some(e);
                break;
            }
        }
    }
    trace
}

fn step(
    s: &SystemState,
    action: TradeAction,
    fees: &FeeConfig,
    statics: &StaticParams,
    t: &PrecomputedThresholds,
) -> Result<(f64, SystemState)> {
    if !(action.amount > 0.0) || !action.amount.is_finite() {
        return Err(PammError::NegativeAmount(action.amount));
    }
    match action.kind {
        TradeKind::Redeem => {
            check_amount(s, action.amount)?;
            if fees.redeem_fee.is_zero() {
                let q = redeem_uncounted(s, action.amount, statics, t)?;
                Ok((q.payout, q.state))
            } else {
                redeem_with_fee(s, action.amount, &fees.redeem_fee, statics, t)
            }
        }
        TradeKind::Mint => mint(s, action.amount, &fees.mint_price),
    }
}

/// Comparison of split redemptions against one redemption of the total.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub chunks: Vec<f64>,
    pub single_payout: f64,
    pub split_payout: f64,
    pub payout_deviation: f64,
    /// Largest componentwise difference of the final states.
    pub state_deviation: f64,
    pub tolerance: f64,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.payout_deviation < self.tolerance && self.state_deviation < self.tolerance
    }
}

pub const PATH_TOLERANCE: f64 = 1e-9;

/// Redeem `chunks` one after another and compare with redeeming their sum at once.
pub fn check_split(s: &SystemState, chunks: &[f64], statics: &StaticParams) -> Result<IndependenceReport> {
    let t = precompute(statics)?;
    let total: f64 = chunks.iter().sum();
    let single = redeem_uncounted(s, total.min(s.y), statics, &t)?;
    let mut cur = *s;
    let mut split = 0.0;
    for &c in chunks {
        let q = redeem_uncounted(&cur, c.min(cur.y), statics, &t)?;
        split += q.payout;
        cur = q.state;
    }
    let d = |a: f64, b: f64| (a - b).abs();
    Ok(IndependenceReport {
        chunks: chunks.to_vec(),
        single_payout: single.payout,
        split_payout: split,
        payout_deviation: d(split, single.payout),
        state_deviation: d(cur.x, single.state.x)
            .max(d(cur.b, single.state.b))
            .max(d(cur.y, single.state.y)),
        tolerance: PATH_TOLERANCE,
    })
}

/// Split `total` into `k` random positive chunks.
pub fn random_chunks(total: f64, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut cuts: Vec<f64> = (1..k).map(|_| rng.random::<f64>() * total).collect();
    cuts.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    let mut chunks = Vec::with_capacity(k);
    for c in cuts {
        chunks.push(c - prev);
        prev = c;
    }
    chunks.push(total - prev);
    chunks
}

pub fn check_path_independence(
    s: &SystemState,
    total: f64,
    k: usize,
    statics: &StaticParams,
    seed: u64,
) -> Result<IndependenceReport> {
    check_amount(s, total)?;
    if k == 0 {
        return Err(PammError::OutOfRange {
            what: "chunk count",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chunks = random_chunks(total, k, &mut rng);
    check_split(s, &chunks, statics)
}

/// Outcome of the path-deficiency checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyReport {
    /// Largest stepwise decrease of the reconstructed anchor ratio.
    pub max_anchor_drop: f64,
    pub final_ratio: f64,
    /// Ratio of the initial curve at the final redemption level.
    pub reference_ratio: f64,
    pub trader_net: f64,
    /// Payout of the netted single redemption, when the path nets to one.
    pub single_shot: Option<f64>,
    /// Deviation from one-shot redemption, for pure redemption paths.
    pub fee_path_deviation: Option<f64>,
    pub violations: Vec<String>,
}

impl DeficiencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Floor-saturated states do not identify their anchor.
const SATURATION_MARGIN: f64 = 1e-9;

pub fn check_path_deficiency(
    s: &SystemState,
    actions: &[TradeAction],
    fees: &FeeConfig,
    statics: &StaticParams,
) -> Result<DeficiencyReport> {
    let trace = apply_path(s, actions, fees, statics).into_result()?;
    let tol = PATH_TOLERANCE;
    let mut violations = Vec::new();
    let saturated = |st: &SystemState| st.y > 0.0 && st.ratio() <= statics.theta_bar + SATURATION_MARGIN;

    let mut max_drop = 0.0_f64;
    let mut prev = trace.initial_r_a;
    let mut prev_state = trace.initial;
    for (i, st) in trace.steps.iter().enumerate() {
        let clamped = st.action.kind == TradeKind::Mint && st.pre.x < st.action.amount;
        let comparable = !clamped && !saturated(&prev_state) && !saturated(&st.post) && st.post.y > 0.0;
        if comparable && prev.is_finite() && st.r_a.is_finite() {
            let drop = prev - st.r_a;
            max_drop = max_drop.max(drop);
            if drop > tol {
                violations.push(format!("anchor ratio fell by {drop:e} at step {}", i + 1));
            }
        }
        prev = st.r_a;
        prev_state = st.post;
    }

    let fin = trace.final_state();
    let t = precompute(statics)?;
    let (initial_curve, _) = reconstruct_curve(s, statics, &t)?;
    let (final_ratio, reference_ratio) = if fin.y > 1e-12 && fin.x <= initial_curve.anchor.y_a {
        let f = fin.ratio();
        let r = initial_curve.ratio_at(fin.x)?;
        if f < r - tol {
            violations.push(format!("final ratio {f} below initial curve ratio {r}"));
        }
        (f, r)
    } else {
        (f64::NAN, f64::NAN)
    };

    let redeemed: f64 = actions
        .iter()
        .filter(|a| a.kind == TradeKind::Redeem)
        .map(|a| a.amount)
        .sum();
    let minted: f64 = actions.iter().filter(|a| a.kind == TradeKind::Mint).map(|a| a.amount).sum();
    let net = redeemed - minted;
    let trader_net = trace.trader_net();
    let mut single_shot = None;
    let mut fee_path_deviation = None;
    let identified = !saturated(s) && trace.steps.iter().all(|st| !saturated(&st.post));
    if identified && matches!(fees.redeem_fee, RedeemFee::Proportional(_)) && net >= -1e-15 && !actions.is_empty() {
        let net = net.max(0.0).min(s.y);
        let single = if net > 0.0 {
            step(s, TradeAction::redeem(net), fees, statics, &t)?.0
        } else {
            0.0
        };
        single_shot = Some(single);
        if trader_net > single + tol {
            violations.push(format!(
                "subdivided path nets {trader_net} against single redemption {single}"
            ));
        }
        if minted == 0.0 {
            let dev = (trace.total_payout() - single).abs();
            fee_path_deviation = Some(dev);
            if dev > tol {
                violations.push(format!("redemption path deviates from single redemption by {dev:e}"));
            }
        }
    }

    Ok(DeficiencyReport {
        max_anchor_drop: max_drop,
        final_ratio,
        reference_ratio,
        trader_net,
        single_shot,
        fee_path_deviation,
        violations,
    })
}

/// Discount the redemption level between blocks: `x -> decay * x`.
pub fn advance_block(s: &SystemState, decay: f64) -> Result<SystemState> {
    if !(0.0..=1.0).contains(&decay) {
        return Err(PammError::OutOfRange {
            what: "decay",
            value: decay,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(SystemState {
        x: decay * s.x,
        b: s.b,
        y: s.y,
    })
}
