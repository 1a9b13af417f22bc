//! Seeded property suites, run by the `fuzz` command.
//!
//! Every suite draws its cases from a ChaCha stream derived from the seed
//! and the suite name, so any single suite can be rerun on its own and
//! reproduces byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{compute_xl, CurveSpec};
use crate::discrete::{discrete_redeem, DiscreteSpec};
use crate::dynamics::{check_path_deficiency, check_path_independence, ode_redeem_oracle, FeeConfig, TradeAction};
use crate::error::{PammError, Result};
use crate::numeric::{measure, Counted, Fixed18, Scalar};
use crate::reconstruct::{reconstruct_ba, reconstruct_curve, redeem, REDEEM_MAX_ARITH, RECONSTRUCT_MAX_ARITH};
use crate::region::{classify_from_anchor, detect_region, precompute, Case, Region, DETECT_MAX_ARITH};
use crate::state::{normalize_state, AnchorPoint, StaticParams, SystemState};

/// Suite names with their default case counts.
pub const SUITES: [(&str, usize); 10] = [
    ("roundtrip", 100_000),
    ("oracle", 1_000),
    ("independence", 1_000),
    ("monotonicity", 10_000),
    ("detection", 100_000),
    ("floor", 10_000),
    ("figures", 3),
    ("deficiency", 1_000),
    ("discrete", 10_000),
    ("decay-stop", 10_000),
];

/// States this close to the floor ratio sit on the floor tail, which
/// every anchor shares.
pub const FLOOR_MARGIN: f64 = 1e-9;

/// Half-width of the band around region boundaries where either side is accepted.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// Cases drawn but not applicable to the property.
    pub skipped: usize,
    pub failures: usize,
    /// Largest observed error measure; what it measures depends on the suite.
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > self.skipped
    }
}

struct Tally {
    out: SuiteOutcome,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            out: SuiteOutcome {
                name,
                cases: 0,
                skipped: 0,
                failures: 0,
                worst: 0.0,
                first_failure: None,
            },
        }
    }

    fn skip(&mut self) {
        self.out.cases += 1;
        self.out.skipped += 1;
    }

    fn record(&mut self, ok: bool, err: f64, detail: impl FnOnce() -> String) {
        self.out.cases += 1;
        if err.is_finite() {
            self.out.worst = self.out.worst.max(err);
        }
        if !ok {
            self.fail(detail);
        }
    }

    fn error(&mut self, e: PammError, detail: impl FnOnce() -> String) {
        self.out.cases += 1;
        self.fail(|| format!("{}: {e}", detail()));
    }

    fn fail(&mut self, detail: impl FnOnce() -> String) {
        self.out.failures += 1;
        if self.out.first_failure.is_none() {
            self.out.first_failure = Some(detail());
        }
    }
}

fn suite_rng(name: &str, seed: u64) -> ChaCha8Rng {
    let salt = name.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, c| (h ^ c as u64).wrapping_mul(0x100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

/// Run one suite by name; `cases` overrides its default size.
pub fn run_suite(name: &str, seed: u64, cases: Option<usize>) -> Result<SuiteOutcome> {
    let (key, default) = SUITES
        .iter()
        .copied()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| PammError::Parse(format!("unknown suite {name:?}")))?;
    let n = cases.unwrap_or(default);
    let mut rng = suite_rng(key, seed);
    Ok(match key {
        "roundtrip" => roundtrip(&mut rng, n),
        "oracle" => oracle(&mut rng, n),
        "independence" => independence(&mut rng, n),
        "monotonicity" => monotonicity(&mut rng, n),
        "detection" => detection(&mut rng, n),
        "floor" => floor(&mut rng, n),
        "figures" => figures(),
        "deficiency" => deficiency(&mut rng, n),
        "discrete" => discrete(&mut rng, n),
        _ => decay_stop(&mut rng, n),
    })
}

pub fn random_statics(rng: &mut impl Rng) -> StaticParams {
    StaticParams {
        theta_bar: rng.random_range(0.05..0.6),
        alpha_bar_norm: rng.random_range(0.2..3.0),
        xu_bar_norm: rng.random_range(0.0..0.6),
    }
}

/// A regular anchor with supply drawn log-uniformly from `[0.1, 1000)`.
pub fn random_anchor(rng: &mut impl Rng, theta_bar: f64) -> AnchorPoint {
    let y_a = 10f64.powf(rng.random_range(-1.0..3.0));
    loop {
        let b_a = rng.random_range(theta_bar..1.0) * y_a;
        let a = AnchorPoint { b_a, y_a };
        if a.is_regular(theta_bar) {
            return a;
        }
    }
}

/// The state reached by redeeming up to `x` on `spec`.
pub fn forward_state(spec: &CurveSpec, x: f64) -> Result<SystemState> {
    Ok(SystemState {
        x,
        b: spec.reserve_at(x)?,
        y: spec.anchor.y_a - x,
    })
}

/// Whether a state still identifies its anchor.
pub fn identifiable(s: &SystemState, theta_bar: f64) -> bool {
    s.y > 0.0 && s.b < s.y && s.b > (theta_bar + FLOOR_MARGIN) * s.y
}

struct Draw {
    statics: StaticParams,
    spec: CurveSpec,
    state: SystemState,
}

fn draw(rng: &mut impl Rng) -> Result<Draw> {
    let statics = random_statics(rng);
    let anchor = random_anchor(rng, statics.theta_bar);
    let spec = CurveSpec::new(anchor, statics)?;
    let x = rng.random_range(0.0..anchor.y_a);
    let state = forward_state(&spec, x)?;
    Ok(Draw { statics, spec, state })
}

fn describe(d: &Draw) -> String {
    format!(
        "statics {:?}, anchor ({}, {}), state ({}, {}, {})",
        d.statics, d.spec.anchor.b_a, d.spec.anchor.y_a, d.state.x, d.state.b, d.state.y
    )
}

fn roundtrip(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("roundtrip");
    for _ in 0..n {
        let d = match draw(rng) {
            Ok(d) => d,
            Err(e) => {
                tally.error(e, || "draw".into());
                continue;
            }
        };
        if !identifiable(&d.state, d.statics.theta_bar) {
            tally.skip();
            continue;
        }
        let got = precompute(&d.statics).and_then(|t| reconstruct_curve(&d.state, &d.statics, &t));
        match got {
            Ok((spec, _)) => {
                let err = (spec.anchor.b_a - d.spec.anchor.b_a).abs() / d.spec.anchor.y_a;
                tally.record(err <= 1e-9, err, || format!("{} reconstructed {}", describe(&d), spec.anchor.b_a));
            }
            Err(e) => tally.error(e, || describe(&d)),
        }
    }
    tally.out
}

fn oracle(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("oracle");
    for _ in 0..n {
        let d = match draw(rng) {
            Ok(d) => d,
            Err(e) => {
                tally.error(e, || "draw".into());
                continue;
            }
        };
        if !identifiable(&d.state, d.statics.theta_bar) {
            tally.skip();
            continue;
        }
        let amount = rng.random_range(0.0..1.0) * d.state.y;
        let got = precompute(&d.statics).and_then(|t| {
            let q = redeem(&d.state, amount, &d.statics, &t)?;
            let o = ode_redeem_oracle(&d.state, amount, &d.statics, 1e-12)?;
            Ok((q.payout, o))
        });
        match got {
            Ok((payout, reference)) => {
                let tol = (1e-6 * payout).max(1e-8);
                let err = (payout - reference).abs();
                tally.record(err <= tol, err / tol, || {
                    format!("{} amount {amount}: closed form {payout}, ODE {reference}", describe(&d))
                });
            }
            Err(e) => tally.error(e, || format!("{} amount {amount}", describe(&d))),
        }
    }
    tally.out
}

fn independence(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("independence");
    for _ in 0..n {
        let d = match draw(rng) {
            Ok(d) => d,
            Err(e) => {
                tally.error(e, || "draw".into());
                continue;
            }
        };
        let total = rng.random_range(0.0..1.0) * d.state.y;
        let k = rng.random_range(1..=10);
        match check_path_independence(&d.state, total, k, &d.statics, rng.random()) {
            Ok(r) => tally.record(r.passed(), r.payout_deviation.max(r.state_deviation), || {
                format!("{} chunks {:?}: {r:?}", describe(&d), r.chunks)
            }),
            Err(e) => tally.error(e, || describe(&d)),
        }
    }
    tally.out
}

fn monotonicity(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("monotonicity");
    for _ in 0..n {
        let statics = random_statics(rng);
        let low = random_anchor(rng, statics.theta_bar);
        let y_a = low.y_a;
        let high = AnchorPoint {
            b_a: rng.random_range(low.b_a..y_a),
            y_a,
        };
        if !(high.b_a > low.b_a) || !high.is_regular(statics.theta_bar) {
            tally.skip();
            continue;
        }
        let x = rng.random_range(0.0..y_a);
        let pair = CurveSpec::new(low, statics)
            .and_then(|l| l.reserve_at(x))
            .and_then(|bl| Ok((bl, CurveSpec::new(high, statics)?.reserve_at(x)?)));
        match pair {
            Ok((bl, bh)) => {
                // both on the shared floor tail
                if bh <= statics.theta_bar * (y_a - x) * (1.0 + 1e-12) {
                    tally.skip();
                    continue;
                }
                tally.record(bl < bh, bl - bh, || {
                    format!("{statics:?}: b({x}; {}) = {bl} >= b({x}; {}) = {bh}", low.b_a, high.b_a)
                });
            }
            Err(e) => tally.error(e, || format!("{statics:?} anchors {} {}", low.b_a, high.b_a)),
        }
    }
    tally.out
}

/// Whether `region` is what the selection rule gives somewhere within the
/// boundary band around `(anchor, x)`.
fn region_within_band(region: Region, anchor: &AnchorPoint, statics: &StaticParams, x: f64) -> bool {
    let steps = [-1.0, 0.0, 1.0];
    steps.iter().any(|db| {
        steps.iter().any(|dx| {
            let a = AnchorPoint {
                b_a: anchor.b_a + db * BOUNDARY_BAND,
                y_a: anchor.y_a,
            };
            let x = (x + dx * BOUNDARY_BAND).clamp(0.0, anchor.y_a);
            classify_from_anchor(&a, statics, x).is_ok_and(|r| r == region)
        })
    })
}

fn counted<S: Scalar>(s: &SystemState<S>) -> SystemState<Counted<S>> {
    SystemState {
        x: Counted(s.x),
        b: Counted(s.b),
        y: Counted(s.y),
    }
}

fn counted_statics(p: &StaticParams) -> StaticParams<Counted<f64>> {
    StaticParams {
        theta_bar: Counted(p.theta_bar),
        alpha_bar_norm: Counted(p.alpha_bar_norm),
        xu_bar_norm: Counted(p.xu_bar_norm),
    }
}

fn detection(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("detection");
    for _ in 0..n {
        let d = match draw(rng) {
            Ok(d) => d,
            Err(e) => {
                tally.error(e, || "draw".into());
                continue;
            }
        };
        if !identifiable(&d.state, d.statics.theta_bar) {
            tally.skip();
            continue;
        }
        let checked = (|| -> Result<std::result::Result<f64, String>> {
            let t = precompute(&d.statics)?;
            let (norm, _) = normalize_state(&d.state)?;
            let anchor = AnchorPoint {
                b_a: d.spec.anchor.b_a / d.spec.anchor.y_a,
                y_a: 1.0,
            };
            let ct = PrecomputedCounted::from(&t);
            let cp = counted_statics(&d.statics);
            let (region, det_ops) = measure(|| detect_region(&counted(&norm), &ct.0, &cp));
            let region = region?;
            if det_ops.sqrt != 0 || det_ops.arith > DETECT_MAX_ARITH {
                return Ok(Err(format!("detection used {det_ops:?}")));
            }
            if !region_within_band(region, &anchor, &d.statics, norm.x) {
                let expected = classify_from_anchor(&anchor, &d.statics, norm.x)?;
                return Ok(Err(format!("detected {region}, expected {expected}")));
            }
            let (_, rec_ops) = measure(|| reconstruct_ba(&counted(&norm), region, &cp));
            if rec_ops.sqrt > 1 || rec_ops.arith > RECONSTRUCT_MAX_ARITH {
                return Ok(Err(format!("reconstruction used {rec_ops:?}")));
            }
            let amount = rng.random_range(0.0..1.0) * d.state.y;
            let q = redeem(&d.state, amount, &d.statics, &t)?;
            if q.ops.sqrt > 2 || q.ops.arith > REDEEM_MAX_ARITH {
                return Ok(Err(format!("quote used {:?}", q.ops)));
            }
            Ok(Ok(q.ops.sqrt as f64))
        })();
        match checked {
            Ok(Ok(sqrt)) => tally.record(true, sqrt, String::new),
            Ok(Err(msg)) => tally.record(false, f64::NAN, || format!("{}: {msg}", describe(&d))),
            Err(e) => tally.error(e, || describe(&d)),
        }
    }
    tally.out
}

struct PrecomputedCounted(crate::region::PrecomputedThresholds<Counted<f64>>);

impl From<&crate::region::PrecomputedThresholds> for PrecomputedCounted {
    fn from(t: &crate::region::PrecomputedThresholds) -> Self {
        Self(crate::region::PrecomputedThresholds {
            ba_I_II: Counted(t.ba_I_II),
            xl_I_II: Counted(t.xl_I_II),
            ba_II_III: Counted(t.ba_II_III),
            ba_h_l: Counted(t.ba_h_l),
            xu_h_l: Counted(t.xu_h_l),
            ba_H_L: Counted(t.ba_H_L),
            alpha_H_L: Counted(t.alpha_H_L),
        })
    }
}

/// Grid size for the floor check.
pub const FLOOR_GRID: usize = 1_000;

/// Smallest reserve ratio of `spec` over an evenly spaced grid on `[0, y_a)`.
pub fn min_grid_ratio(spec: &CurveSpec, grid: usize) -> Result<f64> {
    let y_a = spec.anchor.y_a;
    (0..grid).try_fold(f64::INFINITY, |m, i| {
        let x = y_a * i as f64 / grid as f64;
        Ok(m.min(spec.reserve_at(x)? / (y_a - x)))
    })
}

/// Whether the fixed-point curve keeps `b(x) >= theta_bar (y_a - x)` on the grid.
pub fn fixed_floor_holds(spec: &CurveSpec<Fixed18>, grid: usize) -> Result<bool> {
    let y_a = spec.anchor.y_a;
    let theta_bar = spec.statics.theta_bar;
    for i in 0..=grid {
        let x = y_a * Fixed18::from_int(i as i64) / Fixed18::from_int(grid as i64);
        // mul_up over-estimates the floor reserve, so this is at least as strict as exact
        if spec.reserve_at(x)? < theta_bar.mul_up(y_a - x) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn floor(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("floor");
    for _ in 0..n {
        let statics = random_statics(rng);
        let anchor = random_anchor(rng, statics.theta_bar);
        let checked = (|| -> Result<(f64, bool)> {
            let spec = CurveSpec::new(anchor, statics)?;
            let min = min_grid_ratio(&spec, FLOOR_GRID)?;
            let fixed_statics = StaticParams::<Fixed18>::new(
                Fixed18::from_f64(statics.theta_bar),
                Fixed18::from_f64(statics.alpha_bar_norm),
                Fixed18::from_f64(statics.xu_bar_norm),
            )?;
            let fixed_anchor = AnchorPoint::new(Fixed18::from_f64(anchor.b_a), Fixed18::from_f64(anchor.y_a))?;
            let fixed_ok = if fixed_anchor.is_regular(fixed_statics.theta_bar) {
                fixed_floor_holds(&CurveSpec::new(fixed_anchor, fixed_statics)?, FLOOR_GRID)?
            } else {
                true
            };
            Ok((statics.theta_bar - min, fixed_ok))
        })();
        match checked {
            Ok((shortfall, fixed_ok)) => tally.record(shortfall <= 1e-12 && fixed_ok, shortfall, || {
                format!("{statics:?} anchor {anchor:?}: float shortfall {shortfall:e}, fixed ok {fixed_ok}")
            }),
            Err(e) => tally.error(e, || format!("{statics:?} anchor {anchor:?}")),
        }
    }
    tally.out
}

/// Shape statistics of the normalized curve family over a grid of anchor ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub anchors: usize,
    /// Anchors per case, in the order I, II h, II l, III H, III L.
    pub case_counts: [usize; 5],
    /// Anchors whose decay runs to the end of the supply.
    pub full_decay: usize,
    /// Largest `|r(x + dx) - r(x)| / dx` seen on a 1000-step grid.
    pub max_ratio_slope: f64,
}

impl FamilySummary {
    pub fn count(&self, case: Case) -> usize {
        let i = Case::ALL.iter().position(|&c| c == case).expect("case listed");
        self.case_counts[i]
    }
}

/// Anchor ratios `theta_bar + (1 - theta_bar)(i + 1/2) / grid`, all regular.
pub fn family_ratios(theta_bar: f64, grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|i| theta_bar + (1.0 - theta_bar) * (i as f64 + 0.5) / grid as f64)
        .collect()
}

pub fn family_summary(statics: &StaticParams, grid: usize) -> Result<FamilySummary> {
    let steps = 1_000;
    let mut s = FamilySummary {
        anchors: 0,
        case_counts: [0; 5],
        full_decay: 0,
        max_ratio_slope: 0.0,
    };
    for r_a in family_ratios(statics.theta_bar, grid) {
        let spec = CurveSpec::new(AnchorPoint::new(r_a, 1.0)?, *statics)?;
        let (Some(case), Some(p)) = (spec.shape.case(), spec.params()) else {
            continue;
        };
        s.anchors += 1;
        s.case_counts[Case::ALL.iter().position(|&c| c == case).expect("case listed")] += 1;
        if p.x_l >= 1.0 - 1e-9 {
            s.full_decay += 1;
        }
        let dx = 1.0 / steps as f64;
        let mut prev = spec.ratio_at(0.0)?;
        for i in 1..=steps {
            let r = spec.ratio_at(i as f64 * dx)?;
            s.max_ratio_slope = s.max_ratio_slope.max((r - prev).abs() / dx);
            prev = r;
        }
    }
    Ok(s)
}

/// Bound on `|dr/dx|` used as the continuity criterion for a family.
pub fn ratio_slope_bound(statics: &StaticParams) -> f64 {
    4.0 * statics.alpha_bar_norm.max(1.0)
}

fn figures() -> SuiteOutcome {
    let mut tally = Tally::new("figures");
    let fig = |alpha: f64| StaticParams::new(0.3, alpha, 0.3).and_then(|p| Ok((p, family_summary(&p, 200)?)));
    match fig(0.8) {
        Ok((p, f)) => {
            let ok = f.count(Case::IIh) > 0
                && f.count(Case::IIl) > 0
                && f.count(Case::IIIH) == 0
                && f.full_decay > 0
                && f.max_ratio_slope <= ratio_slope_bound(&p);
            tally.record(ok, f.max_ratio_slope, || format!("alpha 0.8 family: {f:?}"));
        }
        Err(e) => tally.error(e, || "alpha 0.8 family".into()),
    }
    match fig(0.5) {
        Ok((p, f)) => tally.record(
            f.full_decay > 0 && f.max_ratio_slope <= ratio_slope_bound(&p),
            f.max_ratio_slope,
            || format!("alpha 0.5 family: {f:?}"),
        ),
        Err(e) => tally.error(e, || "alpha 0.5 family".into()),
    }
    match fig(1.3) {
        Ok((p, f)) => tally.record(
            f.full_decay == 0 && f.max_ratio_slope <= ratio_slope_bound(&p),
            f.max_ratio_slope,
            || format!("alpha 1.3 family: {f:?}"),
        ),
        Err(e) => tally.error(e, || "alpha 1.3 family".into()),
    }
    tally.out
}

/// A random path of up to `max_len` actions that never mints past `x = 0`
/// and never redeems more than the supply.
pub fn random_path(rng: &mut impl Rng, start: &SystemState, max_len: usize) -> Vec<TradeAction> {
    let len = rng.random_range(1..=max_len);
    let (mut x, mut y) = (start.x, start.y);
    let mut path = Vec::with_capacity(len);
    for _ in 0..len {
        let mint = x > 1e-9 * (x + y) && rng.random_bool(0.4);
        if mint {
            let a = rng.random_range(0.05..1.0) * x;
            x -= a;
            y += a;
            path.push(TradeAction::mint(a));
        } else {
            let a = rng.random_range(0.01..0.3) * y;
            if !(a > 0.0) {
                break;
            }
            x += a;
            y -= a;
            path.push(TradeAction::redeem(a));
        }
    }
    path
}

fn deficiency(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("deficiency");
    for _ in 0..n {
        let statics = random_statics(rng);
        let mut anchor = random_anchor(rng, statics.theta_bar);
        // moderate supplies keep the fee integration short
        let scale = rng.random_range(0.5..2.0) / anchor.y_a;
        anchor = AnchorPoint {
            b_a: anchor.b_a * scale,
            y_a: anchor.y_a * scale,
        };
        let eps = rng.random_range(0.0..0.01);
        let phi = rng.random_range(1.0..1.01);
        let pure = rng.random_bool(0.25);
        let checked = (|| -> Result<_> {
            let spec = CurveSpec::new(anchor, statics)?;
            let x = rng.random_range(0.0..0.5) * anchor.y_a;
            let start = forward_state(&spec, x)?;
            let mut path = random_path(rng, &start, 20);
            if pure {
                path.retain(|a| a.kind == crate::dynamics::TradeKind::Redeem);
                let total: f64 = path.iter().map(|a| a.amount).sum();
                if total > start.y {
                    path.clear();
                }
            }
            let fees = FeeConfig::proportional(eps, phi)?;
            Ok((start, path.clone(), check_path_deficiency(&start, &path, &fees, &statics)?))
        })();
        match checked {
            Ok((_, path, _)) if path.is_empty() => tally.skip(),
            Ok((start, path, r)) => tally.record(r.passed(), r.max_anchor_drop, || {
                format!("{statics:?} start {start:?} eps {eps} phi {phi} path {path:?}: {:?}", r.violations)
            }),
            Err(e) => tally.error(e, || format!("{statics:?} anchor {anchor:?} eps {eps} phi {phi}")),
        }
    }
    tally.out
}

fn discrete(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("discrete");
    for _ in 0..n {
        let statics = random_statics(rng);
        let anchor = random_anchor(rng, statics.theta_bar);
        let y_a = anchor.y_a;
        let checked = (|| -> Result<std::result::Result<(), String>> {
            let spec = DiscreteSpec::new(anchor, &statics);
            if spec.x_u < anchor.b_a {
                for i in 0..100 {
                    let x = y_a * i as f64 / 100.0;
                    if !(spec.reserve_at(x)? > 0.0) {
                        return Ok(Err(format!("reserve exhausted at {x}")));
                    }
                }
            }
            // floor law over an arbitrary flat length
            let x_u = rng.random_range(0.0..1.0) * y_a;
            let r_u = (anchor.b_a - x_u) / (y_a - x_u);
            let theta = 1.0 - statics.theta_bar;
            let lhs = r_u >= statics.theta_bar;
            let rhs = anchor.ratio() >= statics.theta_bar && x_u <= (anchor.b_a - statics.theta_bar * y_a) / theta;
            let near = (r_u - statics.theta_bar).abs() <= 1e-12;
            if lhs != rhs && !near {
                return Ok(Err(format!("floor law fails at x_u {x_u}: r_u {r_u}")));
            }
            let start = SystemState::new(rng.random_range(0.0..1.0) * spec.x_u, 0.0, 0.0)?;
            let start = SystemState {
                b: spec.reserve_at(start.x)?,
                y: y_a - start.x,
                ..start
            };
            let q = discrete_redeem(&start, rng.random_range(0.0..1.0) * start.y, &statics)?;
            if q.ops.sqrt != 0 {
                return Ok(Err(format!("discrete quote used {:?}", q.ops)));
            }
            // uncapped: the floor binds and full redemption empties the reserve
            let fixed_statics = StaticParams::<Fixed18>::new(
                Fixed18::from_f64(statics.theta_bar),
                Fixed18::from_f64(statics.alpha_bar_norm),
                Fixed18::ONE,
            )?;
            let fresh = SystemState::new(Fixed18::ZERO, Fixed18::from_f64(anchor.b_a), Fixed18::from_f64(y_a))?;
            if fresh.b > fixed_statics.theta_bar * fresh.y && fresh.b < fresh.y {
                let full = discrete_redeem(&fresh, fresh.y, &fixed_statics)?;
                if full.state.b != Fixed18::ZERO || full.payout != fresh.b {
                    return Ok(Err(format!("full redemption left {}", full.state.b)));
                }
            }
            Ok(Ok(()))
        })();
        match checked {
            Ok(Ok(())) => tally.record(true, 0.0, String::new),
            Ok(Err(msg)) => tally.record(false, f64::NAN, || format!("{statics:?} anchor {anchor:?}: {msg}")),
            Err(e) => tally.error(e, || format!("{statics:?} anchor {anchor:?}")),
        }
    }
    tally.out
}

fn decay_stop(rng: &mut impl Rng, n: usize) -> SuiteOutcome {
    let mut tally = Tally::new("decay-stop");
    let mut seen = [false; 5];
    for _ in 0..n {
        let statics = random_statics(rng);
        let anchor = random_anchor(rng, statics.theta_bar);
        let checked = (|| -> Result<Option<(Case, f64)>> {
            let spec = CurveSpec::new(anchor, statics)?;
            let (Some(case), Some(p)) = (spec.shape.case(), spec.params()) else {
                return Ok(None);
            };
            // the general formula, not the case shortcut; at x_L = y_a the
            // decay meets the ratio tangentially, so the radicand is the
            // well-conditioned witness
            let y_u = anchor.y_a - p.x_u;
            let radicand = (y_u * y_u - 2.0 * anchor.deficit() / p.alpha) / (anchor.y_a * anchor.y_a);
            let err = match case {
                Case::I => return Ok(None),
                Case::IIh | Case::IIIH => radicand.abs().max((p.x_l - anchor.y_a).abs() / anchor.y_a),
                Case::IIl | Case::IIIL => match compute_xl(p.alpha, p.x_u, &anchor) {
                    Ok((_, r_l)) => (r_l - statics.theta_bar).abs(),
                    Err(PammError::ReserveExhaustion { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                },
            };
            Ok(Some((case, err)))
        })();
        match checked {
            Ok(None) => tally.skip(),
            Ok(Some((case, err))) => {
                seen[Case::ALL.iter().position(|&c| c == case).expect("case listed")] = true;
                tally.record(err <= 1e-9, err, || format!("{statics:?} anchor {anchor:?} case {}", case.label()));
            }
            Err(e) => tally.error(e, || format!("{statics:?} anchor {anchor:?}")),
        }
    }
    if n > 1_000 && !seen[1..].iter().all(|&s| s) {
        tally.fail(|| format!("cases not all reached: {seen:?}"));
    }
    tally.out
}
