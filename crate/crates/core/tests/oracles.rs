mod common;

use common::*;
use pamm_core::curve::{compute_alpha_hat, compute_xl, compute_xu_hat, dynamic_params, theta_floor_holds};
use pamm_core::discrete::{discrete_reconstruct, discrete_redeem, discrete_xu};
use pamm_core::dynamics::{advance_block, apply_path, check_split, ode_redeem_oracle};
use pamm_core::reconstruct::{reconstruct_ba, redeem};
use pamm_core::region::{ba_for_xu_threshold, classify_from_anchor, detect_region, precompute, verify_precomputed};
use pamm_core::state::{denormalize_value, normalize_state};
use pamm_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig5() -> StaticParams {
    StaticParams::new(0.3, 0.8, 0.3).unwrap()
}

fn anchor(b_a: f64) -> AnchorPoint {
    AnchorPoint::new(b_a, 1.0).unwrap()
}

fn st(x: f64, b: f64, y: f64) -> SystemState {
    SystemState::new(x, b, y).unwrap()
}

#[test]
fn bisection_oracle_reproduces_slope_examples() {
    // frozen from the bisection oracle
    for (b_a, want) in [(0.9, 0.2), (0.5, 1.225), (0.65, 0.7)] {
        let oracle = alpha_hat_by_bisection(b_a, 1.0, 0.3);
        assert!(close(oracle, want, 1e-9), "oracle {oracle} at {b_a}");
        let got = compute_alpha_hat(&anchor(b_a), 0.3).unwrap();
        assert!(close(got, want, 1e-12), "{got} at {b_a}");
    }
}

#[test]
fn slope_matches_bisection_across_anchors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let theta_bar = rng.random_range(0.05..0.6);
        let y_a = rng.random_range(0.5..20.0);
        let r = rng.random_range(theta_bar + 0.01..0.99);
        let a = AnchorPoint::new(r * y_a, y_a).unwrap();
        let got = compute_alpha_hat(&a, theta_bar).unwrap();
        let oracle = alpha_hat_by_bisection(a.b_a, y_a, theta_bar);
        assert!(close(got, oracle, 1e-8 * oracle.max(1.0)), "{got} vs {oracle} ({a:?}, {theta_bar})");
    }
}

#[test]
fn flat_length_examples() {
    // frozen from the bisection oracle
    let oracle = xu_hat_by_bisection(0.8, 0.9, 1.0, 0.3);
    assert!(close(oracle, 0.5, 1e-9));
    assert!(close(compute_xu_hat(0.8, &anchor(0.9), 0.3).unwrap(), 0.5, 1e-12));

    let a = anchor(0.5);
    let alpha = compute_alpha_hat(&a, 0.3).unwrap();
    assert!(compute_xu_hat(alpha, &a, 0.3).unwrap().abs() < 1e-12);

    // alpha * deficit = theta^2 / 2 sits on both branches
    let a = anchor(0.69375);
    let high = 1.0 - (2.0 * 0.30625_f64 / 0.8).sqrt();
    let low = 1.0 - 0.30625 / 0.7 - 0.7 / 1.6;
    assert!(close(high, low, 1e-12));
    assert!(close(compute_xu_hat(0.8, &a, 0.3).unwrap(), high, 1e-12));
}

#[test]
fn flat_length_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 200 {
        let theta_bar = rng.random_range(0.05..0.6);
        let r = rng.random_range(theta_bar + 0.01..0.99);
        let a = anchor(r);
        let alpha = compute_alpha_hat(&a, theta_bar).unwrap() * rng.random_range(1.0..4.0);
        let got = compute_xu_hat(alpha, &a, theta_bar).unwrap();
        let oracle = xu_hat_by_bisection(alpha, r, 1.0, theta_bar);
        assert!(close(got, oracle, 1e-8), "{got} vs {oracle} (r_a {r}, alpha {alpha}, theta_bar {theta_bar})");
        checked += 1;
    }
}

#[test]
fn decay_stop_examples() {
    // frozen from the root-find oracle
    for (alpha, x_u, b_a, x_l, r_l) in [(0.8, 0.3, 0.9, 0.510102, 0.831919), (1.0, 0.0, 0.8, 0.225403, 0.774597)] {
        let c = find_crossing(b_a, 1.0, alpha, x_u).unwrap();
        assert!(close(c.x_l, x_l, 1e-6) && close(c.r_l, r_l, 1e-6), "{c:?}");
        let (got_x, got_r) = compute_xl(alpha, x_u, &anchor(b_a)).unwrap();
        assert!(close(got_x, c.x_l, 1e-12) && close(got_r, c.r_l, 1e-12));
    }
    // zero radicand
    let a = anchor(0.7);
    let x_u = 0.2;
    let alpha = 2.0 * 0.3 / (1.0 - x_u) / (1.0 - x_u);
    let (x_l, _) = compute_xl(alpha, x_u, &a).unwrap();
    assert!(close(x_l, 1.0, 1e-7));
}

#[test]
fn decay_stop_takes_the_smaller_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let r = rng.random_range(0.2..0.99);
        let y_a = rng.random_range(0.5..5.0);
        let a = AnchorPoint::new(r * y_a, y_a).unwrap();
        let x_u = rng.random_range(0.0..0.5) * y_a;
        let radicand_min = 2.0 * a.deficit() / ((y_a - x_u) * (y_a - x_u));
        let alpha = radicand_min * rng.random_range(1.01..5.0);
        let (x_l, r_l) = compute_xl(alpha, x_u, &a).unwrap();
        let c = find_crossing(a.b_a, y_a, alpha, x_u).unwrap();
        assert!(close(x_l, c.x_l, 1e-9 * y_a), "{x_l} vs {}", c.x_l);
        assert!(close(r_l, c.r_l, 1e-9));
        assert!(x_l <= y_a);
    }
}

#[test]
fn floor_admissibility_examples() {
    assert!(theta_floor_holds(0.8, 0.3, &anchor(0.9), 0.3));
    assert!(theta_floor_holds(0.8, 0.5, &anchor(0.9), 0.3));
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..500 {
        let r = rng.random_range(0.35..0.99);
        let alpha = rng.random_range(0.1..4.0);
        let x_u = rng.random_range(0.0..0.9);
        if find_crossing(r, 1.0, alpha, x_u).is_none() {
            continue;
        }
        let expected = admissible(r, 1.0, alpha, x_u, 0.3);
        let got = theta_floor_holds(alpha, x_u, &anchor(r), 0.3);
        let on_edge = find_crossing(r, 1.0, alpha, x_u).is_some_and(|c| (c.r_l - 0.3).abs() < 1e-9);
        assert!(got == expected || on_edge, "r {r} alpha {alpha} x_u {x_u}");
    }
}

#[test]
fn figure_five_curve() {
    let spec = CurveSpec::new(anchor(0.9), fig5()).unwrap();
    let p = *spec.params().unwrap();
    assert!(close(p.alpha, 0.8, 1e-15) && close(p.x_u, 0.3, 1e-15));
    assert!(close(p.x_l, 0.510102, 1e-6) && close(p.r_l, 0.831919, 1e-6));
    assert_eq!(spec.price_at(0.2).unwrap(), 1.0);
    assert!(close(spec.price_at(0.4).unwrap(), 0.92, 1e-15));
    assert!(close(spec.price_at(0.6).unwrap(), p.r_l, 1e-15));
    assert!(close(spec.reserve_at(0.0).unwrap(), 0.9, 0.0));

    let reference = RefCurve::new(0.9, 1.0, 0.3, 0.8, 0.3);
    for x in [0.1, 0.3, 0.4, 0.5, 0.6, 0.9] {
        assert!(close(spec.reserve_at(x).unwrap(), reference.reserve(x), 1e-9), "x = {x}");
    }
    assert!(close(spec.reserve_at(0.4).unwrap(), 0.504, 1e-12));
    assert!(close(spec.reserve_at(0.6).unwrap(), 0.332768, 1e-6));
}

#[test]
fn trivial_anchors() {
    let over = dynamic_params(&AnchorPoint::new(1.2, 1.0).unwrap(), &fig5()).unwrap();
    assert_eq!(over, CurveShape::OverReserved);
    let under = CurveSpec::new(anchor(0.2), fig5()).unwrap();
    assert_eq!(under.shape, CurveShape::UnderFloor);
    for x in [0.0, 0.5, 1.0] {
        assert!(close(under.price_at(x).unwrap(), 0.2, 1e-15));
    }
}

#[test]
fn curves_match_reference_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let theta_bar = rng.random_range(0.05..0.6);
        let alpha_bar = rng.random_range(0.2..3.0);
        let xu_bar = rng.random_range(0.0..0.6);
        let y_a = rng.random_range(0.5..10.0);
        let r = rng.random_range(theta_bar + 0.01..0.99);
        let statics = StaticParams::new(theta_bar, alpha_bar, xu_bar).unwrap();
        let spec = CurveSpec::new(AnchorPoint::new(r * y_a, y_a).unwrap(), statics).unwrap();
        let p = spec.params().unwrap();
        let reference = RefCurve::new(r * y_a, y_a, theta_bar, alpha_bar / y_a, xu_bar * y_a);
        let tol = 1e-7 * y_a;
        assert!(close(p.alpha * y_a, reference.alpha * y_a, 1e-7), "{p:?} vs {reference:?}");
        assert!(close(p.x_u, reference.x_u, tol), "{p:?} vs {reference:?}");
        // the decay stop is a tangency when it reaches the supply
        assert!(close(p.x_l, reference.x_l, 1e-4 * y_a), "{p:?} vs {reference:?}");
        assert!(close(p.r_l, reference.r_l, 1e-7), "{p:?} vs {reference:?}");
        for i in 0..=10 {
            let x = (y_a * i as f64 / 10.0).min(y_a);
            assert!(close(spec.reserve_at(x).unwrap(), reference.reserve(x), 1e-7 * y_a), "x = {x}");
        }
    }
}

#[test]
fn threshold_examples() {
    assert!(close(ba_for_xu_threshold(0.3, 0.8, 1.0, 0.3), 0.804, 1e-12));
    assert!(close(ba_for_xu_threshold(0.0, 0.8, 1.0, 0.3), 0.60625, 1e-12));
    assert!(close(ba_for_xu_threshold(1.0, 0.8, 1.0, 0.3), 1.0, 0.0));
    // defining property: the flat length at the threshold anchor is z
    assert!(close(compute_xu_hat(0.8, &anchor(0.804), 0.3).unwrap(), 0.3, 1e-12));
    assert!(close(xu_hat_by_bisection(0.8, 0.60625, 1.0, 0.3), 0.0, 1e-9));

    let t = precompute(&fig5()).unwrap();
    assert!(close(t.ba_I_II, 0.804, 1e-12));
    assert!(close(t.ba_II_III, 0.60625, 1e-12));
    assert!(close(t.ba_h_l, 0.69375, 1e-12));
    assert!(close(t.ba_H_L, 0.65, 1e-12));
    assert!(close(t.alpha_H_L, 0.7, 1e-12));
    // the I/II boundary curve is tangent at the end of the supply
    let c = find_crossing(t.ba_I_II, 1.0, 0.8, 0.3).unwrap();
    assert!(close(t.xl_I_II, 1.0, 1e-7) && close(c.x_l, 1.0, 1e-6));
    assert!(close(t.xu_h_l, xu_hat_by_bisection(0.8, t.ba_h_l, 1.0, 0.3), 1e-9));
    assert!(verify_precomputed(&fig5(), &t));

    let mut bad = t;
    bad.ba_I_II += 1e-3;
    assert!(!verify_precomputed(&fig5(), &bad));

    let steep = StaticParams::new(0.3, 1.3, 0.3).unwrap();
    let t = precompute(&steep).unwrap();
    assert!(verify_precomputed(&steep, &t));
    assert!(close(t.ba_H_L, 0.65, 1e-15));
}

#[test]
fn region_examples() {
    let s = fig5();
    let region = |b_a: f64, x: f64| classify_from_anchor(&anchor(b_a), &s, x).unwrap().to_string();
    assert_eq!(region(0.9, 0.4), "I ii");
    assert_eq!(region(0.9, 0.1), "I i");
    assert_eq!(region(0.60, 0.2), "III L ii");
    assert!(compute_alpha_hat(&anchor(0.60), 0.3).unwrap() > 0.8);
    assert!(alpha_hat_by_bisection(0.60, 1.0, 0.3) > 0.8);

    let t = precompute(&s).unwrap();
    assert_eq!(detect_region(&st(0.4, 0.504, 0.6), &t, &s).unwrap().to_string(), "I ii");
    assert_eq!(detect_region(&st(0.1, 0.8, 0.9), &t, &s).unwrap().to_string(), "I i");
}

#[test]
fn reconstruction_examples() {
    let s = fig5();
    let at = |state: SystemState, r: &str| reconstruct_ba(&state, r.parse().unwrap(), &s).unwrap();
    assert!(close(at(st(0.2, 0.7, 0.8), "I i"), 0.9, 1e-15));
    assert!(close(at(st(0.4, 0.504, 0.6), "I ii"), 0.9, 1e-12));
    let spec = CurveSpec::new(anchor(0.9), s).unwrap();
    let b = spec.reserve_at(0.6).unwrap();
    assert!(close(at(st(0.6, b, 0.4), "I iii"), 0.9, 1e-12));
    assert!(close(at(st(0.6, 0.332768, 0.4), "I iii"), 0.9, 1e-6));
}

#[test]
fn normalization_examples() {
    let (n, scale) = normalize_state(&st(0.8, 1.008, 1.2)).unwrap();
    assert_eq!(scale, 2.0);
    assert!(close(n.x, 0.4, 1e-15) && close(n.b, 0.504, 1e-15) && close(n.y, 0.6, 1e-15));
    let (n, scale) = normalize_state(&st(0.0, 5.0, 10.0)).unwrap();
    assert_eq!((n.x, n.b, n.y, scale), (0.0, 0.5, 1.0, 10.0));
    assert!(close(denormalize_value(0.396, 10.0), 3.96, 1e-15));
    assert_eq!(denormalize_value(0.9, 2.0), 1.8);

    let t = precompute(&fig5()).unwrap();
    let small = redeem(&st(0.4, 0.504, 0.6), 0.1, &fig5(), &t).unwrap();
    let large = redeem(&st(0.8, 1.008, 1.2), 0.2, &fig5(), &t).unwrap();
    assert!(close(large.payout, 2.0 * small.payout, 1e-15));
}

#[test]
fn redemption_examples() {
    let s = fig5();
    let t = precompute(&s).unwrap();
    let q = redeem(&st(0.0, 0.9, 1.0), 0.4, &s, &t).unwrap();
    assert!(close(q.payout, 0.396, 1e-12));
    assert!(close(q.state.x, 0.4, 0.0) && close(q.state.b, 0.504, 1e-12) && close(q.state.y, 0.6, 1e-15));
    assert!(q.ops.sqrt <= 2);

    let reference = RefCurve::new(0.9, 1.0, 0.3, 0.8, 0.3);
    assert!(close(payout_by_quadrature(&reference, 0.0, 0.4), 0.396, 1e-10));

    let q = redeem(&st(0.0, 0.9, 1.0), 0.0, &s, &t).unwrap();
    assert_eq!(q.payout, 0.0);
    assert_eq!(q.state, st(0.0, 0.9, 1.0));

    let q = redeem(&st(0.2, 0.2, 0.8), 0.4, &s, &t).unwrap();
    assert!(close(q.payout, 0.1, 1e-15));
    assert!(close(q.state.b, 0.1, 1e-15) && close(q.state.x, 0.6, 1e-15) && close(q.state.y, 0.4, 1e-15));
}

#[test]
fn fixed_point_redemption_is_exact() {
    let s: StaticParams<Fixed18> = fig5().convert().unwrap();
    let t = precompute(&s).unwrap();
    let dec = |v: &str| Fixed18::parse_decimal(v).unwrap();
    let state = SystemState::new(dec("0"), dec("0.9"), dec("1")).unwrap();
    let q = redeem(&state, dec("0.4"), &s, &t).unwrap();
    assert_eq!(q.payout.to_decimal(), "0.396");
    assert_eq!(q.state.b.to_decimal(), "0.504");
}

#[test]
fn ode_oracle_examples() {
    let s = fig5();
    let got = ode_redeem_oracle(&st(0.0, 0.9, 1.0), 0.4, &s, 1e-10).unwrap();
    assert!(close(got, 0.396, 1e-8));
    let flat = ode_redeem_oracle(&st(0.0, 0.9, 1.0), 0.2, &s, 1e-10).unwrap();
    assert!(close(flat, 0.2, 1e-10));
    let over = ode_redeem_oracle(&st(0.0, 1.2, 1.0), 0.3, &s, 1e-10).unwrap();
    assert!(close(over, 0.3, 1e-10));
}

#[test]
fn analytic_payout_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let theta_bar = rng.random_range(0.05..0.6);
        let statics = StaticParams::new(theta_bar, rng.random_range(0.2..3.0), rng.random_range(0.0..0.6)).unwrap();
        let y_a = rng.random_range(0.5..10.0);
        let b_a = rng.random_range(theta_bar + 0.01..0.99) * y_a;
        let spec = CurveSpec::new(AnchorPoint::new(b_a, y_a).unwrap(), statics).unwrap();
        let x0 = rng.random_range(0.0..0.9) * y_a;
        let x1 = x0 + rng.random_range(0.0..1.0) * (y_a - x0);
        let state = SystemState::new(x0, spec.reserve_at(x0).unwrap(), y_a - x0).unwrap();
        if state.b <= theta_bar * state.y * (1.0 + 1e-9) {
            continue;
        }
        let t = precompute(&statics).unwrap();
        let q = redeem(&state, x1 - x0, &statics, &t).unwrap();
        let p = spec.params().unwrap();
        let reference = RefCurve { b_a, y_a, alpha: p.alpha, x_u: p.x_u, x_l: p.x_l, r_l: p.r_l };
        let want = payout_by_quadrature(&reference, x0, x1);
        assert!(close(q.payout, want, 1e-9 * y_a), "{} vs {want}", q.payout);
    }
}

#[test]
fn discrete_examples() {
    let a = anchor(0.8);
    let open = discrete_xu(&a, 0.3, f64::INFINITY);
    assert!(close(open, 0.5 / 0.7, 1e-12));
    assert!(close(discrete_reference(0.8, 1.0, 0.3, f64::INFINITY).0, open, 1e-9));
    assert_eq!(discrete_xu(&a, 0.3, 0.3), 0.3);
    assert_eq!(discrete_xu(&anchor(0.2), 0.3, 0.3), 0.0);

    let spec = DiscreteSpec::with_cap(a, 0.3, 0.3);
    let (x_u, r_u) = discrete_reference(0.8, 1.0, 0.3, 0.3);
    assert!(close(spec.x_u, x_u, 1e-12) && close(spec.r_u, r_u, 1e-12));
    assert!(close(spec.r_u, 0.714286, 1e-6));
    assert!(close(spec.reserve_at(0.2).unwrap(), 0.6, 1e-15));
    assert!(close(spec.reserve_at(0.5).unwrap(), 0.357143, 1e-6));
    assert!(spec.reserve_at(1.0).unwrap().abs() < 1e-15);

    let s = fig5();
    let (b_a, _) = discrete_reconstruct(&st(0.2, 0.6, 0.8), &s).unwrap();
    assert!(close(b_a, 0.8, 1e-15));
    let b = spec.reserve_at(0.5).unwrap();
    let (b_a, _) = discrete_reconstruct(&st(0.5, b, 0.5), &s).unwrap();
    assert!(close(b_a, 0.8, 1e-12));

    let fresh = st(0.0, 0.8, 1.0);
    assert!(close(discrete_redeem(&fresh, 0.2, &s).unwrap().payout, 0.2, 1e-15));
    let q = discrete_redeem(&fresh, 0.5, &s).unwrap();
    assert!(close(q.payout, 0.3 + 0.2 * 0.5 / 0.7, 1e-12));
    assert!(close(q.payout, 0.442857, 1e-6));
    assert_eq!(q.ops.sqrt, 0);
    let q = discrete_redeem(&fresh, 1.0, &s).unwrap();
    assert!(close(q.payout, 0.8, 1e-15));
}

#[test]
fn path_examples() {
    let s = fig5();
    let fresh = st(0.0, 0.9, 1.0);
    let trace = apply_path(&fresh, &[TradeAction::redeem(0.4)], &FeeConfig::default(), &s);
    assert!(close(trace.total_payout(), 0.396, 1e-12));

    let trace = apply_path(&fresh, &[TradeAction::redeem(0.4), TradeAction::mint(0.1)], &FeeConfig::default(), &s);
    let fin = trace.final_state();
    assert!(close(fin.x, 0.3, 1e-15) && close(fin.b, 0.604, 1e-12) && close(fin.y, 0.7, 1e-15));
    assert!(trace.steps[1].r_a > 0.9);

    let empty = apply_path(&fresh, &[], &FeeConfig::default(), &s);
    assert!(empty.steps.is_empty() && empty.final_state() == fresh);

    let r = check_split(&fresh, &[0.2, 0.2], &s).unwrap();
    assert!(close(r.split_payout, 0.396, 1e-12) && r.payout_deviation < 1e-12);
    let r = check_split(&fresh, &[0.4], &s).unwrap();
    assert_eq!(r.payout_deviation, 0.0);

    let next = advance_block(&st(0.4, 0.504, 0.6), 0.9).unwrap();
    assert!(close(next.x, 0.36, 1e-15) && next.b == 0.504 && next.y == 0.6);
    assert_eq!(advance_block(&st(0.4, 0.504, 0.6), 1.0).unwrap(), st(0.4, 0.504, 0.6));
    assert_eq!(advance_block(&st(0.4, 0.504, 0.6), 0.0).unwrap().x, 0.0);
}

#[test]
fn fee_paths() {
    let s = fig5();
    let fresh = st(0.0, 0.9, 1.0);
    let spread = FeeConfig::proportional(0.0, 1.01).unwrap();
    let trace = apply_path(&fresh, &[TradeAction::mint(0.1), TradeAction::redeem(0.1)], &spread, &s);
    assert!(trace.final_state().b >= fresh.b);
    assert!(trace.steps.iter().all(|st| st.r_a >= 0.9 - 1e-12));
    assert!(close(trace.trader_net(), -0.001, 1e-12));

    let fee = FeeConfig::proportional(0.003, 1.0).unwrap();
    let split = apply_path(&fresh, &[TradeAction::redeem(0.2), TradeAction::redeem(0.25)], &fee, &s);
    let single = apply_path(&fresh, &[TradeAction::redeem(0.45)], &fee, &s);
    assert!(close(split.total_payout(), single.total_payout(), 1e-9));

    let nofee = apply_path(&fresh, &[TradeAction::redeem(0.2), TradeAction::redeem(0.3)], &FeeConfig::default(), &s);
    assert!(nofee.steps.iter().all(|st| close(st.r_a, 0.9, 1e-12)));
}
