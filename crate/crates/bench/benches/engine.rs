use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pamm_bench::{states, statics};
use pamm_core::discrete::discrete_redeem;
use pamm_core::dynamics::ode_redeem_oracle;
use pamm_core::reconstruct::{reconstruct_curve, redeem};
use pamm_core::region::{detect_region, precompute};
use pamm_core::state::normalize_state;
use pamm_core::{Fixed18, Scalar};

fn engine<S: Scalar>(c: &mut Criterion, mode: &str) {
    let p = statics::<S>();
    let t = precompute(&p).unwrap();
    let mut g = c.benchmark_group(mode);

    g.bench_function("precompute", |b| b.iter(|| precompute(black_box(&p)).unwrap()));
    for (name, s) in states::<S>() {
        let amount = s.y * S::from_ratio(1, 10);
        let (n, _) = normalize_state(&s).unwrap();
        g.bench_with_input(BenchmarkId::new("detect", name), &n, |b, n| {
            b.iter(|| detect_region(black_box(n), &t, &p))
        });
        g.bench_with_input(BenchmarkId::new("reconstruct", name), &s, |b, s| {
            b.iter(|| reconstruct_curve(black_box(s), &p, &t).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("redeem", name), &s, |b, s| {
            b.iter(|| redeem(black_box(s), amount, &p, &t).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("discrete", name), &s, |b, s| {
            b.iter(|| discrete_redeem(black_box(s), amount, &p).unwrap())
        });
    }
    g.finish();
}

fn float(c: &mut Criterion) {
    engine::<f64>(c, "f64");
}

fn fixed(c: &mut Criterion) {
    engine::<Fixed18>(c, "fixed18");
}

fn ode(c: &mut Criterion) {
    let p = statics::<f64>();
    let mut g = c.benchmark_group("ode");
    g.sample_size(20);
    for (name, s) in states::<f64>() {
        g.bench_with_input(BenchmarkId::new("oracle", name), &s, |b, s| {
            b.iter(|| ode_redeem_oracle(black_box(s), 0.1 * s.y, &p, 1e-10).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, float, fixed, ode);
criterion_main!(benches);
