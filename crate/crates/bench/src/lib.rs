//! Shared inputs for the engine benchmarks.

use pamm_core::{Scalar, StaticParams, SystemState};

pub fn statics<S: Scalar>() -> StaticParams<S> {
    StaticParams::new(S::from_ratio(3, 10), S::from_ratio(4, 5), S::from_ratio(3, 10)).unwrap()
}

/// One state per major case, plus a state sitting on the terminal ratio.
pub fn states<S: Scalar>() -> Vec<(&'static str, SystemState<S>)> {
    let st = |x: f64, b: f64| SystemState::new(S::from_f64(x), S::from_f64(b), S::from_f64(1.0 - x)).unwrap();
    vec![
        ("flat", st(0.1, 0.8)),
        ("decay", st(0.45, 0.46)),
        ("steep", st(0.2, 0.34)),
        ("tail", st(0.9, 0.035)),
    ]
}
