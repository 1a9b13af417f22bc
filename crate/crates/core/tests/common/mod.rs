//! Brute-force references built only from the price law: price one up to
//! `x_u`, then falling with slope `alpha` until it meets the reserve ratio,
//! then held at that ratio.

#![allow(dead_code)]

/// Where a linear decay from `x_u` meets the reserve ratio.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub x_l: f64,
    pub r_l: f64,
}

/// Reserve left at `x` while still on the flat or decaying segment,
/// by trapezoid quadrature of the price on `steps` panels.
pub fn reserve_by_quadrature(b_a: f64, alpha: f64, x_u: f64, x: f64, steps: usize) -> f64 {
    let price = |z: f64| if z <= x_u { 1.0 } else { 1.0 - alpha * (z - x_u) };
    let mut paid = 0.0;
    // split at the kink so each panel integrates a linear function
    for (lo, hi) in [(0.0, x.min(x_u)), (x.min(x_u), x)] {
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / steps as f64;
        for i in 0..steps {
            let a = lo + h * i as f64;
            paid += 0.5 * h * (price(a) + price(a + h));
        }
    }
    b_a - paid
}

/// First level past `x_u` where price falls to the reserve ratio.
/// `None` when the reserve runs out before the supply does.
pub fn find_crossing(b_a: f64, y_a: f64, alpha: f64, x_u: f64) -> Option<Crossing> {
    let b = |x: f64| b_a - x_u.min(x) - if x > x_u { (x - x_u) - 0.5 * alpha * (x - x_u).powi(2) } else { 0.0 };
    let gap = |x: f64| b(x) - (1.0 - alpha * (x - x_u)) * (y_a - x);
    if x_u >= y_a {
        return None;
    }
    // the ratio sits below the price until the crossing; gap rises on [x_u, y_a]
    // and equals the leftover reserve at y_a
    if gap(y_a) < -1e-14 * y_a {
        return None;
    }
    let (mut lo, mut hi) = (x_u, y_a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_l = 0.5 * (lo + hi);
    Some(Crossing { x_l, r_l: 1.0 - alpha * (x_l - x_u) })
}

/// Whether a decay with these parameters reaches the ratio without dropping below the floor.
pub fn admissible(b_a: f64, y_a: f64, alpha: f64, x_u: f64, theta_bar: f64) -> bool {
    find_crossing(b_a, y_a, alpha, x_u).is_some_and(|c| c.r_l >= theta_bar - 1e-13)
}

/// Smallest admissible slope with no flat segment.
pub fn alpha_hat_by_bisection(b_a: f64, y_a: f64, theta_bar: f64) -> f64 {
    let (mut lo, mut hi) = (1e-9 / y_a, 1e3 / y_a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if admissible(b_a, y_a, mid, 0.0, theta_bar) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Longest admissible flat segment for a given slope.
pub fn xu_hat_by_bisection(alpha: f64, b_a: f64, y_a: f64, theta_bar: f64) -> f64 {
    if !admissible(b_a, y_a, alpha, 0.0, theta_bar) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, y_a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if admissible(b_a, y_a, alpha, mid, theta_bar) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Reference curve for statics `(theta_bar, alpha_bar, xu_bar)` in absolute units.
#[derive(Debug, Clone, Copy)]
pub struct RefCurve {
    pub b_a: f64,
    pub y_a: f64,
    pub alpha: f64,
    pub x_u: f64,
    pub x_l: f64,
    pub r_l: f64,
}

impl RefCurve {
    pub fn new(b_a: f64, y_a: f64, theta_bar: f64, alpha_bar: f64, xu_bar: f64) -> Self {
        let alpha_hat = alpha_hat_by_bisection(b_a, y_a, theta_bar);
        let (alpha, x_u) = if alpha_hat > alpha_bar {
            (alpha_hat, 0.0)
        } else {
            (alpha_bar, xu_hat_by_bisection(alpha_bar, b_a, y_a, theta_bar).min(xu_bar))
        };
        let c = find_crossing(b_a, y_a, alpha, x_u).expect("admissible by construction");
        Self { b_a, y_a, alpha, x_u, x_l: c.x_l, r_l: c.r_l }
    }

    pub fn price(&self, x: f64) -> f64 {
        if x <= self.x_u {
            1.0
        } else if x <= self.x_l {
            1.0 - self.alpha * (x - self.x_u)
        } else {
            self.r_l
        }
    }

    pub fn reserve(&self, x: f64) -> f64 {
        if x <= self.x_l {
            reserve_by_quadrature(self.b_a, self.alpha, self.x_u, x, 2000)
        } else {
            let at_l = reserve_by_quadrature(self.b_a, self.alpha, self.x_u, self.x_l, 2000);
            at_l - self.r_l * (x - self.x_l)
        }
    }
}

/// Payout of redeeming from `x0` to `x1` by Simpson quadrature of the price,
/// with the kinks as panel edges.
pub fn payout_by_quadrature(c: &RefCurve, x0: f64, x1: f64) -> f64 {
    let mut edges = vec![x0];
    for k in [c.x_u, c.x_l] {
        if k > x0 && k < x1 {
            edges.push(k);
        }
    }
    edges.push(x1);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = 64;
        let h = (b - a) / n as f64;
        let mut s = c.price(a) + c.price(b);
        for i in 1..n {
            let f = c.price(a + h * i as f64);
            s += if i % 2 == 1 { 4.0 * f } else { 2.0 * f };
        }
        total += s * h / 3.0;
    }
    total
}

/// Price of the discrete variant: one up to `x_u`, then constant.
pub fn discrete_reference(b_a: f64, y_a: f64, theta_bar: f64, xu_bar: f64) -> (f64, f64) {
    // longest flat length keeping the remaining ratio at or above the floor
    let (mut lo, mut hi) = (0.0, y_a.min(xu_bar));
    if (b_a - hi) / (y_a - hi) >= theta_bar {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (b_a - mid) / (y_a - mid) >= theta_bar {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let x_u = if b_a <= theta_bar * y_a { 0.0 } else { lo };
    (x_u, (b_a - x_u) / (y_a - x_u))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
