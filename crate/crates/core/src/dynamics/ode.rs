//! Embedded Dormand–Prince 5(4) stepper with mandatory breakpoints.

use crate::error::{PammError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: rel * 1e-3 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

// fee paths pinned near the floor are stiff and stability-bound
const MAX_STEPS: usize = 2_000_000;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`, in either direction.
///
/// Each breakpoint strictly between the endpoints starts a fresh segment,
/// so that kinks in the right-hand side are never stepped over.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let forward = t1 >= t0;
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| if forward { b > t0 && b < t1 } else { b < t0 && b > t1 })
        .collect();
    cuts.sort_by(|a, b| if forward { a.total_cmp(b) } else { b.total_cmp(a) });
    cuts.push(t1);

    let mut t = t0;
    let mut y = y0;
    for end in cuts {
        y = segment(&mut f, t, y, end, tol)?;
        t = end;
    }
    Ok(y)
}

fn segment<const N: usize, F>(f: &mut F, t0: f64, y0: [f64; N], t1: f64, tol: Tolerance) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = span;
    let mut k1 = f(t, &y)?;
    for _ in 0..MAX_STEPS {
        let remaining = t1 - t;
        if remaining == 0.0 || remaining.abs() <= 1e-15 * t1.abs().max(1.0) {
            return Ok(y);
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                *v += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut next = y;
        let mut err = 0.0_f64;
        for i in 0..N {
            next[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = tol.abs + tol.rel * y[i].abs().max(next[i].abs());
            let ratio = (e / scale).abs();
            // f64::max drops NaN, so reject non-finite steps explicitly
            err = if ratio.is_finite() && next[i].is_finite() { err.max(ratio) } else { f64::INFINITY };
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if h == remaining { t1 } else { t + h };
            y = next;
            k1 = k[6];
            h *= factor;
        } else {
            h *= factor.min(1.0);
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(PammError::IntegrationFailure { x: t, step: h });
        }
    }
    Err(PammError::IntegrationFailure { x: t, step: h })
}
