//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

/// Integrates `y′ = f(x, y)` from `x0` to `x1` (either direction), calling
/// `observe` after every accepted step. Returns the state at `x1`.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    tol: Tolerances,
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N]> {
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    if span == 0.0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = (span * 1e-3).min(tol.max_step);
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, &y);
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::ToleranceNotMet {
                op: "ode integrate",
                estimate: h,
                requested: tol.rtol,
            });
        }
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[s] = f(x + C[s] * hs, &ys);
        }
        let mut y_new = y;
        for i in 0..N {
            for (s, ks) in k.iter().enumerate().take(6) {
                y_new[i] += hs * A[6][s] * ks[i];
            }
        }
        let mut err = 0.0;
        for i in 0..N {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * hs;
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if err <= 1.0 || h < 1e-14 * span {
            x = if last { x1 } else { x + hs };
            y = y_new;
            // first-same-as-last: k7 is f at the new point
            k[0] = k[6];
            observe(x, &y);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(tol.max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let tol = Tolerances {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: 0.1,
        };
        let y = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, tol, |_, _| {}).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        let back = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 10.0, y, 0.0, tol, |_, _| {}).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-10);
    }
}
