//! Brute-force reference computations that share no code with the
//! time-map machinery: fixed-step RK4 integration of the two initial value
//! problems, plain bisection roots, a grid scan of the matching system and
//! tanh-sinh quadrature.

mod scan;
mod tanh_sinh;

pub use scan::{classify_cells, known_solutions, scan_solution_set, CellClass, KnownSolution, ScanCell, ScanResult};
pub use tanh_sinh::{tanh_sinh, time_map_oracle};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use serde::Serialize;

/// Largest relative drift of `u_x² + λF(u)` accepted by [`integrate_ivp`].
pub const ENERGY_DRIFT_BOUND: f64 = 1e-10;
const MAX_STEPS: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// start at x = −1, end at x = −0
    Left,
    /// start at x = 1, end at x = +0
    Right,
}

/// Fixed-step solution of one half-interval problem, stored in increasing x.
#[derive(Debug, Clone, Serialize)]
pub struct IvpSolution {
    pub lambda: f64,
    pub side: Side,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub steps: usize,
    /// relative energy drift over the run
    pub drift: f64,
}

impl IvpSolution {
    /// Value and slope at the inner end x = ∓0.
    pub fn inner(&self) -> (f64, f64) {
        match self.side {
            Side::Left => (*self.u.last().unwrap(), *self.ux.last().unwrap()),
            Side::Right => (self.u[0], self.ux[0]),
        }
    }

    /// Cubic Hermite interpolation of (u, u_x) at `x`, using `u_xx = −λf(u)`
    /// for the slope derivative.
    pub fn at(&self, nl: &Nonlinearity, x: f64) -> (f64, f64) {
        let n = self.x.len() - 1;
        let x0 = self.x[0];
        let h = (self.x[n] - x0) / n as f64;
        let t = ((x - x0) / h).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        let (u0, u1, d0, d1) = (self.u[i], self.u[i + 1], self.ux[i], self.ux[i + 1]);
        let (a0, a1) = (-self.lambda * nl.f(u0), -self.lambda * nl.f(u1));
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let u = h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1;
        // the slope gets its own Hermite interpolant from u_xx data
        let ux = h00 * d0 + h10 * h * a0 + h01 * d1 + h11 * h * a1;
        (u, ux)
    }
}

/// `G(β)` by plain bisection of `F(u) = β²` on [0, 1), signed like β.
pub fn g_oracle(nl: &Nonlinearity, beta: f64) -> Result<f64> {
    let b0 = nl.beta0();
    if !(beta.abs() < b0) {
        return Err(Error::Domain {
            op: "g_oracle",
            value: beta,
            reason: "|beta| must be below beta0",
        });
    }
    if beta == 0.0 {
        return Ok(0.0);
    }
    let target = beta * beta;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nl.eval_energy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(beta.signum() * 0.5 * (lo + hi))
}

fn rk4_run(nl: &Nonlinearity, lambda: f64, u0: f64, dir: f64, steps: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let h = dir / steps as f64;
    let rhs = |y: [f64; 2]| [y[1], -lambda * nl.f(y[0])];
    let energy = |y: [f64; 2]| y[1] * y[1] + lambda * nl.eval_energy(y[0]);
    let mut y = [u0, 0.0];
    let e0 = energy(y);
    let mut us = Vec::with_capacity(steps + 1);
    let mut uxs = Vec::with_capacity(steps + 1);
    us.push(y[0]);
    uxs.push(y[1]);
    let mut drift = 0.0f64;
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        drift = drift.max((energy(y) - e0).abs());
        us.push(y[0]);
        uxs.push(y[1]);
    }
    let rel = if e0 > 0.0 { drift / e0 } else { drift };
    (us, uxs, rel)
}

/// Step-doubling agreement of the inner values required by [`integrate_ivp`].
pub const CONVERGENCE_TOL: f64 = 1e-9;

/// Classical RK4 for `u_xx + λf(u) = 0` from the outer end with
/// `u = G(β)`, `u_x = 0`. The step count starts at `n_steps` and doubles
/// until the relative energy drift is at most [`ENERGY_DRIFT_BOUND`] and the
/// inner values `(u, u_x/√λ)` agree with the half-step-count run to
/// [`CONVERGENCE_TOL`]; the drift alone misses phase errors.
pub fn integrate_ivp(nl: &Nonlinearity, lambda: f64, beta: f64, side: Side, n_steps: usize) -> Result<IvpSolution> {
    if !(lambda > 0.0) {
        return Err(Error::Domain {
            op: "integrate_ivp",
            value: lambda,
            reason: "lambda must be positive",
        });
    }
    let u0 = g_oracle(nl, beta)?;
    let sl = lambda.sqrt();
    let mut steps = n_steps.max(16);
    let dir = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let mut prev: Option<(f64, f64)> = None;
    loop {
        let (mut u, mut ux, drift) = rk4_run(nl, lambda, u0, dir, steps);
        let end = (*u.last().unwrap(), *ux.last().unwrap() / sl);
        let converged = prev.is_some_and(|(pu, pd)| (end.0 - pu).abs().max((end.1 - pd).abs()) <= CONVERGENCE_TOL);
        if drift <= ENERGY_DRIFT_BOUND && converged {
            let mut x: Vec<f64> = (0..=steps).map(|i| -1.0 + i as f64 / steps as f64).collect();
            match side {
                Side::Left => *x.last_mut().unwrap() = 0.0,
                Side::Right => {
                    u.reverse();
                    ux.reverse();
                    x = (0..=steps).map(|i| i as f64 / steps as f64).collect();
                }
            }
            return Ok(IvpSolution {
                lambda,
                side,
                x,
                u,
                ux,
                steps,
                drift,
            });
        }
        if steps >= MAX_STEPS {
            return Err(if drift > ENERGY_DRIFT_BOUND {
                Error::EnergyDrift {
                    op: "integrate_ivp",
                    drift,
                    bound: ENERGY_DRIFT_BOUND,
                }
            } else {
                Error::ToleranceNotMet {
                    op: "integrate_ivp",
                    estimate: prev.map_or(f64::INFINITY, |(pu, pd)| (end.0 - pu).abs().max((end.1 - pd).abs())),
                    requested: CONVERGENCE_TOL,
                }
            });
        }
        prev = Some(end);
        steps *= 2;
    }
}

/// Residuals `u₁(0) + a u₁′(0) − (u₂(0) − a u₂′(0))` and `u₁′(0) − u₂′(0)`
/// from the two integrated half-interval problems.
pub fn matching_residual(nl: &Nonlinearity, a: f64, lambda: f64, beta1: f64, beta2: f64) -> Result<[f64; 2]> {
    let l = integrate_ivp(nl, lambda, beta1, Side::Left, 2000)?;
    let r = integrate_ivp(nl, lambda, beta2, Side::Right, 2000)?;
    let (u1, d1) = l.inner();
    let (u2, d2) = r.inner();
    Ok([u1 + a * d1 - (u2 - a * d2), d1 - d2])
}

/// Named scalar functions for [`root_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootExpr {
    /// `a z tan z − 1`
    ZTanZ { a: f64 },
    Sin,
}

impl RootExpr {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RootExpr::ZTanZ { a } => a * x * x.tan() - 1.0,
            RootExpr::Sin => x.sin(),
        }
    }
}

/// Bisection of a named function to bracket width 1e−14.
pub fn root_oracle(expr: RootExpr, bracket: (f64, f64)) -> Result<f64> {
    bisect_oracle(|x| expr.eval(x), bracket)
}

/// Bisection to bracket width 1e−14 (relative above 1), no derivatives.
pub fn bisect_oracle(f: impl Fn(f64) -> f64, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoSignChange { op: "root_oracle", lo, hi });
    }
    while hi - lo > 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `z_k` for the given `a`: the root of `a z tan z = 1` in `((k−1)π, (k−½)π)`.
pub fn z_oracle(a: f64, k: usize) -> Result<f64> {
    let lo = (k - 1) as f64 * std::f64::consts::PI;
    let hi = lo + std::f64::consts::FRAC_PI_2;
    root_oracle(RootExpr::ZTanZ { a }, (lo + 1e-15, hi - 1e-12))
}
