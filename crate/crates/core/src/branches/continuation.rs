use super::{BifurcationPoint, BranchKind, BranchPoint};
use crate::error::{Error, Result};
use crate::shooting::{determinant, ShootingContext, ShootingPoint};
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// Why one continuation direction stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuationStop {
    MaxSteps,
    LambdaMax,
    DomainExit,
    CorrectorDiverged,
}

/// The non-symmetric branch through a secondary bifurcation point, traced in
/// both directions from the origin.
#[derive(Debug, Clone, Serialize)]
pub struct SecondaryBranch {
    pub origin: BifurcationPoint,
    pub forward: Vec<BranchPoint>,
    pub backward: Vec<BranchPoint>,
    pub stop_forward: ContinuationStop,
    pub stop_backward: ContinuationStop,
}

impl SecondaryBranch {
    /// Points ordered along the curve: backward (reversed), then forward.
    pub fn points(&self) -> Vec<BranchPoint> {
        self.backward.iter().rev().chain(self.forward.iter()).copied().collect()
    }

    /// The image under `(β₁, β₂) ↦ (−β₁, −β₂)`.
    pub fn mirrored(&self) -> SecondaryBranch {
        SecondaryBranch {
            origin: self.origin.mirrored(),
            forward: self.forward.iter().map(BranchPoint::mirrored).collect(),
            backward: self.backward.iter().map(BranchPoint::mirrored).collect(),
            stop_forward: self.stop_forward,
            stop_backward: self.stop_backward,
        }
    }
}

const MAX_STEP: f64 = 0.05;
const MAX_HALVINGS: usize = 8;
const NEWTON_ITERS: usize = 12;
const RESIDUAL_TOL: f64 = 1e-11;

struct System<'a> {
    sc: &'a ShootingContext,
    beta_cap: f64,
}

struct Eval {
    f: [f64; 2],
    jac: [[f64; 3]; 2],
    p1: ShootingPoint,
    p2: ShootingPoint,
}

impl System<'_> {
    fn inside(&self, x: &Vector3<f64>) -> bool {
        x[0] > 0.0 && x[1].abs() < self.beta_cap && x[2].abs() < self.beta_cap
    }

    fn eval(&self, x: &Vector3<f64>) -> Result<Eval> {
        let p1 = self.sc.point(x[0], x[1])?;
        let p2 = self.sc.point(x[0], x[2])?;
        Ok(Eval {
            f: [p1.p - p2.p, p1.q + p2.q],
            jac: [
                [p1.p_lambda - p2.p_lambda, p1.p_beta, -p2.p_beta],
                [p1.q_lambda + p2.q_lambda, p1.q_beta, p2.q_beta],
            ],
            p1,
            p2,
        })
    }

    /// Newton on `F = 0`, `t·(x − x_prev) = s`, with step damping.
    fn correct(
        &self,
        x_prev: &Vector3<f64>,
        t: &Vector3<f64>,
        s: f64,
    ) -> std::result::Result<(Vector3<f64>, Eval, usize), ContinuationStop> {
        let mut x = x_prev + t * s;
        if !self.inside(&x) {
            return Err(ContinuationStop::DomainExit);
        }
        let norm = |e: &Eval, x: &Vector3<f64>| {
            let arc = t.dot(&(x - x_prev)) - s;
            (e.f[0] * e.f[0] + e.f[1] * e.f[1] + arc * arc).sqrt()
        };
        let mut ev = self.eval(&x).map_err(|_| ContinuationStop::CorrectorDiverged)?;
        let mut res = norm(&ev, &x);
        for it in 1..=NEWTON_ITERS {
            let m = Matrix3::new(
                ev.jac[0][0], ev.jac[0][1], ev.jac[0][2],
                ev.jac[1][0], ev.jac[1][1], ev.jac[1][2],
                t[0], t[1], t[2],
            );
            let rhs = -Vector3::new(ev.f[0], ev.f[1], t.dot(&(x - x_prev)) - s);
            let dx = m.lu().solve(&rhs).ok_or(ContinuationStop::CorrectorDiverged)?;
            let mut damping = 1.0;
            let (x_new, ev_new, res_new) = loop {
                let cand = x + dx * damping;
                if self.inside(&cand) {
                    if let Ok(e) = self.eval(&cand) {
                        let r = norm(&e, &cand);
                        if r < res || damping < 1.0 / 16.0 {
                            break (cand, e, r);
                        }
                    }
                }
                damping *= 0.5;
                if damping < 1.0 / 64.0 {
                    return Err(ContinuationStop::CorrectorDiverged);
                }
            };
            let step = (x_new - x).norm();
            x = x_new;
            ev = ev_new;
            res = res_new;
            if res < RESIDUAL_TOL && step < 1e-9 {
                return Ok((x, ev, it));
            }
        }
        if res < RESIDUAL_TOL {
            Ok((x, ev, NEWTON_ITERS))
        } else {
            Err(ContinuationStop::CorrectorDiverged)
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> Vector3<f64> {
    Vector3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

fn to_point(origin: &BifurcationPoint, x: &Vector3<f64>, ev: &Eval) -> BranchPoint {
    BranchPoint {
        lambda: x[0],
        beta1: x[1],
        beta2: x[2],
        k: origin.k,
        kind: BranchKind::Secondary,
        d: determinant(&ev.p1, &ev.p2),
        morse: None,
    }
}

/// Pseudo-arclength continuation of `(P(λ,β₁) − P(λ,β₂), Q(λ,β₁) + Q(λ,β₂)) = 0`
/// from a secondary bifurcation point, in both directions.
///
/// The initial tangent spans the kernel of the rank-one Jacobian at the
/// origin orthogonally to the primary branch tangent `(dλ/dβ, 1, −1)`. Steps
/// start at `step·β₀`, double after four clean corrector solves (capped at
/// 0.05) and halve on failure up to eight times.
pub fn trace_secondary(
    sc: &ShootingContext,
    origin: &BifurcationPoint,
    step: f64,
    n_steps: usize,
    lambda_max: f64,
) -> Result<SecondaryBranch> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("continuation step must be positive".into()));
    }
    let system = System {
        sc,
        beta_cap: sc.beta0() * (1.0 - 1e-9),
    };
    let b = origin.beta_star;
    let x0 = Vector3::new(origin.lambda_star, b, -b);
    let ev0 = system.eval(&x0)?;
    let dl = sc.dlambda_dbeta_odd(b, origin.k)?;
    let t_primary = [dl, 1.0, -1.0];
    let row = if ev0.jac[0].iter().map(|v| v * v).sum::<f64>() >= ev0.jac[1].iter().map(|v| v * v).sum::<f64>() {
        ev0.jac[0]
    } else {
        ev0.jac[1]
    };
    let mut t0 = cross(row, t_primary);
    if !(t0.norm() > 1e-14) {
        t0 = Vector3::new(0.0, 1.0, 1.0);
    }
    t0 /= t0.norm();
    let h0 = step * sc.beta0();

    let run = |dir: f64| -> (Vec<BranchPoint>, ContinuationStop) {
        let mut pts = Vec::new();
        let mut x = x0;
        let mut t = t0 * dir;
        let mut h = h0;
        let mut clean = 0;
        while pts.len() < n_steps {
            let mut attempt = 0;
            let outcome = loop {
                match system.correct(&x, &t, h) {
                    Ok(ok) => break Ok(ok),
                    Err(reason) => {
                        attempt += 1;
                        if attempt > MAX_HALVINGS {
                            break Err(reason);
                        }
                        h *= 0.5;
                        clean = 0;
                    }
                }
            };
            let (x_new, ev, iters) = match outcome {
                Ok(v) => v,
                Err(reason) => return (pts, reason),
            };
            let mut t_new = cross(ev.jac[0], ev.jac[1]);
            let nrm = t_new.norm();
            if nrm > 0.0 {
                t_new /= nrm;
            } else {
                t_new = t;
            }
            if t_new.dot(&(x_new - x)) < 0.0 {
                t_new = -t_new;
            }
            pts.push(to_point(origin, &x_new, &ev));
            x = x_new;
            t = t_new;
            if x[0] > lambda_max {
                return (pts, ContinuationStop::LambdaMax);
            }
            if iters <= 4 {
                clean += 1;
                if clean >= 4 {
                    h = (2.0 * h).min(MAX_STEP);
                    clean = 0;
                }
            } else {
                clean = 0;
            }
        }
        (pts, ContinuationStop::MaxSteps)
    };

    let ((forward, stop_forward), (backward, stop_backward)) = rayon::join(|| run(1.0), || run(-1.0));
    Ok(SecondaryBranch {
        origin: *origin,
        forward,
        backward,
        stop_forward,
        stop_backward,
    })
}
