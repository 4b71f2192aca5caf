//! Reduction of the boundary value problem to the shooting functions
//! `P(λ, β) = G(β cos θ) − a√λ β sin θ` and `Q(λ, β) = −β sin θ`, where θ solves
//! `∫₀^θ G′(β cos τ) dτ = √λ`, together with the mode equation
//! `g(β, φ) = G(β cos φ)/β − a sin φ ∫₀^φ G′(β cos τ) dτ` whose roots φ_k(β)
//! parametrize the odd primary branches.

use crate::error::{Error, Result};
use crate::nonlinearity::GKernel;
use crate::quadrature::{PhaseIntegrator, PhaseOrbit};
use crate::roots;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Kernel, quadrature and interaction strength `a`.
#[derive(Debug, Clone)]
pub struct ShootingContext {
    pi: PhaseIntegrator,
    a: f64,
}

/// Root φ_k(β) of the mode equation in ((k−1)π, (k−½)π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeRoot {
    pub k: usize,
    pub beta: f64,
    pub phi: f64,
    pub residual: f64,
}

/// Shooting functions and their first derivatives at one `(λ, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingPoint {
    pub lambda: f64,
    pub beta: f64,
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub p_beta: f64,
    pub q_beta: f64,
    pub p_lambda: f64,
    pub q_lambda: f64,
}

/// The auxiliary functions R, I, J at `(β, φ)` and `dφ_k/dβ = J/I`.
/// At β = 0, I and J vanish and `dphi_dbeta` holds its limit 0 (`at_limit`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Auxiliary {
    pub r: f64,
    pub i: f64,
    pub j: f64,
    pub dphi_dbeta: f64,
    pub at_limit: bool,
}

impl ShootingContext {
    pub fn new(gk: GKernel, a: f64) -> Result<Self> {
        Self::with_integrator(PhaseIntegrator::new(gk), a)
    }

    pub fn with_integrator(pi: PhaseIntegrator, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interaction strength a must be positive, got {a}"
            )));
        }
        Ok(ShootingContext { pi, a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kernel(&self) -> &GKernel {
        self.pi.kernel()
    }

    pub fn integrator(&self) -> &PhaseIntegrator {
        &self.pi
    }

    pub fn beta0(&self) -> f64 {
        self.kernel().beta0()
    }

    pub fn orbit(&self, beta: f64) -> Result<PhaseOrbit<'_>> {
        self.pi.orbit(beta)
    }

    /// `g(β, φ)`; the quotient `G(β cos φ)/β` is evaluated as
    /// `cos φ · (G/v)(β cos φ)`, which is exact down to β = 0.
    pub fn eval_g(&self, beta: f64, phi: f64) -> Result<f64> {
        let orbit = self.orbit(beta)?;
        Ok(self.g_and_slope(&orbit, phi)?.0)
    }

    /// `g` and `∂g/∂φ = −(1+a) G′(β cos φ) sin φ − a cos φ ∫₀^φ G′`.
    fn g_and_slope(&self, orbit: &PhaseOrbit<'_>, phi: f64) -> Result<(f64, f64)> {
        let integral = orbit.theta_integral(phi)?;
        let kp = orbit.kernel_point(phi);
        let (s, c) = phi.sin_cos();
        let g = c * kp.g_over_v - self.a * s * integral;
        let dg = -(1.0 + self.a) * kp.g1 * s - self.a * c * integral;
        Ok((g, dg))
    }

    /// The root φ_k(β) in ((k−1)π, (k−½)π), |g| < 1e−12 on return.
    pub fn solve_phi_k(&self, beta: f64, k: usize) -> Result<ModeRoot> {
        let orbit = self.orbit(beta)?;
        self.solve_phi_on(&orbit, k)
    }

    fn solve_phi_on(&self, orbit: &PhaseOrbit<'_>, k: usize) -> Result<ModeRoot> {
        if k == 0 {
            return Err(Error::InvalidParameter("mode index k starts at 1".into()));
        }
        let lo = (k as f64 - 1.0) * PI;
        let hi = (k as f64 - 0.5) * PI;
        let (glo, _) = self.g_and_slope(orbit, lo)?;
        let (ghi, _) = self.g_and_slope(orbit, hi)?;
        if glo.signum() == ghi.signum() {
            return Err(Error::Bracket {
                op: "solve_phi_k",
                lo,
                hi,
            });
        }
        // a few bisection steps put Newton inside its basin near both ends of β
        let mut a = lo;
        let mut b = hi;
        let mut ga = glo;
        for _ in 0..6 {
            let m = 0.5 * (a + b);
            let (gm, _) = self.g_and_slope(orbit, m)?;
            if gm.signum() == ga.signum() {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        let phi = roots::safeguarded_newton(
            "solve_phi_k",
            |x| self.g_and_slope(orbit, x),
            a,
            b,
            0.5 * (a + b),
            1e-12,
            1e-13,
        )?;
        let (residual, _) = self.g_and_slope(orbit, phi)?;
        Ok(ModeRoot {
            k,
            beta: orbit.beta(),
            phi,
            residual,
        })
    }

    /// `λ_k^o(β) = (∫₀^{φ_k} G′)²` or `λ_k^e(β) = (∫₀^{kπ} G′)²`.
    pub fn lambda_branch(&self, beta: f64, k: usize, parity: Parity) -> Result<f64> {
        let orbit = self.orbit(beta)?;
        let theta = self.branch_theta(&orbit, k, parity)?;
        let s = orbit.theta_integral(theta)?;
        Ok(s * s)
    }

    /// Phase θ(λ_k(β), β) at a primary branch point.
    pub fn branch_theta(&self, orbit: &PhaseOrbit<'_>, k: usize, parity: Parity) -> Result<f64> {
        match parity {
            Parity::Odd => Ok(self.solve_phi_on(orbit, k)?.phi),
            Parity::Even => {
                if k == 0 {
                    return Err(Error::InvalidParameter("mode index k starts at 1".into()));
                }
                Ok(k as f64 * PI)
            }
        }
    }

    /// θ(λ, β) = Θ(√λ, β).
    pub fn theta(&self, lambda: f64, beta: f64) -> Result<f64> {
        check_lambda(lambda)?;
        self.orbit(beta)?.solve_theta(lambda.sqrt())
    }

    /// All shooting quantities at `(λ, β)`.
    pub fn point(&self, lambda: f64, beta: f64) -> Result<ShootingPoint> {
        check_lambda(lambda)?;
        let orbit = self.orbit(beta)?;
        let theta = orbit.solve_theta(lambda.sqrt())?;
        self.point_at_theta(&orbit, theta, lambda.sqrt())
    }

    /// Shooting quantities when θ is already known; `sqrt_lambda` must equal
    /// `∫₀^θ G′(β cos τ) dτ`.
    pub fn point_at_theta(
        &self,
        orbit: &PhaseOrbit<'_>,
        theta: f64,
        sqrt_lambda: f64,
    ) -> Result<ShootingPoint> {
        let beta = orbit.beta();
        let a = self.a;
        let curv = orbit.curvature_integral(theta)?;
        let kp = orbit.kernel_point(theta);
        let (s, c) = theta.sin_cos();
        let sl = sqrt_lambda;
        let g1 = kp.g1;
        let p = kp.u - a * sl * beta * s;
        let q = -beta * s;
        let q_beta = -s + beta * c / g1 * curv;
        let p_beta = g1 * c - a * sl * s + (beta * s + a * sl * beta * c / g1) * curv;
        let theta_l = 1.0 / (2.0 * sl * g1);
        let p_lambda = -g1 * beta * s * theta_l - a * beta * s / (2.0 * sl) - a * sl * beta * c * theta_l;
        let q_lambda = -beta * c * theta_l;
        Ok(ShootingPoint {
            lambda: sl * sl,
            beta,
            theta,
            p,
            q,
            p_beta,
            q_beta,
            p_lambda,
            q_lambda,
        })
    }

    /// Shooting point on a primary branch, with λ = λ_k(β).
    pub fn branch_point(&self, beta: f64, k: usize, parity: Parity) -> Result<ShootingPoint> {
        let orbit = self.orbit(beta)?;
        let theta = self.branch_theta(&orbit, k, parity)?;
        let sl = orbit.theta_integral(theta)?;
        self.point_at_theta(&orbit, theta, sl)
    }

    pub fn eval_pq(&self, lambda: f64, beta: f64) -> Result<(f64, f64)> {
        let p = self.point(lambda, beta)?;
        Ok((p.p, p.q))
    }

    pub fn eval_pq_beta(&self, lambda: f64, beta: f64) -> Result<(f64, f64)> {
        let p = self.point(lambda, beta)?;
        Ok((p.p_beta, p.q_beta))
    }

    /// Nondegeneracy determinant `P_β(β₁)Q_β(β₂) + Q_β(β₁)P_β(β₂)`.
    pub fn eval_d(&self, lambda: f64, beta1: f64, beta2: f64) -> Result<f64> {
        let p1 = self.point(lambda, beta1)?;
        let p2 = if beta2 == beta1 {
            p1
        } else {
            self.point(lambda, beta2)?
        };
        Ok(determinant(&p1, &p2))
    }

    /// R, I, J at `(β, φ)`.
    pub fn eval_rij(&self, beta: f64, phi: f64) -> Result<Auxiliary> {
        let orbit = self.orbit(beta)?;
        let (s, c) = phi.sin_cos();
        if s == 0.0 || c == 0.0 {
            return Err(Error::Domain {
                op: "eval_RIJ",
                value: phi,
                reason: "sin(phi) and cos(phi) must be nonzero",
            });
        }
        let (k_int, curv) = orbit.integrals(phi)?;
        let kp = orbit.kernel_point(phi);
        let r = -s + beta * c / kp.g1 * curv;
        if beta == 0.0 {
            return Ok(Auxiliary {
                r,
                i: 0.0,
                j: 0.0,
                dphi_dbeta: 0.0,
                at_limit: true,
            });
        }
        // β G′ sin φ / G(β cos φ) = G′ sin φ / (cos φ · G/v)
        let i = beta * ((kp.g1 * s / (c * kp.g_over_v) + c / s) * k_int + kp.g1);
        let j = (kp.g1 / kp.g_over_v - 1.0) * k_int - beta * curv;
        Ok(Auxiliary {
            r,
            i,
            j,
            dphi_dbeta: j / i,
            at_limit: false,
        })
    }

    /// `Q_β(λ_k^o(β), β) = R(β, φ_k(β))`, whose sign changes locate
    /// secondary bifurcations on the odd branch.
    pub fn q_beta_on_odd_branch(&self, beta: f64, k: usize) -> Result<f64> {
        let orbit = self.orbit(beta)?;
        let root = self.solve_phi_on(&orbit, k)?;
        let phi = root.phi;
        let curv = orbit.curvature_integral(phi)?;
        let kp = orbit.kernel_point(phi);
        Ok(-phi.sin() + beta * phi.cos() / kp.g1 * curv)
    }

    /// `dλ_k^o/dβ = 2√λ (G′(β cos φ_k) dφ_k/dβ + ∫₀^{φ_k} G″ cos)`.
    pub fn dlambda_dbeta_odd(&self, beta: f64, k: usize) -> Result<f64> {
        let orbit = self.orbit(beta)?;
        let phi = self.solve_phi_on(&orbit, k)?.phi;
        let (sl, curv) = orbit.integrals(phi)?;
        let aux = self.eval_rij(beta, phi)?;
        let g1 = orbit.kernel_point(phi).g1;
        Ok(2.0 * sl * (g1 * aux.dphi_dbeta + curv))
    }

    /// Both sides of the curvature inequality
    /// `β ∫₀^φ G″ cos > −(G′(β cos φ) cos φ − (G′(β)/G(β)) G(β cos φ)) / sin φ`;
    /// returns `(lhs, bound)`.
    pub fn curvature_bound(&self, beta: f64, phi: f64) -> Result<(f64, f64)> {
        let orbit = self.orbit(beta)?;
        let s = phi.sin();
        if s == 0.0 || beta == 0.0 {
            return Err(Error::Domain {
                op: "curvature_bound",
                value: phi,
                reason: "requires sin(phi) != 0 and beta != 0",
            });
        }
        let curv = orbit.curvature_integral(phi)?;
        let at_phi = orbit.kernel_point(phi);
        let at_beta = self.kernel().eval(beta)?;
        // G′(β)/G(β) · G(β cos φ) = G′(β) cos φ (G/v)(β cos φ) / (G/v)(β)
        let c = phi.cos();
        let bound = -(at_phi.g1 * c - at_beta.g1 * c * at_phi.g_over_v / at_beta.g_over_v) / s;
        Ok((beta * curv, bound))
    }
}

pub fn determinant(p1: &ShootingPoint, p2: &ShootingPoint) -> f64 {
    p1.p_beta * p2.q_beta + p1.q_beta * p2.p_beta
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain {
            op: "shooting",
            value: lambda,
            reason: "lambda must be positive",
        });
    }
    Ok(())
}

/// Root of `a z tan z = 1` in ((k−1)π, (k−½)π).
pub fn z_root(a: f64, k: usize) -> Result<f64> {
    let lo = (k as f64 - 1.0) * PI;
    let hi = (k as f64 - 0.5) * PI;
    // a z sin z − cos z has the same roots without poles
    let f = |z: f64| a * z * z.sin() - z.cos();
    let z = roots::bisect("z_root", |z| Ok(f(z)), lo, hi, 1e-15)?;
    // polish with Newton on the smooth form
    let df = |z: f64| a * z.sin() + a * z * z.cos() + z.sin();
    Ok(z - f(z) / df(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;

    fn ctx() -> ShootingContext {
        ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn z_roots() {
        assert!((z_root(1.0, 1).unwrap() - 0.8603335890193798).abs() < 1e-14);
        assert!((z_root(1.0, 2).unwrap() - 3.425618459481728).abs() < 1e-13);
    }

    #[test]
    fn mode_root_at_zero_is_z() {
        let sc = ctx();
        for k in 1..=3 {
            let r = sc.solve_phi_k(0.0, k).unwrap();
            assert!((r.phi - z_root(1.0, k).unwrap()).abs() < 1e-12);
            assert!(r.residual.abs() < 1e-12);
        }
        assert!(sc.eval_g(0.0, z_root(1.0, 1).unwrap()).unwrap().abs() < 1e-14);
        assert!((sc.eval_g(0.0, PI).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn branch_start_values() {
        let sc = ctx();
        let z1 = z_root(1.0, 1).unwrap();
        assert!((sc.lambda_branch(0.0, 1, Parity::Odd).unwrap() - z1 * z1).abs() < 1e-12);
        assert!((sc.lambda_branch(0.0, 1, Parity::Even).unwrap() - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn pq_vanish_on_branches() {
        let sc = ctx();
        let lo = sc.lambda_branch(0.4, 1, Parity::Odd).unwrap();
        let (p, _) = sc.eval_pq(lo, 0.4).unwrap();
        assert!(p.abs() < 1e-11);
        let le = sc.lambda_branch(0.4, 1, Parity::Even).unwrap();
        let (_, q) = sc.eval_pq(le, 0.4).unwrap();
        assert!(q.abs() < 1e-10);
    }

    #[test]
    fn derivatives_at_zero_amplitude() {
        let sc = ctx();
        let lambda: f64 = 2.0;
        let (pb, qb) = sc.eval_pq_beta(lambda, 0.0).unwrap();
        let th = lambda.sqrt();
        assert!((qb + th.sin()).abs() < 1e-13);
        assert!((pb - (th.cos() - th * th.sin())).abs() < 1e-13);
    }

    #[test]
    fn rij_identities() {
        let sc = ctx();
        let root = sc.solve_phi_k(0.4, 1).unwrap();
        let aux = sc.eval_rij(0.4, root.phi).unwrap();
        let lo = sc.lambda_branch(0.4, 1, Parity::Odd).unwrap();
        let (_, qb) = sc.eval_pq_beta(lo, 0.4).unwrap();
        assert!((aux.r - qb).abs() < 1e-10);
        let z1 = z_root(1.0, 1).unwrap();
        let at0 = sc.eval_rij(0.0, z1).unwrap();
        assert!((at0.r + z1.sin()).abs() < 1e-14);
        assert!(at0.at_limit);
    }
}
