//! Phase integrals `∫₀^φ G′(β cos τ) dτ` and `∫₀^φ G″(β cos τ) cos τ dτ`.
//!
//! Both integrands are π-periodic and symmetric about π/2, so any integral
//! reduces to whole quarter periods plus one partial quarter. On a quarter the
//! integrand peaks at τ = 0 like `1/√(β₀ − |β| cos τ)` when |β| → β₀; the
//! substitution `τ = ε sinh t` with ε the peak width flattens that peak before
//! adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::nonlinearity::{GKernel, KernelPoint};
use std::f64::consts::FRAC_PI_2;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: integral and error estimate per component.
fn kronrod15<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; N];
    let mut rg = [0.0; N];
    for j in 0..N {
        rk[j] = WGK[7] * fc[j];
        rg[j] = WG[3] * fc[j];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for j in 0..N {
            let s = f1[j] + f2[j];
            rk[j] += WGK[i] * s;
            if i % 2 == 1 {
                rg[j] += WG[i / 2] * s;
            }
        }
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for j in 0..N {
        val[j] = rk[j] * h;
        err[j] = ((rk[j] - rg[j]) * h).abs();
    }
    (val, err)
}

/// Adaptive Gauss–Kronrod on `[a, b]`, bisecting the panel with the largest
/// error until every component meets `max(abs_tol, rel_tol·|value|)`.
pub fn adaptive_gk<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<[f64; N]> {
    if a == b {
        return Ok([0.0; N]);
    }
    let mut panels: Vec<(f64, f64, [f64; N], [f64; N])> = Vec::with_capacity(16);
    let (v, e) = kronrod15(&f, a, b);
    panels.push((a, b, v, e));
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for p in &panels {
            for j in 0..N {
                total[j] += p.2[j];
                err[j] += p.3[j];
            }
        }
        let ok = (0..N).all(|j| err[j] <= abs_tol.max(rel_tol * total[j].abs()));
        if ok {
            return Ok(total);
        }
        if panels.len() >= max_subdivisions {
            let worst = (0..N)
                .map(|j| err[j] / total[j].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(Error::ToleranceNotMet {
                op: "adaptive quadrature",
                estimate: worst,
                requested: rel_tol,
            });
        }
        // split the panel with the largest weighted error
        let scale: [f64; N] = std::array::from_fn(|j| abs_tol.max(rel_tol * total[j].abs()));
        let (idx, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (0..N).map(|j| p.3[j] / scale[j]).fold(0.0, f64::max)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            return Err(Error::ToleranceNotMet {
                op: "adaptive quadrature",
                estimate: f64::NAN,
                requested: rel_tol,
            });
        }
        let (v1, e1) = kronrod15(&f, pa, mid);
        let (v2, e2) = kronrod15(&f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Evaluator of the phase integrals for a fixed kernel.
#[derive(Debug, Clone)]
pub struct PhaseIntegrator {
    gk: GKernel,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl PhaseIntegrator {
    pub fn new(gk: GKernel) -> Self {
        PhaseIntegrator {
            gk,
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            max_subdivisions: 400,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn kernel(&self) -> &GKernel {
        &self.gk
    }

    /// Per-β precomputation (quarter-period values and substitution scale).
    pub fn orbit(&self, beta: f64) -> Result<PhaseOrbit<'_>> {
        PhaseOrbit::new(self, beta)
    }

    /// `∫₀^φ G′(β cos τ) dτ`.
    pub fn theta_integral(&self, beta: f64, phi: f64) -> Result<f64> {
        self.orbit(beta)?.theta_integral(phi)
    }

    /// `∫₀^φ G″(β cos τ) cos τ dτ`.
    pub fn curvature_integral(&self, beta: f64, phi: f64) -> Result<f64> {
        self.orbit(beta)?.curvature_integral(phi)
    }

    /// The Θ with `∫₀^Θ G′(β cos τ) dτ = y`.
    pub fn solve_theta(&self, y: f64, beta: f64) -> Result<f64> {
        self.orbit(beta)?.solve_theta(y)
    }
}

/// Phase integrals along the orbit of amplitude β.
#[derive(Debug, Clone)]
pub struct PhaseOrbit<'a> {
    pi: &'a PhaseIntegrator,
    beta: f64,
    beta_sq: f64,
    gap0: f64,
    eps: f64,
    quarter: [f64; 2],
}

impl<'a> PhaseOrbit<'a> {
    fn new(pi: &'a PhaseIntegrator, beta: f64) -> Result<Self> {
        let beta0 = pi.gk.beta0();
        if !(beta.abs() < beta0) {
            return Err(Error::Domain {
                op: "phase integral",
                value: beta,
                reason: "|beta| must be below beta0",
            });
        }
        let ab = beta.abs();
        let eps = if ab == 0.0 {
            1.0
        } else {
            (2.0 * (beta0 - ab) / ab).sqrt().min(1.0)
        };
        let mut orbit = PhaseOrbit {
            pi,
            beta,
            beta_sq: beta * beta,
            gap0: pi.gk.gap(beta),
            eps,
            quarter: [0.0, 0.0],
        };
        orbit.quarter = orbit.segment_both(0.0, FRAC_PI_2)?;
        Ok(orbit)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kernel(&self) -> &GKernel {
        &self.pi.gk
    }

    /// `∫₀^{π/2} G′(β cos τ) dτ`, a quarter of the period integral.
    pub fn quarter_theta(&self) -> f64 {
        self.quarter[0]
    }

    pub fn quarter_curvature(&self) -> f64 {
        self.quarter[1]
    }

    /// Kernel values at `β cos τ`, with the gap formed from `sin τ`.
    pub fn kernel_point(&self, tau: f64) -> KernelPoint {
        let s = tau.sin();
        self.pi.gk.point(self.beta * tau.cos(), self.gap0 + self.beta_sq * s * s)
    }

    /// `G′` and `G″` at `β cos τ`, with the gap formed from `sin τ`.
    fn kernel_at(&self, tau: f64) -> (f64, f64, f64) {
        let (s, c) = tau.sin_cos();
        let p = self.pi.gk.point(self.beta * c, self.gap0 + self.beta_sq * s * s);
        (p.g1, p.g2, c)
    }

    fn segment_generic<const N: usize>(
        &self,
        x1: f64,
        x2: f64,
        pick: impl Fn(f64, f64, f64) -> [f64; N],
    ) -> Result<[f64; N]> {
        if x1 == x2 {
            return Ok([0.0; N]);
        }
        let eps = self.eps;
        let t1 = (x1 / eps).asinh();
        let t2 = (x2 / eps).asinh();
        adaptive_gk(
            |t| {
                let tau = eps * t.sinh();
                let jac = eps * t.cosh();
                let (g1, g2, c) = self.kernel_at(tau);
                pick(g1, g2, c).map(|x| x * jac)
            },
            t1,
            t2,
            self.pi.rel_tol,
            self.pi.abs_tol,
            self.pi.max_subdivisions,
        )
    }

    fn segment_both(&self, x1: f64, x2: f64) -> Result<[f64; 2]> {
        self.segment_generic(x1, x2, |g1, g2, c| [g1, g2 * c])
    }

    fn segment(&self, x1: f64, x2: f64, comp: usize) -> Result<f64> {
        let r = if comp == 0 {
            self.segment_generic(x1, x2, |g1, _, _| [g1])?
        } else {
            self.segment_generic(x1, x2, |_, g2, c| [g2 * c])?
        };
        Ok(r[0])
    }

    fn check_phi(phi: f64) -> Result<()> {
        if !(phi >= 0.0 && phi.is_finite()) {
            return Err(Error::Domain {
                op: "phase integral",
                value: phi,
                reason: "upper limit must be finite and non-negative",
            });
        }
        Ok(())
    }

    fn reduce(phi: f64) -> (f64, f64) {
        let mut q = (phi / FRAC_PI_2).floor();
        let mut r = phi - q * FRAC_PI_2;
        if r >= FRAC_PI_2 {
            q += 1.0;
            r -= FRAC_PI_2;
        }
        (q, r.max(0.0))
    }

    fn integral(&self, phi: f64, comp: usize) -> Result<f64> {
        Self::check_phi(phi)?;
        let (q, r) = Self::reduce(phi);
        let part = if r == 0.0 {
            0.0
        } else if q % 2.0 == 0.0 {
            self.segment(0.0, r, comp)?
        } else {
            self.segment(FRAC_PI_2 - r, FRAC_PI_2, comp)?
        };
        Ok(q * self.quarter[comp] + part)
    }

    fn integral_both(&self, phi: f64) -> Result<[f64; 2]> {
        Self::check_phi(phi)?;
        let (q, r) = Self::reduce(phi);
        let part = if r == 0.0 {
            [0.0, 0.0]
        } else if q % 2.0 == 0.0 {
            self.segment_both(0.0, r)?
        } else {
            self.segment_both(FRAC_PI_2 - r, FRAC_PI_2)?
        };
        Ok([q * self.quarter[0] + part[0], q * self.quarter[1] + part[1]])
    }

    pub fn theta_integral(&self, phi: f64) -> Result<f64> {
        self.integral(phi, 0)
    }

    pub fn curvature_integral(&self, phi: f64) -> Result<f64> {
        self.integral(phi, 1)
    }

    /// Both integrals in one pass: `(∫G′, ∫G″cos)`.
    pub fn integrals(&self, phi: f64) -> Result<(f64, f64)> {
        let [a, b] = self.integral_both(phi)?;
        Ok((a, b))
    }

    /// Inverse of [`theta_integral`](Self::theta_integral) in its upper limit.
    pub fn solve_theta(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Ok(-self.solve_theta(-y)?);
        }
        if !y.is_finite() {
            return Err(Error::Domain {
                op: "solve_Theta",
                value: y,
                reason: "target must be finite",
            });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let a = self.quarter[0];
        let mut q = (y / a).floor();
        let mut rem = y - q * a;
        if rem >= a {
            q += 1.0;
            rem -= a;
        }
        let rem = rem.max(0.0);
        let odd = q % 2.0 != 0.0;
        // value(r) = ∫ over the first r of the quarter; derivative is the integrand there
        let deriv = |r: f64| -> f64 {
            let tau = if odd { FRAC_PI_2 - r } else { r };
            self.kernel_at(tau).0
        };
        let seg = |r1: f64, r2: f64| -> Result<f64> {
            if odd {
                // ∫_{π/2−r2}^{π/2−r1}
                let (lo, hi) = (FRAC_PI_2 - r2, FRAC_PI_2 - r1);
                if lo <= hi {
                    self.segment(lo.max(0.0), hi, 0)
                } else {
                    Ok(-self.segment(hi.max(0.0), lo, 0)?)
                }
            } else if r1 <= r2 {
                self.segment(r1, r2, 0)
            } else {
                Ok(-self.segment(r2, r1, 0)?)
            }
        };
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        let mut r = FRAC_PI_2 * rem / a;
        let mut val = seg(0.0, r)?;
        let tol = 4.0 * f64::EPSILON * y.max(1.0);
        for _ in 0..100 {
            let res = val - rem;
            if res > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let d = deriv(r);
            let mut next = r - res / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = next - r;
            if res.abs() <= tol || step.abs() <= 1e-16 * (1.0 + r) {
                return Ok(q * FRAC_PI_2 + r);
            }
            val += seg(r, next)?;
            r = next;
        }
        Err(Error::ToleranceNotMet {
            op: "solve_Theta",
            estimate: (val - rem).abs(),
            requested: tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;
    use std::f64::consts::PI;

    fn cubic() -> PhaseIntegrator {
        PhaseIntegrator::new(GKernel::new(Nonlinearity::cubic()).unwrap())
    }

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        // K15 integrates degree 22 exactly
        // and the embedded G7 rule degree 13
        let (v, e) = kronrod15(&|x: f64| [x.powi(22), x.powi(13)], 0.0, 1.0);
        assert!((v[0] - 1.0 / 23.0).abs() < 1e-15);
        assert!((v[1] - 1.0 / 14.0).abs() < 1e-15);
        assert!(e[1] < 1e-15);
    }

    #[test]
    fn adaptive_handles_sqrt_singularity() {
        let v = adaptive_gk(|x: f64| [1.0 / x.sqrt()], 0.0, 1.0, 1e-10, 0.0, 500).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_amplitude_is_linear() {
        let pi = cubic();
        for &phi in &[0.3, 1.0, 2.0, 7.5] {
            assert!((pi.theta_integral(0.0, phi).unwrap() - phi).abs() < 1e-14);
            assert_eq!(pi.curvature_integral(0.0, phi).unwrap(), 0.0);
        }
        let ps = PhaseIntegrator::new(GKernel::new(Nonlinearity::sine()).unwrap());
        let v = ps.theta_integral(0.0, 2.0).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn even_in_beta_and_periodic() {
        let pi = cubic();
        let a = pi.theta_integral(0.3, 2.0).unwrap();
        let b = pi.theta_integral(-0.3, 2.0).unwrap();
        assert!((a - b).abs() < 1e-13);
        let half = pi.theta_integral(0.6, PI).unwrap();
        let full = pi.theta_integral(0.6, 2.0 * PI).unwrap();
        assert!((full - 2.0 * half).abs() < 1e-12 * full);
    }

    #[test]
    fn curvature_positive_over_half_period() {
        let pi = cubic();
        assert!(pi.curvature_integral(0.5, PI).unwrap() > 0.0);
        assert!(pi.curvature_integral(-0.5, PI).unwrap() < 0.0);
    }

    #[test]
    fn solve_theta_round_trip() {
        let pi = cubic();
        for &beta in &[0.0, 0.2, -0.5, 0.7] {
            let orbit = pi.orbit(beta).unwrap();
            for &y in &[0.0, 0.1, 1.7, 3.0, 9.9, 25.0] {
                let th = orbit.solve_theta(y).unwrap();
                let back = orbit.theta_integral(th).unwrap();
                assert!((back - y).abs() < 1e-12 * y.max(1.0), "beta={beta} y={y}");
            }
        }
        assert!((pi.solve_theta(1.3, 0.0).unwrap() - 1.3).abs() < 1e-14);
    }

    #[test]
    fn domain_rejected() {
        let pi = cubic();
        assert!(pi.theta_integral(0.75, 1.0).is_err());
        assert!(pi.theta_integral(0.3, -1.0).is_err());
    }
}
