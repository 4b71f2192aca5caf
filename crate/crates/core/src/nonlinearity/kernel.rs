use super::poly::Poly;
use super::{Nonlinearity, NonlinearityKind};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Values of the inverse orbit map and its derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    /// `G(v)`
    pub u: f64,
    /// `G(v)/v` (limit `G′(0)` at zero)
    pub g_over_v: f64,
    /// `G′(v)`
    pub g1: f64,
    /// `G″(v)`
    pub g2: f64,
}

/// The map `G`, inverse of `u ↦ sgn(u)√F(u)` on (−1, 1).
///
/// Every evaluation is routed through the gap `β₀² − v²`, which the caller may
/// supply directly when it is known more accurately than `v` itself (orbit
/// integrands near `cos τ = ±1`).
#[derive(Debug, Clone)]
pub struct GKernel {
    nl: Nonlinearity,
    beta0: f64,
    v0: f64,
    g1_zero: f64,
    g2_zero: f64,
    inv: Option<PolyInverse>,
}

#[derive(Debug, Clone)]
struct PolyInverse {
    f: Poly,
    energy: Poly,
    defect: Poly,
    /// `F(u) − u f(u)`
    big_h: Poly,
    // the same quantities in w = 1 − u
    f_w: Poly,
    gap_w: Poly,
    defect_w: Poly,
    big_h_w: Poly,
    df0: f64,
    df1: f64,
}

impl GKernel {
    pub fn new(nl: Nonlinearity) -> Result<Self> {
        nl.validate_shape()?;
        let beta0 = nl.beta0();
        if !(beta0 > 0.0 && beta0.is_finite()) {
            return Err(Error::InvalidNonlinearity("F(1) must be positive".into()));
        }
        let df0 = nl.f_prime_0();
        let inv = nl.poly_forms().map(|(f, energy, defect)| {
            let mut big_h = energy.sub(&f.mul(&Poly::new(vec![0.0, 1.0])));
            for c in big_h.c.iter_mut().take(4) {
                *c = 0.0;
            }
            let mut f_w = f.shifted(1.0, -1.0);
            f_w.c[0] = 0.0;
            let mut gap_w = energy.shifted(1.0, -1.0).scale(-1.0);
            gap_w.c[0] = 0.0;
            PolyInverse {
                f: f.clone(),
                energy: energy.clone(),
                defect: defect.clone(),
                f_w,
                gap_w,
                defect_w: defect.shifted(1.0, -1.0),
                big_h_w: big_h.shifted(1.0, -1.0),
                big_h,
                df0,
                df1: nl.df(1.0),
            }
        });
        let v0 = nl.eval_energy(nl.u0()).sqrt();
        Ok(GKernel {
            g1_zero: 1.0 / df0.sqrt(),
            g2_zero: -nl.d2f(0.0) / (3.0 * df0 * df0),
            beta0,
            v0,
            inv,
            nl,
        })
    }

    pub fn nl(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// The value `v₀` with `G(v₀) = u₀`.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// `β₀² − v²`, formed as a product to keep relative accuracy near `±β₀`.
    pub fn gap(&self, v: f64) -> f64 {
        let a = v.abs();
        (self.beta0 - a) * (self.beta0 + a)
    }

    fn check(&self, op: &'static str, v: f64) -> Result<()> {
        if !(v.abs() < self.beta0) {
            return Err(Error::Domain {
                op,
                value: v,
                reason: "|v| must be below beta0",
            });
        }
        Ok(())
    }

    pub fn eval(&self, v: f64) -> Result<KernelPoint> {
        self.check("eval_G", v)?;
        Ok(self.point(v, self.gap(v)))
    }

    pub fn eval_g(&self, v: f64) -> Result<f64> {
        self.check("eval_G", v)?;
        Ok(self.point(v, self.gap(v)).u)
    }

    pub fn eval_g_derivs(&self, v: f64) -> Result<(f64, f64)> {
        self.check("eval_G_derivs", v)?;
        let p = self.point(v, self.gap(v));
        Ok((p.g1, p.g2))
    }

    /// `h = 1 − G″v/G′` and `H = v² − Gv/G′` (limits 1 and 0 at v = 0).
    pub fn eval_h_big_h(&self, v: f64) -> Result<(f64, f64)> {
        self.check("eval_h_H", v)?;
        if v == 0.0 {
            return Ok((1.0, 0.0));
        }
        let p = self.point(v, self.gap(v));
        let h = 1.0 - p.g2 * v / p.g1;
        Ok((h, self.big_h(v, p.u)))
    }

    fn big_h(&self, v: f64, u: f64) -> f64 {
        match self.nl.kind() {
            NonlinearityKind::Cubic => {
                let s = (2.0 * self.gap(v)).sqrt();
                let v2 = v * v;
                2.0 * v2 * v2 / ((1.0 + s) * (1.0 + s))
            }
            NonlinearityKind::Sine => {
                // F − uf = (4/π) S (sin θ − θ cos θ), θ = πu/2, S = sin θ
                let th = 0.5 * PI * u.abs();
                let core = if th < 1e-2 {
                    let t2 = th * th;
                    th * t2 * (1.0 / 3.0 - t2 * (1.0 / 30.0 - t2 * (1.0 / 840.0 - t2 / 45360.0)))
                } else {
                    th.sin() - th * th.cos()
                };
                4.0 / PI * th.sin() * core
            }
            NonlinearityKind::Custom => {
                let inv = self.inv.as_ref().unwrap();
                let au = u.abs();
                if au <= 0.5 {
                    inv.big_h.eval(au)
                } else {
                    inv.big_h_w.eval(1.0 - au)
                }
            }
        }
    }

    /// Evaluates `G`, `G/v`, `G′`, `G″` at `v` given `gap = β₀² − v²`.
    /// No domain check; `gap` must be positive.
    pub fn point(&self, v: f64, gap: f64) -> KernelPoint {
        match self.nl.kind() {
            NonlinearityKind::Cubic => {
                // s = √(1 − 2v²) = 1 − u²
                let s = (2.0 * gap).sqrt();
                let ratio = (2.0 / (1.0 + s)).sqrt();
                let u = v * ratio;
                KernelPoint {
                    u,
                    g_over_v: ratio,
                    g1: 1.0 / (ratio * s),
                    g2: u * (3.0 - u * u) / (2.0 * s * s * s),
                }
            }
            NonlinearityKind::Sine => {
                // x = sin(πu/2), c = cos(πu/2)
                let sp = PI.sqrt();
                let x = 0.5 * sp * v;
                let c = 0.5 * (PI * gap).sqrt();
                let u = 2.0 / PI * x.atan2(c);
                let g_over_v = if x == 0.0 {
                    1.0 / sp
                } else {
                    x.atan2(c) / (sp * x)
                };
                KernelPoint {
                    u,
                    g_over_v,
                    g1: 1.0 / (sp * c),
                    g2: x / (2.0 * c * c * c),
                }
            }
            NonlinearityKind::Custom => self.poly_point(v, gap),
        }
    }

    fn poly_point(&self, v: f64, gap: f64) -> KernelPoint {
        let inv = self.inv.as_ref().unwrap();
        if v == 0.0 {
            return KernelPoint {
                u: 0.0,
                g_over_v: self.g1_zero,
                g1: self.g1_zero,
                g2: self.g2_zero,
            };
        }
        let av = v.abs();
        let sgn = v.signum();
        let target = av * av;
        let (u, f, defect) = if gap >= target {
            let mut hi = (2.0 * av / inv.df0.sqrt()).min(1.0);
            if inv.energy.eval(hi) < target {
                hi = 1.0;
            }
            let width = 1e-14 * hi;
            let mut u = bisect_increasing(|u| inv.energy.eval(u) - target, 0.0, hi, width);
            for _ in 0..2 {
                let fu = inv.f.eval(u);
                if fu > 0.0 {
                    u -= (inv.energy.eval(u) - target) / (2.0 * fu);
                }
            }
            (u, inv.f.eval(u), inv.defect.eval(u))
        } else {
            let mut hi = (2.0 * (gap / -inv.df1).sqrt()).min(1.0);
            if inv.gap_w.eval(hi) < gap {
                hi = 1.0;
            }
            let width = 1e-14 * hi;
            let mut w = bisect_increasing(|w| inv.gap_w.eval(w) - gap, 0.0, hi, width);
            for _ in 0..2 {
                let fw = inv.f_w.eval(w);
                if fw > 0.0 {
                    w -= (inv.gap_w.eval(w) - gap) / (2.0 * fw);
                }
            }
            (1.0 - w, inv.f_w.eval(w), inv.defect_w.eval(w))
        };
        KernelPoint {
            u: sgn * u,
            g_over_v: u / av,
            g1: av / f,
            g2: sgn * defect / (f * f * f),
        }
    }
}

fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
