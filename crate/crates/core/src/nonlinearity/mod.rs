//! The reaction term `f`, its energy `F(u) = 2∫₀ᵘ f`, the inverse orbit map `G`
//! and structural condition checks.

mod conditions;
mod kernel;
pub(crate) mod poly;

pub use conditions::{check_conditions, ConditionCheck, ConditionReport};
pub use kernel::{GKernel, KernelPoint};

use crate::error::{Error, Result};
use crate::roots;
use poly::Poly;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    Cubic,
    Sine,
    Custom,
}

/// An odd reaction term with zeros at 0 and ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    poly: Option<PolyForms>,
    f_prime_0: f64,
    beta0: f64,
    u0: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct PolyForms {
    f: Poly,
    df: Poly,
    d2f: Poly,
    energy: Poly,
    /// `f² − f′F`, which is O(u⁴) for odd f
    defect: Poly,
}

impl Nonlinearity {
    /// `f(u) = u − u³`.
    pub fn cubic() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Cubic,
            poly: None,
            f_prime_0: 1.0,
            beta0: std::f64::consts::FRAC_1_SQRT_2,
            u0: 1.0 / 3f64.sqrt(),
        }
    }

    /// `f(u) = sin πu`.
    pub fn sine() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Sine,
            poly: None,
            f_prime_0: PI,
            beta0: 2.0 / PI.sqrt(),
            u0: 0.5,
        }
    }

    /// Polynomial `f(u) = Σ cᵢ uⁱ`. The shape requirements (odd, positive on
    /// (0,1), simple zeros at 0 and 1) are validated here.
    pub fn polynomial(coefficients: &[f64]) -> Result<Self> {
        let nl = Self::polynomial_unchecked(coefficients)?;
        nl.validate_shape()?;
        Ok(nl)
    }

    /// Builds a polynomial nonlinearity without shape validation, so that
    /// [`check_conditions`] can report on arbitrary input.
    pub fn polynomial_unchecked(coefficients: &[f64]) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidNonlinearity(
                "coefficient list must be non-empty and finite".into(),
            ));
        }
        let f = Poly::new(coefficients.to_vec());
        let df = f.derivative();
        let d2f = df.derivative();
        let energy = f.integral().scale(2.0);
        let mut defect = f.mul(&f).sub(&df.mul(&energy));
        // the u⁰ and u² terms cancel identically for odd f
        for c in defect.c.iter_mut().take(3) {
            *c = 0.0;
        }
        let f_prime_0 = df.eval(0.0);
        let beta_sq = energy.eval(1.0);
        let mut nl = Nonlinearity {
            kind: NonlinearityKind::Custom,
            poly: Some(PolyForms {
                f,
                df,
                d2f,
                energy,
                defect,
            }),
            f_prime_0,
            beta0: if beta_sq > 0.0 { beta_sq.sqrt() } else { f64::NAN },
            u0: f64::NAN,
        };
        nl.u0 = nl.locate_u0().unwrap_or(f64::NAN);
        Ok(nl)
    }

    fn locate_u0(&self) -> Option<f64> {
        let n = 2000;
        let mut prev = self.df(0.0);
        for i in 1..=n {
            let x = i as f64 / n as f64;
            let cur = self.df(x);
            if prev > 0.0 && cur <= 0.0 {
                let lo = (i - 1) as f64 / n as f64;
                return roots::bisect("locate_u0", |u| Ok(self.df(u)), lo, x, 1e-15).ok();
            }
            prev = cur;
        }
        None
    }

    /// Rejects polynomials outside the admissible class.
    pub fn validate_shape(&self) -> Result<()> {
        let Some(p) = &self.poly else { return Ok(()) };
        let scale: f64 = p.f.c.iter().map(|c| c.abs()).sum();
        if p.f.c.iter().step_by(2).any(|c| c.abs() > 1e-14 * scale) {
            return Err(Error::InvalidNonlinearity("polynomial must be odd".into()));
        }
        if self.f_prime_0 <= 0.0 {
            return Err(Error::InvalidNonlinearity("f'(0) must be positive".into()));
        }
        if self.eval_f(1.0, 0).abs() > 1e-12 * scale {
            return Err(Error::InvalidNonlinearity("f(1) must vanish".into()));
        }
        if self.eval_f(1.0, 1) >= 0.0 {
            return Err(Error::InvalidNonlinearity("f'(1) must be negative".into()));
        }
        let n = 4000;
        for i in 1..n {
            let u = i as f64 / n as f64;
            if self.eval_f(u, 0) <= 0.0 {
                return Err(Error::InvalidNonlinearity(format!(
                    "f must be positive on (0,1); f({u}) <= 0"
                )));
            }
        }
        if !self.u0.is_finite() {
            return Err(Error::InvalidNonlinearity("f' has no zero in (0,1)".into()));
        }
        Ok(())
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// Coefficients of the custom polynomial, if any.
    pub fn coefficients(&self) -> Option<&[f64]> {
        self.poly.as_ref().map(|p| p.f.c.as_slice())
    }

    pub fn f_prime_0(&self) -> f64 {
        self.f_prime_0
    }

    /// `√F(1)`, the boundary of the admissible amplitude range.
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Positive zero of `f′` in (0,1).
    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// `f`, `f′` or `f″` at `u` (`order` 0, 1, 2; higher orders return NaN).
    pub fn eval_f(&self, u: f64, order: u8) -> f64 {
        match order {
            0 => self.f(u),
            1 => self.df(u),
            2 => self.d2f(u),
            _ => f64::NAN,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => u * (1.0 - u) * (1.0 + u),
            NonlinearityKind::Sine => (PI * u).sin(),
            NonlinearityKind::Custom => self.poly.as_ref().unwrap().f.eval(u),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => 1.0 - 3.0 * u * u,
            NonlinearityKind::Sine => PI * (PI * u).cos(),
            NonlinearityKind::Custom => self.poly.as_ref().unwrap().df.eval(u),
        }
    }

    pub fn d2f(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => -6.0 * u,
            NonlinearityKind::Sine => -PI * PI * (PI * u).sin(),
            NonlinearityKind::Custom => self.poly.as_ref().unwrap().d2f.eval(u),
        }
    }

    /// Energy `F(u) = 2∫₀ᵘ f(s) ds`.
    pub fn eval_energy(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => {
                let u2 = u * u;
                u2 - 0.5 * u2 * u2
            }
            NonlinearityKind::Sine => {
                let s = (0.5 * PI * u).sin();
                4.0 / PI * s * s
            }
            NonlinearityKind::Custom => self.poly.as_ref().unwrap().energy.eval(u),
        }
    }

    /// `f² − f′F`, evaluated without the cancellation of the naive form.
    pub(crate) fn defect(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => {
                let u2 = u * u;
                0.5 * u2 * u2 * (3.0 - u2)
            }
            NonlinearityKind::Sine => {
                let s = (0.5 * PI * u).sin();
                4.0 * s * s * s * s
            }
            NonlinearityKind::Custom => self.poly.as_ref().unwrap().defect.eval(u),
        }
    }

    /// `f′F/f²` (limit 1 at u = 0).
    pub fn h_of_u(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 1.0;
        }
        let f = self.f(u);
        1.0 - self.defect(u) / (f * f)
    }

    pub(crate) fn poly_forms(&self) -> Option<(&Poly, &Poly, &Poly)> {
        self.poly.as_ref().map(|p| (&p.f, &p.energy, &p.defect))
    }
}
