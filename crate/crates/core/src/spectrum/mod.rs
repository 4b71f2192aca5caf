//! Linearized spectrum at a solution: eigenvalues of
//! `ψ_xx + λf′(u)ψ = μψ` with Neumann ends and the linearized matching
//! conditions, the Morse index, and the nondegeneracy verdict.
//!
//! The problem is posed on the extended interval [−1−a, 1+a], where the
//! middle segment [−a, a] carries zero weight and zero potential so that ψ is
//! linear there. That segment is eliminated exactly: its only effect is the
//! coupling `ψ_x(−a) = ψ_x(a) = (ψ(a) − ψ(−a))/(2a)` between the two outer
//! grids, which keeps the discrete problem a symmetric tridiagonal one.

mod crosscheck;
mod tridiag;

pub use crosscheck::{eigen_cross_check, eigen_cross_check_with, ShootingEigen};

use crate::branches::{reconstruct_solution, SolutionProfile};
use crate::error::{Error, Result};
use crate::shooting::ShootingContext;
use serde::Serialize;

/// Grid intervals per outer subinterval used when none is given.
pub const DEFAULT_NODES: usize = 2000;

/// Discretized potential on the extended interval.
#[derive(Debug, Clone, Serialize)]
pub struct ExtendedProblem {
    pub a: f64,
    pub lambda: f64,
    /// intervals per outer subinterval
    pub n: usize,
    /// ū at the nodes of [−1−a, −a] and [a, 1+a], left to right
    pub u_left: Vec<f64>,
    pub u_right: Vec<f64>,
    /// `λf′(ū)` at the same nodes
    pub q_left: Vec<f64>,
    pub q_right: Vec<f64>,
    /// ū(x) = mid_slope·x + mid_value on [−a, a]
    pub mid_slope: f64,
    pub mid_value: f64,
}

impl ExtendedProblem {
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn weight(&self, x: f64) -> f64 {
        if x.abs() < self.a {
            0.0
        } else {
            1.0
        }
    }

    /// ū at an extended-interval coordinate, linear between nodes.
    pub fn ubar(&self, x: f64) -> f64 {
        self.sample(x, &self.u_left, &self.u_right, |x| self.mid_slope * x + self.mid_value)
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.sample(x, &self.q_left, &self.q_right, |_| 0.0)
    }

    fn sample(&self, x: f64, left: &[f64], right: &[f64], mid: impl Fn(f64) -> f64) -> f64 {
        let interp = |vals: &[f64], s: f64| {
            let t = (s * self.n as f64).clamp(0.0, self.n as f64);
            let i = (t.floor() as usize).min(self.n - 1);
            let w = t - i as f64;
            vals[i] * (1.0 - w) + vals[i + 1] * w
        };
        if x <= -self.a {
            interp(left, x + 1.0 + self.a)
        } else if x >= self.a {
            interp(right, x - self.a)
        } else {
            mid(x)
        }
    }

    pub fn q_max(&self) -> f64 {
        self.q_left.iter().chain(&self.q_right).map(|q| q.abs()).fold(0.0, f64::max)
    }

    /// Largest second difference of q, a proxy for `max |q″|`.
    fn q2_max(&self) -> f64 {
        let h2 = self.h() * self.h();
        let side = |q: &[f64]| {
            q.windows(3)
                .map(|w| ((w[0] - 2.0 * w[1] + w[2]) / h2).abs())
                .fold(0.0, f64::max)
        };
        side(&self.q_left).max(side(&self.q_right))
    }

    /// Diagonal and off-diagonal of the symmetrized matrix `W^{-1/2} S W^{-1/2}`
    /// over the nodes L₀..L_n, R₀..R_n.
    fn matrix(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let h = self.h();
        let size = 2 * (n + 1);
        let mut s_diag = vec![0.0; size];
        let mut s_off = vec![1.0 / h; size - 1];
        let mut w = vec![h; size];
        for i in 0..=n {
            s_diag[i] = -2.0 / h + h * self.q_left[i];
            s_diag[n + 1 + i] = -2.0 / h + h * self.q_right[i];
        }
        let c = 1.0 / (2.0 * self.a);
        for (i, q, link) in [
            (0, self.q_left[0], 0.0),
            (n, self.q_left[n], c),
            (n + 1, self.q_right[0], c),
            (size - 1, self.q_right[n], 0.0),
        ] {
            s_diag[i] = -1.0 / h - link + 0.5 * h * q;
            w[i] = 0.5 * h;
        }
        s_off[n] = c;
        let diag = s_diag.iter().zip(&w).map(|(s, w)| s / w).collect();
        let off = s_off
            .iter()
            .enumerate()
            .map(|(i, s)| s / (w[i] * w[i + 1]).sqrt())
            .collect();
        (diag, off)
    }

    /// Absolute eigenvalue accuracy attainable in floating point for this grid.
    fn roundoff_floor(&self) -> f64 {
        let h = self.h();
        let norm = 8.0 / (h * h) + 2.0 / (self.a * h) + self.q_max();
        4.0 * f64::EPSILON * norm
    }

    /// n⁻²-model of the eigenvalue error on this grid.
    fn error_model(&self, mu: f64) -> f64 {
        let h = self.h();
        h * h / 12.0 * ((mu.abs() + self.q_max() + 1.0).powi(2) + self.q2_max())
    }
}

/// Ordered eigenvalues with the certified index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// descending, μ₀ > μ₁ > …
    pub eigenvalues: Vec<f64>,
    /// absolute error estimate per eigenvalue
    pub error_estimates: Vec<f64>,
    pub morse_index: usize,
    pub degenerate: bool,
    pub zero_tolerance: f64,
    /// grid intervals per outer subinterval of the finest grid used
    pub n: usize,
}

impl Spectrum {
    fn classify(eigenvalues: Vec<f64>, error_estimates: Vec<f64>, floor: f64, n: usize) -> Spectrum {
        let nearest = eigenvalues
            .iter()
            .zip(&error_estimates)
            .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
            .map(|(_, e)| *e)
            .unwrap_or(0.0);
        let zero_tolerance = (50.0 * nearest).max(floor).max(1e-10);
        Spectrum {
            morse_index: eigenvalues.iter().filter(|&&m| m > zero_tolerance).count(),
            degenerate: eigenvalues.iter().any(|m| m.abs() <= zero_tolerance),
            eigenvalues,
            error_estimates,
            zero_tolerance,
            n,
        }
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }
}

/// Samples the solution and the potential on `n` intervals per outer
/// subinterval; the profile is resampled when its grid differs.
pub fn build_extended(profile: &SolutionProfile, sc: &ShootingContext, n: usize) -> Result<ExtendedProblem> {
    if n < 2 {
        return Err(Error::InvalidParameter("extended grid needs at least 2 intervals".into()));
    }
    let resampled;
    let p = if profile.n_grid() == n + 1 {
        profile
    } else {
        resampled = reconstruct_solution(sc, profile.lambda, profile.beta1, profile.beta2, n + 1)?;
        &resampled
    };
    let nl = sc.kernel().nl();
    let lambda = p.lambda;
    let u_left: Vec<f64> = p.left.iter().map(|nd| nd.u).collect();
    let u_right: Vec<f64> = p.right.iter().map(|nd| nd.u).collect();
    let q = |u: &Vec<f64>| u.iter().map(|&u| lambda * nl.df(u)).collect::<Vec<_>>();
    Ok(ExtendedProblem {
        a: sc.a(),
        lambda,
        n,
        q_left: q(&u_left),
        q_right: q(&u_right),
        u_left,
        u_right,
        mid_slope: 0.5 * (p.ux_plus0() + p.ux_minus0()),
        mid_value: 0.5 * (p.u_plus0() + p.u_minus0()),
    })
}

fn top_values(ep: &ExtendedProblem, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one eigenvalue".into()));
    }
    let (diag, off) = ep.matrix();
    let vals = tridiag::top_eigenvalues(&diag, &off, m);
    let floor = ep.roundoff_floor();
    if let Some(w) = vals.windows(2).find(|w| !(w[0] - w[1] > floor)) {
        return Err(Error::DiscretizationFailure {
            op: "eigenvalues_top",
            detail: format!("eigenvalues {} and {} not separated", w[0], w[1]),
        });
    }
    Ok(vals)
}

/// Top `m` eigenvalues on a single grid; error estimates come from the n⁻² model.
pub fn eigenvalues_top(ep: &ExtendedProblem, m: usize) -> Result<Spectrum> {
    let vals = top_values(ep, m)?;
    let errs = vals.iter().map(|&mu| ep.error_model(mu)).collect();
    Ok(Spectrum::classify(vals, errs, ep.roundoff_floor(), ep.n))
}

struct Pair {
    spectrum: Spectrum,
    consistent: Result<()>,
}

fn richardson_pair(profile: &SolutionProfile, sc: &ShootingContext, n: usize, m: usize) -> Result<Pair> {
    let (coarse, fine) = rayon::join(|| build_extended(profile, sc, n), || build_extended(profile, sc, 2 * n));
    let (coarse, fine) = (coarse?, fine?);
    let size = 2 * (n + 1);
    let mut m = m.min(size);
    loop {
        let (vc, vf) = rayon::join(|| top_values(&coarse, m), || top_values(&fine, m));
        let (vc, vf) = (vc?, vf?);
        let floor = fine.roundoff_floor().max(coarse.roundoff_floor());
        let mut vals = Vec::with_capacity(m);
        let mut errs = Vec::with_capacity(m);
        let mut consistent = Ok(());
        for (i, (c, f)) in vc.iter().zip(&vf).enumerate() {
            let diff = (f - c).abs();
            vals.push((4.0 * f - c) / 3.0);
            errs.push(diff / 3.0 + floor);
            let model = 10.0 * 0.75 * coarse.error_model(*f) + 2.0 * floor;
            if diff > model && consistent.is_ok() {
                consistent = Err(Error::IndexUncertain {
                    op: "morse_index",
                    detail: format!("eigenvalue {i}: grid change {diff:e} exceeds the n^-2 model {model:e}"),
                });
            }
        }
        let spectrum = Spectrum::classify(vals, errs, floor, 2 * n);
        let last = *spectrum.eigenvalues.last().unwrap();
        if last < -spectrum.zero_tolerance || m == size {
            return Ok(Pair { spectrum, consistent });
        }
        m = (2 * m).min(size);
    }
}

/// Richardson-extrapolated spectrum from grids `n` and `2n`, extended until
/// the last eigenvalue is negative. Degeneracy is reported in the flag only.
pub fn compute_spectrum(profile: &SolutionProfile, sc: &ShootingContext, n: usize, m: usize) -> Result<Spectrum> {
    richardson_pair(profile, sc, n, m).map(|p| p.spectrum)
}

/// As [`compute_spectrum`], but the index is certified: grid consistency
/// must hold and no eigenvalue may lie within the zero tolerance.
pub fn morse_index(profile: &SolutionProfile, sc: &ShootingContext, n: usize, m: usize) -> Result<Spectrum> {
    let pair = richardson_pair(profile, sc, n, m)?;
    pair.consistent?;
    let s = pair.spectrum;
    if s.degenerate {
        let mu = s
            .eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap();
        return Err(Error::IndexUncertain {
            op: "morse_index",
            detail: format!("eigenvalue {mu:e} within zero tolerance {:e}", s.zero_tolerance),
        });
    }
    Ok(s)
}

/// Outcome of comparing the determinant test with the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub d: f64,
    pub d_tolerance: f64,
    /// `|D| > d_tolerance`
    pub d_nondegenerate: bool,
    /// no eigenvalue within the zero tolerance
    pub spectral_nondegenerate: bool,
    pub agree: bool,
}

/// Compares `|D(λ,β₁,β₂)|` against a tolerance scaled by the sizes of the
/// shooting derivatives with the spectrum's degenerate flag.
pub fn nondegeneracy_verdict(
    sc: &ShootingContext,
    lambda: f64,
    beta1: f64,
    beta2: f64,
    spectrum: &Spectrum,
) -> Result<NondegeneracyReport> {
    let p1 = sc.point(lambda, beta1)?;
    let p2 = sc.point(lambda, beta2)?;
    let d = crate::shooting::determinant(&p1, &p2);
    let scale = (p1.p_beta.abs() + p1.q_beta.abs()) * (p2.p_beta.abs() + p2.q_beta.abs());
    let d_tolerance = 1e-8 * scale.max(1e-300);
    let d_nondegenerate = d.abs() > d_tolerance;
    let spectral_nondegenerate = !spectrum.degenerate;
    Ok(NondegeneracyReport {
        d,
        d_tolerance,
        d_nondegenerate,
        spectral_nondegenerate,
        agree: d_nondegenerate == spectral_nondegenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{GKernel, Nonlinearity};
    use crate::shooting::{z_root, Parity};
    use std::f64::consts::PI;

    fn ctx() -> ShootingContext {
        ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap()
    }

    fn trivial_closed_form(sc: &ShootingContext, lambda: f64, m: usize) -> Vec<f64> {
        let mut v = Vec::new();
        for k in 1..=m {
            v.push(lambda - ((k - 1) as f64 * PI).powi(2));
            v.push(lambda - z_root(sc.a(), k).unwrap().powi(2));
        }
        v.truncate(m);
        v
    }

    #[test]
    fn trivial_spectrum_closed_form() {
        let sc = ctx();
        let lambda = 3.0;
        let prof = reconstruct_solution(&sc, lambda, 0.0, 0.0, 201).unwrap();
        let ep = build_extended(&prof, &sc, 200).unwrap();
        assert!(ep.q_left.iter().all(|&q| q == lambda));
        let s = eigenvalues_top(&ep, 5).unwrap();
        for (mu, exact) in s.eigenvalues.iter().zip(trivial_closed_form(&sc, lambda, 5)) {
            assert!((mu - exact).abs() < 2e-2 * (1.0 + exact.abs()), "{mu} vs {exact}");
        }
        let r = compute_spectrum(&prof, &sc, 200, 5).unwrap();
        for (mu, exact) in r.eigenvalues.iter().zip(trivial_closed_form(&sc, lambda, 5)) {
            assert!((mu - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{mu} vs {exact}");
        }
        assert_eq!(r.morse_index, 2);
    }

    #[test]
    fn ubar_is_continuous() {
        let sc = ctx();
        let lambda = sc.lambda_branch(0.4, 1, Parity::Odd).unwrap();
        let prof = reconstruct_solution(&sc, lambda, 0.4, -0.4, 101).unwrap();
        let ep = build_extended(&prof, &sc, 100).unwrap();
        let a = ep.a;
        assert!((ep.ubar(-a) - (ep.mid_value - a * ep.mid_slope)).abs() < 1e-10);
        assert!((ep.ubar(a) - (ep.mid_value + a * ep.mid_slope)).abs() < 1e-10);
        assert!((ep.mid_slope - prof.ux_minus0()).abs() < 1e-10);
        assert_eq!(ep.potential(0.0), 0.0);
        assert_eq!(ep.weight(0.5 * a), 0.0);
    }

    #[test]
    fn even_branch_index_two() {
        let sc = ctx();
        let lambda = sc.lambda_branch(0.4, 1, Parity::Even).unwrap();
        let prof = reconstruct_solution(&sc, lambda, 0.4, 0.4, 201).unwrap();
        let s = morse_index(&prof, &sc, 200, 6).unwrap();
        assert_eq!(s.morse_index, 2);
        let v = nondegeneracy_verdict(&sc, lambda, 0.4, 0.4, &s).unwrap();
        assert!(v.d > 0.0 && v.agree, "{v:?}");
    }
}
