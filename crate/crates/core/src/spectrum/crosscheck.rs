use super::{compute_spectrum, DEFAULT_NODES};
use crate::branches::SolutionProfile;
use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};
use crate::roots;
use crate::shooting::ShootingContext;
use serde::Serialize;

/// One eigenvalue recomputed by shooting, with its eigenfunction data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingEigen {
    /// position in the descending order
    pub rank: usize,
    pub mu: f64,
    /// finite-difference value it was bracketed from
    pub mu_fd: f64,
    /// eigenfunction zeros on the open extended interval
    pub zeros: usize,
    /// sign of ψ(−1−a)·ψ(1+a)
    pub end_sign: f64,
}

struct Half {
    /// ψ, ψ′ at the inner end
    phi: f64,
    dphi: f64,
    zeros: usize,
}

/// Integrates (u, u′, ψ, ψ′) from an outer end (Neumann data, ψ = 1) to x = 0.
fn shoot_half(sc: &ShootingContext, lambda: f64, u_end: f64, mu: f64, from_left: bool) -> Result<Half> {
    let nl = sc.kernel().nl();
    let fmax = nl.df(0.0).abs().max(nl.df(nl.u0()).abs()).max(1.0);
    let tol = Tolerances {
        rtol: 1e-12,
        atol: 1e-14,
        max_step: 0.25 / (1.0 + mu.abs() + lambda * fmax).sqrt(),
    };
    let (x0, x1) = if from_left { (-1.0, 0.0) } else { (1.0, 0.0) };
    let mut zeros = 0;
    let mut last = 1.0f64;
    let y = integrate(
        |_, y: &[f64; 4]| [y[1], -lambda * nl.f(y[0]), y[3], (mu - lambda * nl.df(y[0])) * y[2]],
        x0,
        [u_end, 0.0, 1.0, 0.0],
        x1,
        tol,
        |x, y| {
            if y[2] != 0.0 {
                if y[2].signum() != last.signum() && x != x1 {
                    zeros += 1;
                }
                last = y[2];
            }
        },
    )?;
    // a sign change on the final step lands at the interface itself unless
    // ψ was already of opposite sign before it
    if y[2] != 0.0 && y[2].signum() != last.signum() {
        zeros += 1;
    }
    Ok(Half {
        phi: y[2],
        dphi: y[3],
        zeros,
    })
}

struct Shot {
    mismatch: f64,
    left: Half,
    right: Half,
}

fn shoot(sc: &ShootingContext, profile: &SolutionProfile, mu: f64) -> Result<Shot> {
    let g = sc.kernel();
    let (u1, u2) = (g.eval_g(profile.beta1)?, g.eval_g(profile.beta2)?);
    let (left, right) = rayon::join(
        || shoot_half(sc, profile.lambda, u1, mu, true),
        || shoot_half(sc, profile.lambda, u2, mu, false),
    );
    let (left, right) = (left?, right?);
    let a = sc.a();
    let mismatch = (left.phi + a * left.dphi) * right.dphi - (right.phi - a * right.dphi) * left.dphi;
    Ok(Shot { mismatch, left, right })
}

/// Top `m` eigenvalues by shooting, with the default finite-difference grid
/// supplying the brackets.
pub fn eigen_cross_check(profile: &SolutionProfile, sc: &ShootingContext, m: usize) -> Result<Vec<ShootingEigen>> {
    eigen_cross_check_with(profile, sc, DEFAULT_NODES, m)
}

/// Each eigenvalue of the finite-difference spectrum (grid `n`) is bracketed
/// by its value ± 10× the error estimate, widened until the interface
/// mismatch changes sign, then refined by bisection. The eigenfunction's zero
/// count on the extended interval must equal the eigenvalue's rank.
pub fn eigen_cross_check_with(
    profile: &SolutionProfile,
    sc: &ShootingContext,
    n: usize,
    m: usize,
) -> Result<Vec<ShootingEigen>> {
    let fd = compute_spectrum(profile, sc, n, m)?;
    let a = sc.a();
    let mut out = Vec::with_capacity(m);
    for (rank, (&mu_fd, &err)) in fd.eigenvalues.iter().zip(&fd.error_estimates).take(m).enumerate() {
        let mut w = (10.0 * err).max(1e-8 * (1.0 + mu_fd.abs()));
        let mut bracket = None;
        for _ in 0..12 {
            let lo = shoot(sc, profile, mu_fd - w)?.mismatch;
            let hi = shoot(sc, profile, mu_fd + w)?.mismatch;
            if lo == 0.0 || hi == 0.0 || lo.signum() != hi.signum() {
                bracket = Some((mu_fd - w, mu_fd + w));
                break;
            }
            w *= 4.0;
        }
        let (lo, hi) = bracket.ok_or_else(|| Error::NoSignChange {
            op: "eigen_cross_check",
            lo: mu_fd - w,
            hi: mu_fd + w,
        })?;
        let mu = roots::bisect(
            "eigen_cross_check",
            |x| shoot(sc, profile, x).map(|s| s.mismatch),
            lo,
            hi,
            1e-12 * (1.0 + mu_fd.abs()),
        )?;
        let shot = shoot(sc, profile, mu)?;
        let (l, r) = (&shot.left, &shot.right);
        // ψ = φ₁ on the left, α φ₂ on the right; α from the better-conditioned row
        let row1 = r.phi - a * r.dphi;
        let alpha = if row1.abs() >= r.dphi.abs() {
            (l.phi + a * l.dphi) / row1
        } else {
            l.dphi / r.dphi
        };
        let middle = (l.phi * alpha * r.phi < 0.0) as usize;
        let zeros = l.zeros + r.zeros + middle;
        if zeros != rank {
            return Err(Error::RankMismatch {
                op: "eigen_cross_check",
                rank,
                zeros,
            });
        }
        out.push(ShootingEigen {
            rank,
            mu,
            mu_fd,
            zeros,
            end_sign: alpha.signum(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::reconstruct_solution;
    use crate::nonlinearity::{GKernel, Nonlinearity};
    use crate::shooting::Parity;

    #[test]
    fn odd_branch_agreement() {
        let sc = ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap();
        let lambda = sc.lambda_branch(0.4, 1, Parity::Odd).unwrap();
        let prof = reconstruct_solution(&sc, lambda, 0.4, -0.4, 3).unwrap();
        let ev = eigen_cross_check_with(&prof, &sc, 400, 5).unwrap();
        for e in &ev {
            assert!((e.mu - e.mu_fd).abs() <= 1e-4 * e.mu.abs().max(1.0), "{e:?}");
            let expected = if e.rank % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(e.end_sign, expected, "{e:?}");
        }
    }
}
