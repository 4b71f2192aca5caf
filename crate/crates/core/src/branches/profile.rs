use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::shooting::ShootingContext;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileNode {
    pub x: f64,
    pub u: f64,
    pub ux: f64,
}

/// A solution sampled on both half-intervals. `left` runs from x = −1 to the
/// one-sided limit x = −0, `right` from x = +0 to x = 1.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionProfile {
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub a: f64,
    pub left: Vec<ProfileNode>,
    pub right: Vec<ProfileNode>,
}

impl SolutionProfile {
    pub fn u_minus0(&self) -> f64 {
        self.left.last().unwrap().u
    }

    pub fn u_plus0(&self) -> f64 {
        self.right[0].u
    }

    pub fn ux_minus0(&self) -> f64 {
        self.left.last().unwrap().ux
    }

    pub fn ux_plus0(&self) -> f64 {
        self.right[0].ux
    }

    /// Number of nodes per half-interval.
    pub fn n_grid(&self) -> usize {
        self.left.len()
    }

    /// Residuals of `u(−0) + a u_x(−0) = u(+0) − a u_x(+0)` and `u_x(−0) = u_x(+0)`.
    pub fn matching_residual(&self) -> [f64; 2] {
        [
            self.u_minus0() + self.a * self.ux_minus0() - (self.u_plus0() - self.a * self.ux_plus0()),
            self.ux_minus0() - self.ux_plus0(),
        ]
    }

    pub fn max_abs_u(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .map(|n| n.u.abs())
            .fold(0.0, f64::max)
    }

    /// Sign changes of u inside each half-interval (not counting x = 0).
    pub fn interior_zeros(&self) -> usize {
        let count = |nodes: &[ProfileNode]| {
            let mut last = 0.0f64;
            let mut n = 0;
            for node in nodes {
                if node.u != 0.0 {
                    if last != 0.0 && node.u.signum() != last.signum() {
                        n += 1;
                    }
                    last = node.u;
                }
            }
            n
        };
        count(&self.left) + count(&self.right)
    }

    /// Largest relative deviation of `u_x² + λF(u)` from its value at the
    /// outer end of each half-interval.
    pub fn energy_spread(&self, nl: &Nonlinearity) -> f64 {
        let side = |nodes: &[ProfileNode], anchor: &ProfileNode| {
            let e = |n: &ProfileNode| n.ux * n.ux + self.lambda * nl.eval_energy(n.u);
            let e0 = e(anchor);
            nodes
                .iter()
                .map(|n| (e(n) - e0).abs() / e0.abs().max(1e-300))
                .fold(0.0, f64::max)
        };
        side(&self.left, &self.left[0]).max(side(&self.right, self.right.last().unwrap()))
    }
}

/// Samples `u(x) = G(β₁ cos Θ(√λ(x+1), β₁))` on [−1, −0] and
/// `u(x) = G(β₂ cos Θ(√λ(1−x), β₂))` on [+0, 1], `n_grid` nodes per side.
pub fn reconstruct_solution(
    sc: &ShootingContext,
    lambda: f64,
    beta1: f64,
    beta2: f64,
    n_grid: usize,
) -> Result<SolutionProfile> {
    if n_grid < 2 {
        return Err(Error::InvalidParameter("profile needs at least 2 nodes per side".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain {
            op: "reconstruct_solution",
            value: lambda,
            reason: "lambda must be positive",
        });
    }
    let sl = lambda.sqrt();
    let h = 1.0 / (n_grid - 1) as f64;
    let half = |beta: f64, left: bool| -> Result<Vec<ProfileNode>> {
        let orbit = sc.orbit(beta)?;
        (0..n_grid)
            .into_par_iter()
            .map(|i| {
                // distance from the outer end, computed the same way on both
                // sides so mirrored amplitudes give bit-identical values
                let dist = if left { i as f64 } else { (n_grid - 1 - i) as f64 } * h;
                let x = if left { -1.0 + i as f64 * h } else { i as f64 * h };
                let th = orbit.solve_theta(sl * dist)?;
                let kp = orbit.kernel_point(th);
                let v = -beta * th.sin();
                let ux = if left { sl * v } else { -sl * v };
                Ok(ProfileNode { x, u: kp.u, ux })
            })
            .collect()
    };
    let mut left = half(beta1, true)?;
    let mut right = half(beta2, false)?;
    // exact end values
    left[n_grid - 1].x = 0.0;
    right[0].x = 0.0;
    Ok(SolutionProfile {
        lambda,
        beta1,
        beta2,
        a: sc.a(),
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{GKernel, Nonlinearity};
    use crate::shooting::Parity;

    fn ctx() -> ShootingContext {
        ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn odd_profile_properties() {
        let sc = ctx();
        let lambda = sc.lambda_branch(0.4, 1, Parity::Odd).unwrap();
        let p = reconstruct_solution(&sc, lambda, 0.4, -0.4, 201).unwrap();
        assert!((p.left[0].u - sc.kernel().eval_g(0.4).unwrap()).abs() < 1e-15);
        assert_eq!(p.left[0].ux, 0.0);
        for (l, r) in p.left.iter().zip(p.right.iter().rev()) {
            assert!((l.u + r.u).abs() < 1e-10);
        }
        let m = p.matching_residual();
        assert!(m[0].abs() < 1e-10 && m[1].abs() < 1e-10, "{m:?}");
        assert_eq!(p.interior_zeros(), 0);
        assert!(p.u_minus0() * p.u_plus0() < 0.0);
        assert!(p.energy_spread(sc.kernel().nl()) < 1e-10);
    }

    #[test]
    fn even_profile_zero_count() {
        let sc = ctx();
        let lambda = sc.lambda_branch(0.4, 1, Parity::Even).unwrap();
        let p = reconstruct_solution(&sc, lambda, 0.4, 0.4, 401).unwrap();
        assert_eq!(p.interior_zeros(), 2);
        assert!(p.u_minus0() * p.u_plus0() > 0.0);
    }
}
