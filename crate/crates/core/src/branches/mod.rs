//! Primary branches, secondary bifurcation points, the bifurcating
//! non-symmetric branch and the assembled diagram.

mod continuation;
mod diagram;
mod profile;

pub use continuation::{trace_secondary, ContinuationStop, SecondaryBranch};
pub use diagram::{assemble_diagram, fmt17, Diagram, DiagramBranch, DiagramOptions, DiagramPoint, CSV_HEADER};
pub use profile::{reconstruct_solution, ProfileNode, SolutionProfile};

use crate::error::{Error, Result};
use crate::grid;
use crate::roots;
use crate::shooting::{determinant, z_root, Parity, ShootingContext};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Odd,
    Even,
    Secondary,
}

impl From<Parity> for BranchKind {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Odd => BranchKind::Odd,
            Parity::Even => BranchKind::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A solution of the matching system, `u(−1) = G(β₁)`, `u(1) = G(β₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub k: usize,
    pub kind: BranchKind,
    /// nondegeneracy determinant
    pub d: f64,
    pub morse: Option<usize>,
}

impl BranchPoint {
    pub fn mirrored(&self) -> BranchPoint {
        BranchPoint {
            beta1: -self.beta1,
            beta2: -self.beta2,
            ..*self
        }
    }
}

/// Euclidean norm of `(P(λ,β₁) − P(λ,β₂), Q(λ,β₁) + Q(λ,β₂))`.
pub fn matching_residual(sc: &ShootingContext, lambda: f64, beta1: f64, beta2: f64) -> Result<f64> {
    let p1 = sc.point(lambda, beta1)?;
    let p2 = sc.point(lambda, beta2)?;
    Ok((p1.p - p2.p).hypot(p1.q + p2.q))
}

fn check_grid(sc: &ShootingContext, grid: &[f64]) -> Result<()> {
    let b0 = sc.beta0();
    if let Some(&bad) = grid.iter().find(|&&b| !(b > 0.0 && b < b0)) {
        return Err(Error::Domain {
            op: "trace_primary",
            value: bad,
            reason: "grid values must lie in (0, beta0)",
        });
    }
    Ok(())
}

/// Points of the primary branch of mode `k` over a positive amplitude grid;
/// the `Minus` branch is the exact mirror image of the `Plus` one.
pub fn trace_primary(
    sc: &ShootingContext,
    k: usize,
    parity: Parity,
    sign: Sign,
    grid: &[f64],
) -> Result<Vec<BranchPoint>> {
    check_grid(sc, grid)?;
    let pts: Vec<BranchPoint> = grid
        .par_iter()
        .map(|&beta| primary_point(sc, beta, k, parity))
        .collect::<Result<_>>()?;
    for (i, w) in pts.windows(2).enumerate() {
        if !(w[1].lambda > w[0].lambda) {
            return Err(Error::MonotonicityViolation {
                op: "trace_primary",
                index: i + 1,
                prev: w[0].lambda,
                next: w[1].lambda,
            });
        }
    }
    Ok(match sign {
        Sign::Plus => pts,
        Sign::Minus => pts.iter().map(BranchPoint::mirrored).collect(),
    })
}

/// One primary branch point at amplitude `beta`.
pub fn primary_point(sc: &ShootingContext, beta: f64, k: usize, parity: Parity) -> Result<BranchPoint> {
    let sp = sc.branch_point(beta, k, parity)?;
    let beta2 = match parity {
        Parity::Odd => -beta,
        Parity::Even => beta,
    };
    // P_β is even and Q_β is even in β, so D = 2 P_β Q_β for both parities
    Ok(BranchPoint {
        lambda: sp.lambda,
        beta1: beta,
        beta2,
        k,
        kind: parity.into(),
        d: determinant(&sp, &sp),
        morse: None,
    })
}

/// A bifurcation from the trivial branch at `λ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimaryBifurcation {
    pub n: usize,
    pub lambda: f64,
    /// `dD(λ,0,0)/dλ` at `λ_n` (central difference)
    pub d_slope: f64,
    /// `D(λ,0,0)` changes sign across `λ_n`
    pub sign_change: bool,
}

/// All `λ_n ≤ λ_max`: `z_k²/f′(0)` for odd n, `(kπ)²/f′(0)` for even n.
pub fn find_primary_bifurcations(sc: &ShootingContext, lambda_max: f64) -> Result<Vec<PrimaryBifurcation>> {
    let fp0 = sc.kernel().nl().f_prime_0();
    let mut out = Vec::new();
    for k in 1.. {
        let z = z_root(sc.a(), k)?;
        let candidates = [(2 * k - 1, z * z / fp0), (2 * k, (k as f64 * PI).powi(2) / fp0)];
        let mut any = false;
        for (n, lambda) in candidates {
            if lambda > lambda_max {
                continue;
            }
            any = true;
            let h = 1e-6 * lambda;
            let dm = sc.eval_d(lambda - h, 0.0, 0.0)?;
            let dp = sc.eval_d(lambda + h, 0.0, 0.0)?;
            out.push(PrimaryBifurcation {
                n,
                lambda,
                d_slope: (dp - dm) / (2.0 * h),
                sign_change: dm.signum() != dp.signum(),
            });
        }
        if !any {
            break;
        }
    }
    Ok(out)
}

/// A point on an odd primary branch where non-symmetric solutions bifurcate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub k: usize,
    pub beta_star: f64,
    pub phi_star: f64,
    pub lambda_star: f64,
    pub sign: Sign,
    /// `Q_β(λ_k^o(β*), β*)`, equal to the residual of
    /// `β* cos φ* / G′(β* cos φ*) · ∫₀^{φ*} G″ cos = sin φ*`
    pub q_beta: f64,
}

impl BifurcationPoint {
    pub fn mirrored(&self) -> BifurcationPoint {
        BifurcationPoint {
            beta_star: -self.beta_star,
            sign: match self.sign {
                Sign::Plus => Sign::Minus,
                Sign::Minus => Sign::Plus,
            },
            ..*self
        }
    }
}

/// Result of scanning an odd branch for zeros of `Q_β`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondaryScan {
    pub k: usize,
    /// `+` points in increasing β, each followed by its mirror
    pub points: Vec<BifurcationPoint>,
    pub sign_changes: usize,
    /// more than one sign change on (0, β₀)
    pub multiple_roots: bool,
}

/// Scans `β ↦ Q_β(λ_k^o(β), β)` on `n_scan` clustered points in (0, β₀) and
/// refines each sign change by bisection to 1e−12.
pub fn find_secondary_bifurcations(sc: &ShootingContext, k: usize, n_scan: usize) -> Result<SecondaryScan> {
    let b0 = sc.beta0();
    let grid = grid::default_branch_grid(b0, n_scan.max(10))?;
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&b| sc.q_beta_on_odd_branch(b, k))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut sign_changes = 0;
    for i in 0..vals.len() - 1 {
        if vals[i].signum() != vals[i + 1].signum() {
            sign_changes += 1;
            let beta_star = roots::bisect(
                "find_secondary_bifurcations",
                |b| sc.q_beta_on_odd_branch(b, k),
                grid[i],
                grid[i + 1],
                1e-12,
            )?;
            let root = sc.solve_phi_k(beta_star, k)?;
            let lambda_star = sc.lambda_branch(beta_star, k, Parity::Odd)?;
            let q_beta = sc.q_beta_on_odd_branch(beta_star, k)?;
            let bp = BifurcationPoint {
                k,
                beta_star,
                phi_star: root.phi,
                lambda_star,
                sign: Sign::Plus,
                q_beta,
            };
            points.push(bp);
            points.push(bp.mirrored());
        }
    }
    if sign_changes == 0 {
        return Err(Error::NoRootFound {
            op: "find_secondary_bifurcations",
            detail: format!("Q_beta keeps one sign along the odd branch k={k}"),
        });
    }
    Ok(SecondaryScan {
        k,
        points,
        sign_changes,
        multiple_roots: sign_changes > 1,
    })
}
