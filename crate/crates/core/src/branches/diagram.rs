use super::{
    find_primary_bifurcations, find_secondary_bifurcations, primary_point, reconstruct_solution, trace_primary,
    trace_secondary, BifurcationPoint, BranchPoint, PrimaryBifurcation, Sign,
};
use crate::error::Result;
use crate::grid;
use crate::shooting::{z_root, Parity, ShootingContext};
use crate::spectrum;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write;

/// Column order of [`Diagram::to_csv`].
pub const CSV_HEADER: &str = "branch_id,lambda,beta1,beta2,u1,d,morse";

#[derive(Debug, Clone, Serialize)]
pub struct DiagramOptions {
    /// points per primary branch
    pub beta_points: usize,
    /// points of the Q_β sign scan on each odd branch
    pub scan_points: usize,
    /// initial continuation step, in units of β₀
    pub secondary_step: f64,
    pub secondary_steps: usize,
    /// compute Morse indices at every point
    pub morse: bool,
    /// spectrum grid nodes per half-interval when `morse` is set
    pub morse_nodes: usize,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        DiagramOptions {
            beta_points: 200,
            scan_points: 400,
            secondary_step: 1e-3,
            secondary_steps: 400,
            morse: false,
            morse_nodes: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagramPoint {
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// ordinate `u(1) = G(β₂)`
    pub u1: f64,
    pub d: f64,
    pub morse: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramBranch {
    pub id: String,
    pub kind: String,
    pub k: usize,
    pub sign: Option<Sign>,
    pub points: Vec<DiagramPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagram {
    pub a: f64,
    pub k_max: usize,
    pub lambda_max: f64,
    pub primary_bifurcations: Vec<PrimaryBifurcation>,
    pub secondary_bifurcations: Vec<BifurcationPoint>,
    pub branches: Vec<DiagramBranch>,
}

impl Diagram {
    /// One row per point, columns as in [`CSV_HEADER`]; floats carry 17
    /// significant digits, an empty `morse` cell means not computed or uncertain.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        for b in &self.branches {
            for p in &b.points {
                let morse = p.morse.map(|m| m.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    b.id,
                    fmt17(p.lambda),
                    fmt17(p.beta1),
                    fmt17(p.beta2),
                    fmt17(p.u1),
                    fmt17(p.d),
                    morse
                );
            }
        }
        s
    }

    pub fn branch(&self, id: &str) -> Option<&DiagramBranch> {
        self.branches.iter().find(|b| b.id == id)
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_diagram_point(sc: &ShootingContext, p: &BranchPoint) -> Result<DiagramPoint> {
    Ok(DiagramPoint {
        lambda: p.lambda,
        beta1: p.beta1,
        beta2: p.beta2,
        u1: sc.kernel().eval_g(p.beta2)?,
        d: p.d,
        morse: p.morse,
    })
}

fn with_morse(sc: &ShootingContext, pts: &mut [BranchPoint], k: usize, nodes: usize) {
    pts.par_iter_mut().for_each(|p| {
        p.morse = reconstruct_solution(sc, p.lambda, p.beta1, p.beta2, nodes + 1)
            .and_then(|prof| spectrum::morse_index(&prof, sc, nodes, 2 * k + 4))
            .ok()
            .map(|s| s.morse_index);
    });
}

/// Morse index of the trivial solution from the closed-form spectrum
/// `λf′(0) − κ²`, κ ∈ {(k−1)π} ∪ {z_k}; `None` exactly at a bifurcation value.
pub fn trivial_morse(sc: &ShootingContext, lambda: f64) -> Result<Option<usize>> {
    let s = lambda * sc.kernel().nl().f_prime_0();
    let mut count = 0;
    for k in 1.. {
        let even = ((k - 1) as f64 * PI).powi(2);
        let z = z_root(sc.a(), k)?;
        let odd = z * z;
        if even == s || odd == s {
            return Ok(None);
        }
        let before = count;
        count += (even < s) as usize + (odd < s) as usize;
        if count == before {
            break;
        }
    }
    Ok(Some(count))
}

/// Every branch with λ ≤ `lambda_max` for modes up to `k_max`: trivial axis,
/// odd and even primary branches (both signs), and the secondary branches
/// through each bifurcation point on the odd ones.
pub fn assemble_diagram(sc: &ShootingContext, k_max: usize, lambda_max: f64, opts: &DiagramOptions) -> Result<Diagram> {
    let primaries = find_primary_bifurcations(sc, lambda_max)?;
    let mut branches = Vec::new();

    let mut lambdas: Vec<f64> = (1..=100).map(|j| lambda_max * j as f64 / 100.0).collect();
    lambdas.extend(primaries.iter().map(|p| p.lambda));
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup();
    let mut trivial = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        trivial.push(DiagramPoint {
            lambda: l,
            beta1: 0.0,
            beta2: 0.0,
            u1: 0.0,
            d: sc.eval_d(l, 0.0, 0.0)?,
            morse: if opts.morse { trivial_morse(sc, l)? } else { None },
        });
    }
    branches.push(DiagramBranch {
        id: "trivial".into(),
        kind: "trivial".into(),
        k: 0,
        sign: None,
        points: trivial,
    });

    let beta_grid = grid::default_branch_grid(sc.beta0(), opts.beta_points)?;
    let mut secondary_points = Vec::new();
    for k in 1..=k_max {
        for parity in [Parity::Odd, Parity::Even] {
            let n = match parity {
                Parity::Odd => 2 * k - 1,
                Parity::Even => 2 * k,
            };
            if !primaries.iter().any(|p| p.n == n) {
                continue;
            }
            let mut pts = vec![primary_point(sc, 0.0, k, parity)?];
            pts.extend(
                trace_primary(sc, k, parity, Sign::Plus, &beta_grid)?
                    .into_iter()
                    .take_while(|p| p.lambda <= lambda_max),
            );
            if opts.morse {
                with_morse(sc, &mut pts, k, opts.morse_nodes);
            }
            let name = match parity {
                Parity::Odd => "odd",
                Parity::Even => "even",
            };
            for sign in [Sign::Plus, Sign::Minus] {
                let points = pts
                    .iter()
                    .map(|p| {
                        let q = if sign == Sign::Plus { *p } else { p.mirrored() };
                        to_diagram_point(sc, &q)
                    })
                    .collect::<Result<Vec<_>>>()?;
                branches.push(DiagramBranch {
                    id: format!("{name}-k{k}{}", sign.symbol()),
                    kind: name.into(),
                    k,
                    sign: Some(sign),
                    points,
                });
            }
            if parity == Parity::Odd {
                let scan = find_secondary_bifurcations(sc, k, opts.scan_points)?;
                for bp in scan.points.iter().filter(|b| b.sign == Sign::Plus && b.lambda_star <= lambda_max) {
                    let sec = trace_secondary(sc, bp, opts.secondary_step, opts.secondary_steps, lambda_max)?;
                    let mut pts: Vec<BranchPoint> = sec
                        .points()
                        .into_iter()
                        .filter(|p| p.lambda <= lambda_max)
                        .collect();
                    if opts.morse {
                        with_morse(sc, &mut pts, k, opts.morse_nodes);
                    }
                    for sign in [Sign::Plus, Sign::Minus] {
                        let points = pts
                            .iter()
                            .map(|p| {
                                let q = if sign == Sign::Plus { *p } else { p.mirrored() };
                                to_diagram_point(sc, &q)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        branches.push(DiagramBranch {
                            id: format!("secondary-k{k}{}", sign.symbol()),
                            kind: "secondary".into(),
                            k,
                            sign: Some(sign),
                            points,
                        });
                    }
                    secondary_points.push(*bp);
                    secondary_points.push(bp.mirrored());
                }
            }
        }
    }
    Ok(Diagram {
        a: sc.a(),
        k_max,
        lambda_max,
        primary_bifurcations: primaries,
        secondary_bifurcations: secondary_points,
        branches,
    })
}
