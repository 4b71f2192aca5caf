use super::{integrate_ivp, Side};
use crate::branches::{find_secondary_bifurcations, trace_secondary};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::shooting::{z_root, Parity, ShootingContext};
use rayon::prelude::*;
use serde::Serialize;

/// Closest approach of the grid to ±β₀, as a fraction of β₀.
const EDGE_GAP: f64 = 1e-12;
/// Weight of the logarithmic part of the grid coordinate.
const LOG_WEIGHT: f64 = 0.1;
/// Match radius, in cells, between a marked cell and a known solution.
const MATCH_CELLS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "k")]
pub enum CellClass {
    Unclassified,
    Trivial,
    Odd(usize),
    Even(usize),
    Secondary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub i: usize,
    pub j: usize,
    /// cell centre in amplitude coordinates
    pub beta1: f64,
    pub beta2: f64,
    pub class: CellClass,
}

/// Marked cells of the map `(β₁, β₂) ↦ (P₁ − P₂, Q₁ + Q₂)` at fixed λ.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub lambda: f64,
    pub a: f64,
    /// cells per axis
    pub grid: usize,
    pub beta0: f64,
    pub cells: Vec<ScanCell>,
}

impl ScanResult {
    /// Amplitude at corner `i`.
    pub fn corner(&self, i: usize) -> f64 {
        corner(self.beta0, self.grid, i)
    }

    /// Continuous grid index of an amplitude.
    pub fn index_of(&self, beta: f64) -> f64 {
        let d = (beta.abs() / self.beta0).min(1.0 - EDGE_GAP);
        let s = beta.signum() * stretch(d) / stretch(1.0 - EDGE_GAP);
        (s + 1.0) * self.grid as f64 / 2.0
    }

    /// Marked cells no known solution accounts for.
    pub fn flagged(&self) -> Vec<&ScanCell> {
        self.cells.iter().filter(|c| c.class == CellClass::Unclassified).collect()
    }
}

/// Grid coordinate of `d = |β|/β₀`: linear near 0 and logarithmic in
/// `1 − d` near the edge, where the solution lingers near the saddle ±1
/// and the matching map varies on the scale of `log(β₀ − |β|)`.
fn stretch(d: f64) -> f64 {
    d + LOG_WEIGHT * (-(-d).ln_1p() - d)
}

/// Corners uniform in the stretched coordinate on [−1, 1].
fn corner(beta0: f64, grid: usize, i: usize) -> f64 {
    let s = -1.0 + 2.0 * i as f64 / grid as f64;
    let target = s.abs() * stretch(1.0 - EDGE_GAP);
    let (mut lo, mut hi) = (0.0f64, 1.0 - EDGE_GAP);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stretch(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if s == 0.0 {
        return 0.0;
    }
    let d = if s.abs() == 1.0 { 1.0 - EDGE_GAP } else { 0.5 * (lo + hi) };
    s.signum() * beta0 * d
}

fn changes_sign(v: [f64; 4]) -> bool {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Integrates one left-end problem per grid amplitude and marks the cells in
/// which both residual components change sign over the four corners. Cells
/// start out unclassified; see [`classify_cells`].
pub fn scan_solution_set(nl: &Nonlinearity, a: f64, lambda: f64, grid: usize) -> Result<ScanResult> {
    if grid < 100 {
        return Err(Error::InvalidParameter("scan grid must have at least 100 cells".into()));
    }
    let beta0 = nl.beta0();
    let sl = lambda.sqrt();
    // P = u(0) + a u_x(0), Q = u_x(0)/√λ for the problem started at x = −1;
    // the right-end problem gives the same values with the slope reversed
    let pq: Vec<(f64, f64)> = (0..=grid)
        .into_par_iter()
        .map(|i| {
            let s = integrate_ivp(nl, lambda, corner(beta0, grid, i), Side::Left, 2000)?;
            let (u, ux) = s.inner();
            Ok((u + a * ux, ux / sl))
        })
        .collect::<Result<_>>()?;
    let cells = (0..grid)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pq = &pq;
            (0..grid).filter_map(move |j| {
                let mut r1 = [0.0; 4];
                let mut r2 = [0.0; 4];
                for (c, (di, dj)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                    let (p1, q1) = pq[i + di];
                    let (p2, q2) = pq[j + dj];
                    r1[c] = p1 - p2;
                    r2[c] = q1 + q2;
                }
                (changes_sign(r1) && changes_sign(r2)).then(|| ScanCell {
                    i,
                    j,
                    beta1: 0.5 * (corner(beta0, grid, i) + corner(beta0, grid, i + 1)),
                    beta2: 0.5 * (corner(beta0, grid, j) + corner(beta0, grid, j + 1)),
                    class: CellClass::Unclassified,
                })
            })
        })
        .collect();
    Ok(ScanResult {
        lambda,
        a,
        grid,
        beta0,
        cells,
    })
}

/// A solution of the matching system at the scan's λ, from the analytic
/// modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnownSolution {
    pub beta1: f64,
    pub beta2: f64,
    pub class: CellClass,
}

/// Labels each marked cell with the nearest known solution within 1.5 cells
/// (in grid-index distance); cells with no such solution stay unclassified.
pub fn classify_cells(scan: &mut ScanResult, known: &[KnownSolution]) {
    let idx: Vec<(f64, f64, CellClass)> = known
        .iter()
        .map(|k| (scan.index_of(k.beta1), scan.index_of(k.beta2), k.class))
        .collect();
    for cell in &mut scan.cells {
        let (ci, cj) = (cell.i as f64 + 0.5, cell.j as f64 + 0.5);
        cell.class = idx
            .iter()
            .map(|&(ki, kj, class)| ((ki - ci).abs().max((kj - cj).abs()), class))
            .filter(|(d, _)| *d <= MATCH_CELLS)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, c)| c)
            .unwrap_or(CellClass::Unclassified);
    }
}

fn push_images(out: &mut Vec<KnownSolution>, b1: f64, b2: f64, class: CellClass) {
    for (x, y) in [(b1, b2), (-b1, -b2), (b2, b1), (-b2, -b1)] {
        if !out.iter().any(|k| k.beta1 == x && k.beta2 == y) {
            out.push(KnownSolution { beta1: x, beta2: y, class });
        }
    }
}

/// Amplitude on a primary branch with `λ_k(β) = lambda`, if any.
fn invert_primary(sc: &ShootingContext, lambda: f64, k: usize, parity: Parity) -> Result<Option<f64>> {
    let cap = sc.beta0() * (1.0 - 1e-10);
    let f = |b: f64| sc.lambda_branch(b, k, parity).map(|l| l - lambda);
    if f(0.0)? >= 0.0 || f(cap)? <= 0.0 {
        return Ok(None);
    }
    crate::roots::bisect("known_solutions", f, 0.0, cap, 1e-14).map(Some)
}

/// Newton on the matching system at fixed λ from an approximate point.
fn refine(sc: &ShootingContext, lambda: f64, mut b1: f64, mut b2: f64) -> Result<(f64, f64)> {
    for _ in 0..30 {
        let p1 = sc.point(lambda, b1)?;
        let p2 = sc.point(lambda, b2)?;
        let f = [p1.p - p2.p, p1.q + p2.q];
        let j = [[p1.p_beta, -p2.p_beta], [p1.q_beta, p2.q_beta]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let d1 = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let d2 = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        b1 -= d1;
        b2 -= d2;
        if d1.abs().max(d2.abs()) < 1e-14 {
            break;
        }
    }
    Ok((b1, b2))
}

/// Every solution the analytic modules predict at `lambda`: the trivial one,
/// the odd and even primary branches, and the secondary branches, each with
/// its images under `(β₁,β₂) ↦ (−β₁,−β₂)` and `(β₁,β₂) ↦ (β₂,β₁)`.
pub fn known_solutions(sc: &ShootingContext, lambda: f64) -> Result<Vec<KnownSolution>> {
    let mut out = vec![KnownSolution {
        beta1: 0.0,
        beta2: 0.0,
        class: CellClass::Trivial,
    }];
    let fp0 = sc.kernel().nl().f_prime_0();
    for k in 1.. {
        let z = z_root(sc.a(), k)?;
        if z * z / fp0 >= lambda {
            break;
        }
        if let Some(b) = invert_primary(sc, lambda, k, Parity::Odd)? {
            push_images(&mut out, b, -b, CellClass::Odd(k));
        }
        if let Some(b) = invert_primary(sc, lambda, k, Parity::Even)? {
            push_images(&mut out, b, b, CellClass::Even(k));
        }
        let scan = match find_secondary_bifurcations(sc, k, 400) {
            Ok(s) => s,
            Err(Error::NoRootFound { .. }) => continue,
            Err(e) => return Err(e),
        };
        for bp in scan.points.iter().filter(|p| p.beta_star > 0.0 && p.lambda_star < lambda) {
            let branch = trace_secondary(sc, bp, 1e-3, 4000, lambda * 1.01 + 1e-3)?;
            let pts = branch.points();
            for w in pts.windows(2) {
                let (l0, l1) = (w[0].lambda - lambda, w[1].lambda - lambda);
                if l0 == 0.0 || l0.signum() != l1.signum() {
                    let t = if l0 == l1 { 0.0 } else { l0 / (l0 - l1) };
                    let b1 = w[0].beta1 + t * (w[1].beta1 - w[0].beta1);
                    let b2 = w[0].beta2 + t * (w[1].beta2 - w[0].beta2);
                    let (b1, b2) = refine(sc, lambda, b1, b2)?;
                    push_images(&mut out, b1, b2, CellClass::Secondary(k));
                }
            }
        }
    }
    Ok(out)
}
