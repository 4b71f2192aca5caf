use crate::config::{Config, NonlinearityName};
use crate::svg;
use anyhow::{bail, Context};
use bifurcata::acceptance::{self, Criterion};
use bifurcata::branches::{
    assemble_diagram, find_primary_bifurcations, find_secondary_bifurcations, primary_point, reconstruct_solution,
    fmt17, trace_primary, trace_secondary, BifurcationPoint, BranchPoint, DiagramOptions, SecondaryScan, Sign,
    CSV_HEADER,
};

use bifurcata::grid::default_branch_grid;
use bifurcata::nonlinearity::{check_conditions, GKernel, Nonlinearity};
use bifurcata::oracle::z_oracle;
use bifurcata::shooting::{Parity, ShootingContext};
use bifurcata::spectrum::{compute_spectrum, morse_index, Spectrum};
use bifurcata::{roots, Error};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Which solution family a selector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Trivial,
    Odd,
    Even,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SignArg {
    #[value(alias = "+")]
    Plus,
    #[value(alias = "-")]
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

fn parity(f: Family) -> anyhow::Result<Parity> {
    match f {
        Family::Odd => Ok(Parity::Odd),
        Family::Even => Ok(Parity::Even),
        other => bail!("family {other:?} has no primary branch parametrization"),
    }
}

/// Writes `name` under the output directory and reports the path.
fn write_out(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn branch_rows(sc: &ShootingContext, id: &str, pts: &[BranchPoint]) -> Result<String, Error> {
    let mut s = String::new();
    for p in pts {
        let u1 = sc.kernel().eval_g(p.beta2)?;
        let morse = p.morse.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{id},{},{},{},{},{},{morse}",
            fmt17(p.lambda),
            fmt17(p.beta1),
            fmt17(p.beta2),
            fmt17(u1),
            fmt17(p.d)
        );
    }
    Ok(s)
}

pub fn diagram(cfg: &Config, sc: &ShootingContext, grid: Option<usize>) -> anyhow::Result<()> {
    let opts = DiagramOptions {
        beta_points: grid.unwrap_or(cfg.grids.beta_points),
        scan_points: cfg.grids.scan_points,
        secondary_step: cfg.tolerances.secondary_step,
        secondary_steps: cfg.tolerances.secondary_steps,
        morse: cfg.output.morse,
        morse_nodes: cfg.grids.diagram_spectrum_nodes,
    };
    let d = assemble_diagram(sc, cfg.problem.k_max, cfg.problem.lambda_max, &opts)?;
    let csv = d.to_csv();
    let dir = &cfg.output.dir;
    write_out(dir, "diagram.csv", &csv)?;
    if cfg.output.json {
        write_out(dir, "diagram.json", &to_json(&d)?)?;
    }
    if cfg.output.svg {
        write_out(dir, "diagram.svg", &svg::render(&csv)?)?;
    }
    let points: usize = d.branches.iter().map(|b| b.points.len()).sum();
    println!(
        "{} branches, {points} points, {} primary and {} secondary bifurcation points up to λ = {}",
        d.branches.len(),
        d.primary_bifurcations.len(),
        d.secondary_bifurcations.len(),
        cfg.problem.lambda_max
    );
    Ok(())
}

/// First `+` secondary bifurcation point on the odd branch of mode `k`.
fn secondary_origin(sc: &ShootingContext, k: usize, n_scan: usize) -> anyhow::Result<BifurcationPoint> {
    let scan = find_secondary_bifurcations(sc, k, n_scan)?;
    scan.points
        .into_iter()
        .find(|p| p.sign == Sign::Plus)
        .ok_or_else(|| anyhow::Error::new(Error::NoRootFound {
            op: "find_secondary_bifurcations",
            detail: format!("no secondary bifurcation on the odd branch k = {k}"),
        }))
}

pub fn branch(
    cfg: &Config,
    sc: &ShootingContext,
    grid: Option<usize>,
    k: usize,
    family: Family,
    sign: SignArg,
) -> anyhow::Result<()> {
    let lambda_max = cfg.problem.lambda_max;
    let sign: Sign = sign.into();
    let (name, pts) = match family {
        Family::Secondary => {
            let origin = secondary_origin(sc, k, cfg.grids.scan_points)?;
            let sec = trace_secondary(
                sc,
                &origin,
                cfg.tolerances.secondary_step,
                cfg.tolerances.secondary_steps,
                lambda_max,
            )?;
            let sec = if sign == Sign::Plus { sec } else { sec.mirrored() };
            let pts: Vec<BranchPoint> = sec.points().into_iter().filter(|p| p.lambda <= lambda_max).collect();
            ("secondary", pts)
        }
        Family::Trivial => bail!("the trivial branch has no amplitude parametrization; use `diagram`"),
        f => {
            let parity = parity(f)?;
            let grid = default_branch_grid(sc.beta0(), grid.unwrap_or(cfg.grids.beta_points))?;
            let mut pts = vec![primary_point(sc, 0.0, k, parity)?];
            pts.extend(
                trace_primary(sc, k, parity, Sign::Plus, &grid)?
                    .into_iter()
                    .take_while(|p| p.lambda <= lambda_max),
            );
            if sign == Sign::Minus {
                pts = pts.iter().map(BranchPoint::mirrored).collect();
            }
            (if f == Family::Odd { "odd" } else { "even" }, pts)
        }
    };
    let id = format!("{name}-k{k}{}", sign.symbol());
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    csv.push_str(&branch_rows(sc, &id, &pts)?);
    write_out(&cfg.output.dir, &format!("branch-{id}.csv"), &csv)?;
    if cfg.output.json {
        write_out(&cfg.output.dir, &format!("branch-{id}.json"), &to_json(&pts)?)?;
    }
    println!("{id}: {} points", pts.len());
    Ok(())
}

#[derive(Serialize)]
struct BifpointsReport {
    primary: Vec<bifurcata::branches::PrimaryBifurcation>,
    secondary: Vec<SecondaryScan>,
}

pub fn bifpoints(cfg: &Config, sc: &ShootingContext, k: Option<usize>) -> anyhow::Result<()> {
    let modes: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=cfg.problem.k_max).collect(),
    };
    let mut csv = String::from("k,sign,beta_star,phi_star,lambda_star,q_beta\n");
    let mut secondary = Vec::new();
    for k in modes {
        let scan = match find_secondary_bifurcations(sc, k, cfg.grids.scan_points) {
            Ok(s) => s,
            Err(Error::NoRootFound { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        for p in &scan.points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                p.k,
                p.sign.symbol(),
                fmt17(p.beta_star),
                fmt17(p.phi_star),
                fmt17(p.lambda_star),
                fmt17(p.q_beta)
            );
            if p.sign == Sign::Plus {
                println!("k = {}: β* = {:.10}, λ* = {:.10}", p.k, p.beta_star, p.lambda_star);
            }
        }
        if scan.multiple_roots {
            println!("k = {k}: {} sign changes of Q_β on the odd branch", scan.sign_changes);
        }
        secondary.push(scan);
    }
    write_out(&cfg.output.dir, "bifpoints.csv", &csv)?;
    if cfg.output.json {
        let report = BifpointsReport {
            primary: find_primary_bifurcations(sc, cfg.problem.lambda_max)?,
            secondary,
        };
        write_out(&cfg.output.dir, "bifpoints.json", &to_json(&report)?)?;
    }
    Ok(())
}

/// Amplitude on the primary branch with `λ_k(β) = lambda`.
fn invert_branch(sc: &ShootingContext, lambda: f64, k: usize, parity: Parity) -> anyhow::Result<f64> {
    let cap = sc.beta0() * (1.0 - 1e-10);
    let f = |b: f64| sc.lambda_branch(b, k, parity).map(|l| l - lambda);
    let (lo, hi) = (f(0.0)?, f(cap)?);
    if lo > 0.0 || hi < 0.0 {
        return Err(Error::Domain {
            op: "invert_branch",
            value: lambda,
            reason: "lambda outside the range of the selected branch",
        }
        .into());
    }
    Ok(roots::bisect("invert_branch", f, 0.0, cap, 1e-14)?)
}

/// `(λ, β₁, β₂)` for a family selector with β or λ values.
fn select_points(
    sc: &ShootingContext,
    k: usize,
    family: Family,
    betas: &[f64],
    lambdas: &[f64],
) -> anyhow::Result<Vec<(f64, f64, f64)>> {
    if betas.is_empty() == lambdas.is_empty() {
        bail!("give either --beta or --lambda values");
    }
    match family {
        Family::Trivial => {
            if !betas.is_empty() {
                bail!("the trivial family is selected by --lambda");
            }
            Ok(lambdas.iter().map(|&l| (l, 0.0, 0.0)).collect())
        }
        Family::Secondary => bail!("secondary points are selected with `profile --lambda --beta1 --beta2`"),
        f => {
            let parity = parity(f)?;
            let partner = |b: f64| if parity == Parity::Odd { -b } else { b };
            let mut out = Vec::new();
            for &b in betas {
                out.push((sc.lambda_branch(b, k, parity)?, b, partner(b)));
            }
            for &l in lambdas {
                let b = invert_branch(sc, l, k, parity)?;
                out.push((l, b, partner(b)));
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct MorseRow {
    lambda: f64,
    beta1: f64,
    beta2: f64,
    morse: Option<usize>,
    note: Option<String>,
    spectrum: Spectrum,
}

#[allow(clippy::too_many_arguments)]
pub fn morse(
    cfg: &Config,
    sc: &ShootingContext,
    grid: Option<usize>,
    k: usize,
    family: Family,
    betas: &[f64],
    lambdas: &[f64],
) -> anyhow::Result<()> {
    let n = grid.unwrap_or(cfg.grids.spectrum_nodes);
    let m = 2 * k + 4;
    let mut rows = Vec::new();
    for (lambda, b1, b2) in select_points(sc, k, family, betas, lambdas)? {
        let prof = reconstruct_solution(sc, lambda, b1, b2, n + 1)?;
        let row = match morse_index(&prof, sc, n, m) {
            Ok(s) => MorseRow {
                lambda,
                beta1: b1,
                beta2: b2,
                morse: Some(s.morse_index),
                note: None,
                spectrum: s,
            },
            Err(e @ Error::IndexUncertain { .. }) => MorseRow {
                lambda,
                beta1: b1,
                beta2: b2,
                morse: None,
                note: Some(e.to_string()),
                spectrum: compute_spectrum(&prof, sc, n, m)?,
            },
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    let mut csv = String::from("lambda,beta1,beta2,morse,degenerate,zero_tolerance,eigenvalues\n");
    for r in &rows {
        let eig: Vec<String> = r.spectrum.eigenvalues.iter().map(|&x| fmt17(x)).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt17(r.lambda),
            fmt17(r.beta1),
            fmt17(r.beta2),
            r.morse.map(|m| m.to_string()).unwrap_or_default(),
            r.spectrum.degenerate,
            fmt17(r.spectrum.zero_tolerance),
            eig.join(";")
        );
        let idx = r.morse.map(|m| m.to_string()).unwrap_or_else(|| "uncertain".into());
        println!("λ = {:.8}, β = ({:.8}, {:.8}): index {idx}", r.lambda, r.beta1, r.beta2);
    }
    write_out(&cfg.output.dir, "morse.csv", &csv)?;
    if cfg.output.json {
        write_out(&cfg.output.dir, "morse.json", &to_json(&rows)?)?;
    }
    Ok(())
}

/// Explicit point or a family selector with exactly one β or λ.
pub struct ProfileSelector {
    pub lambda: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub k: usize,
    pub family: Option<Family>,
    pub beta: Option<f64>,
}

pub fn profile(cfg: &Config, sc: &ShootingContext, grid: Option<usize>, sel: &ProfileSelector) -> anyhow::Result<()> {
    let (lambda, b1, b2) = match (sel.family, sel.lambda, sel.beta1, sel.beta2) {
        (None, Some(l), Some(b1), Some(b2)) => (l, b1, b2),
        (Some(f), l, None, None) => {
            let betas: Vec<f64> = sel.beta.into_iter().collect();
            let lambdas: Vec<f64> = l.into_iter().collect();
            select_points(sc, sel.k, f, &betas, &lambdas)?[0]
        }
        _ => bail!("select a profile with --lambda --beta1 --beta2, or --family with --beta or --lambda"),
    };
    let n = grid.unwrap_or(cfg.grids.profile_nodes);
    let prof = reconstruct_solution(sc, lambda, b1, b2, n)?;
    // pair u(−s) with u(s); both sides share the node spacing 1/(n−1)
    let mut csv = String::from("s,u_left,u_right,ux_left,ux_right\n");
    for (j, r) in prof.right.iter().enumerate() {
        let l = &prof.left[n - 1 - j];
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt17(r.x),
            fmt17(l.u),
            fmt17(r.u),
            fmt17(l.ux),
            fmt17(r.ux)
        );
    }
    write_out(&cfg.output.dir, "profile.csv", &csv)?;
    if cfg.output.json {
        write_out(&cfg.output.dir, "profile.json", &to_json(&prof)?)?;
    }
    let r = prof.matching_residual();
    println!(
        "λ = {lambda}, β = ({b1}, {b2}): {} interior zeros, matching residual {:.2e}",
        prof.interior_zeros(),
        r[0].abs().max(r[1].abs())
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub nonlinearity: NonlinearityName,
    pub a: f64,
    pub checks: Vec<Check>,
    pub acceptance: Vec<Criterion>,
    pub passed: bool,
}

fn configured_unchecked(cfg: &Config) -> anyhow::Result<Nonlinearity> {
    Ok(match cfg.problem.nonlinearity {
        NonlinearityName::Cubic => Nonlinearity::cubic(),
        NonlinearityName::Sine => Nonlinearity::sine(),
        NonlinearityName::Custom => Nonlinearity::polynomial_unchecked(&cfg.problem.coefficients)?,
    })
}

fn condition_checks(nl: &Nonlinearity) -> Vec<Check> {
    let r = check_conditions(nl, 4000);
    let mut out: Vec<Check> = [
        ("conditions.basic", r.basic),
        ("conditions.derivative_sign", r.derivative_sign),
        ("conditions.ratio_monotone", r.ratio_monotone),
        ("conditions.outer_monotone", r.outer_monotone),
        ("conditions.weak", r.weak),
    ]
    .into_iter()
    .map(|(name, c)| Check::new(name, c.holds, format!("worst margin {:e} over 4000 samples", c.margin)))
    .collect();
    out.push(Check::new(
        "nonlinearity.shape",
        nl.validate_shape().is_ok(),
        nl.validate_shape().err().map(|e| e.to_string()).unwrap_or_else(|| "admissible".into()),
    ));
    out
}

/// Sampled invariants of the kernel and shooting functions for the
/// configured problem.
fn invariant_checks(cfg: &Config, nl: &Nonlinearity) -> Vec<Check> {
    let mut out = Vec::new();
    let gk = match GKernel::new(nl.clone()) {
        Ok(gk) => gk,
        Err(e) => return vec![Check::new("kernel.construct", false, e.to_string())],
    };
    let b0 = gk.beta0();
    let mut round_trip = 0.0f64;
    let mut oddness = 0.0f64;
    for i in 1..1000 {
        let v = b0 * (-1.0 + 2.0 * i as f64 / 1000.0) * 0.999;
        match (gk.eval_g(v), gk.eval_g(-v)) {
            (Ok(u), Ok(w)) => {
                round_trip = round_trip.max((nl.eval_energy(u) - v * v).abs() / (v * v).max(1.0));
                oddness = oddness.max((u + w).abs());
            }
            _ => round_trip = f64::INFINITY,
        }
    }
    out.push(Check::new("kernel.round_trip", round_trip < 1e-12, format!("max {round_trip:e}")));
    out.push(Check::new("kernel.odd", oddness <= 1e-13, format!("max {oddness:e}")));

    let sc = match ShootingContext::new(gk, cfg.problem.a) {
        Ok(sc) => sc,
        Err(e) => return [out, vec![Check::new("shooting.construct", false, e.to_string())]].concat(),
    };
    let mut anti = 0.0f64;
    for i in 1..=20 {
        let lambda = cfg.problem.lambda_max * i as f64 / 20.0;
        let b = 0.9 * b0 * i as f64 / 20.0;
        match (sc.eval_pq(lambda, b), sc.eval_pq(lambda, -b)) {
            (Ok((p, q)), Ok((pm, qm))) => anti = anti.max((p + pm).abs()).max((q + qm).abs()),
            _ => anti = f64::INFINITY,
        }
    }
    out.push(Check::new("shooting.antisymmetry", anti <= 1e-12, format!("max {anti:e}")));

    let fp0 = nl.f_prime_0();
    let primary = find_primary_bifurcations(&sc, cfg.problem.lambda_max);
    let detail = match &primary {
        Ok(list) => {
            let worst = list
                .iter()
                .map(|p| {
                    let k = p.n.div_ceil(2);
                    let exact = if p.n % 2 == 1 {
                        z_oracle(cfg.problem.a, k).map(|z| z * z / fp0).unwrap_or(f64::NAN)
                    } else {
                        (k as f64 * PI).powi(2) / fp0
                    };
                    (p.lambda - exact).abs()
                })
                .fold(0.0, f64::max);
            (worst < 1e-10, format!("{} values up to λ_max, max error {worst:e}", list.len()))
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(Check::new("branches.primary_points", detail.0, detail.1));

    let grid = default_branch_grid(b0, 100);
    for k in 1..=cfg.problem.k_max {
        for parity in [Parity::Odd, Parity::Even] {
            let name = format!("branches.monotone.{parity:?}.k{k}").to_lowercase();
            let res = grid
                .clone()
                .and_then(|g| trace_primary(&sc, k, parity, Sign::Plus, &g).map(|p| p.len()));
            out.push(match res {
                Ok(n) => Check::new(&name, true, format!("{n} points")),
                Err(e) => Check::new(&name, false, e.to_string()),
            });
        }
    }
    out
}

pub fn verify(cfg: &Config, skip_acceptance: bool) -> anyhow::Result<VerifyReport> {
    let nl = configured_unchecked(cfg)?;
    let mut checks = condition_checks(&nl);
    if checks.iter().all(|c| c.passed) {
        checks.extend(invariant_checks(cfg, &nl));
    } else {
        checks.push(Check::new(
            "invariants",
            false,
            "skipped: the nonlinearity is outside the admissible class",
        ));
    }
    let acceptance = if skip_acceptance {
        Vec::new()
    } else {
        (1..=12)
            .map(|id| {
                let c = acceptance::run(id);
                eprintln!("{}", c.line());
                c
            })
            .collect()
    };
    let passed = checks.iter().all(|c| c.passed) && acceptance.iter().all(|c| c.passed);
    let report = VerifyReport {
        nonlinearity: cfg.problem.nonlinearity,
        a: cfg.problem.a,
        checks,
        acceptance,
        passed,
    };
    let json = to_json(&report)?;
    print!("{json}");
    std::fs::create_dir_all(&cfg.output.dir).with_context(|| format!("creating {}", cfg.output.dir.display()))?;
    let path = cfg.output.dir.join("verify.json");
    std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAILED {}: {}", c.name, c.detail);
    }
    for c in report.acceptance.iter().filter(|c| !c.passed) {
        eprintln!("FAILED criterion {}: {}", c.id, c.detail);
    }
    Ok(report)
}

/// Quick end-to-end check of the default cubic problem.
pub fn selftest() -> bool {
    let mut ok = true;
    for id in [1, 3, 4, 10] {
        let c = acceptance::run(id);
        println!("{}", c.line());
        ok &= c.passed;
    }
    ok
}
