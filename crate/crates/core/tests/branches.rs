use bifurcata::branches::{
    assemble_diagram, find_primary_bifurcations, find_secondary_bifurcations, matching_residual, reconstruct_solution,
    trace_primary, trace_secondary, BranchKind, DiagramOptions, Sign, CSV_HEADER,
};
use bifurcata::grid::default_branch_grid;
use bifurcata::nonlinearity::{GKernel, Nonlinearity};
use bifurcata::oracle::{self, g_oracle, z_oracle, Side};
use bifurcata::shooting::{Parity, ShootingContext};
use proptest::prelude::*;
use std::f64::consts::PI;

fn cubic() -> ShootingContext {
    ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap()
}

#[test]
fn primary_bifurcation_values() {
    let sc = cubic();
    let pb = find_primary_bifurcations(&sc, 40.0).unwrap();
    let expect = [
        z_oracle(1.0, 1).unwrap().powi(2),
        PI * PI,
        z_oracle(1.0, 2).unwrap().powi(2),
        4.0 * PI * PI,
    ];
    assert_eq!(pb.len(), 4);
    for (p, e) in pb.iter().zip(expect) {
        assert!((p.lambda - e).abs() < 1e-10 * e, "{} vs {e}", p.lambda);
        assert!(p.sign_change);
        assert!(p.d_slope != 0.0);
    }
}

#[test]
fn primary_branches_solve_the_matching_system() {
    let sc = cubic();
    let grid = default_branch_grid(sc.beta0(), 40).unwrap();
    for parity in [Parity::Odd, Parity::Even] {
        for k in 1..=2 {
            let plus = trace_primary(&sc, k, parity, Sign::Plus, &grid).unwrap();
            let minus = trace_primary(&sc, k, parity, Sign::Minus, &grid).unwrap();
            for (p, m) in plus.iter().zip(&minus) {
                assert_eq!(p.kind, BranchKind::from(parity));
                assert_eq!((m.beta1, m.beta2, m.lambda), (-p.beta1, -p.beta2, p.lambda));
                let r = matching_residual(&sc, p.lambda, p.beta1, p.beta2).unwrap();
                assert!(r < 1e-9, "{parity:?} k={k} β={} r={r}", p.beta1);
            }
            assert!(plus.windows(2).all(|w| w[1].lambda > w[0].lambda));
        }
    }
}

#[test]
fn rejects_grid_outside_domain() {
    let sc = cubic();
    assert!(trace_primary(&sc, 1, Parity::Odd, Sign::Plus, &[0.1, sc.beta0()]).is_err());
    assert!(trace_primary(&sc, 1, Parity::Odd, Sign::Plus, &[0.0, 0.1]).is_err());
}

#[test]
fn first_secondary_bifurcation() {
    let sc = cubic();
    let scan = find_secondary_bifurcations(&sc, 1, 400).unwrap();
    assert_eq!(scan.sign_changes, 1);
    assert!(!scan.multiple_roots);
    let bp = scan.points.iter().find(|p| p.sign == Sign::Plus).unwrap();
    assert!(bp.q_beta.abs() < 1e-9);
    assert!(bp.beta_star > sc.kernel().v0() && bp.beta_star < sc.beta0());
    // the mirror point is on the list too
    assert!(scan.points.iter().any(|p| p.beta_star == -bp.beta_star));
    // λ* exceeds the primary bifurcation value
    assert!(bp.lambda_star > z_oracle(1.0, 1).unwrap().powi(2));
}

#[test]
fn secondary_branch_is_asymmetric_solution_curve() {
    let sc = cubic();
    let scan = find_secondary_bifurcations(&sc, 1, 400).unwrap();
    let bp = scan.points[0];
    let branch = trace_secondary(&sc, &bp, 1e-3, 200, 6.0).unwrap();
    let pts = branch.points();
    assert!(pts.len() > 20);
    for p in &pts {
        assert!(matching_residual(&sc, p.lambda, p.beta1, p.beta2).unwrap() < 1e-9);
    }
    let far = pts.iter().max_by(|a, b| a.lambda.total_cmp(&b.lambda)).unwrap();
    assert!((far.beta1 + far.beta2).abs() > 1e-4 && (far.beta1 - far.beta2).abs() > 1e-4);
    let mirror = branch.mirrored();
    assert_eq!(mirror.forward[0].beta1, -branch.forward[0].beta1);
}

#[test]
fn profile_agrees_with_initial_value_oracle() {
    let sc = cubic();
    let nl = Nonlinearity::cubic();
    let (lambda, beta) = (2.0, 0.4);
    let prof = reconstruct_solution(&sc, lambda, beta, beta, 201).unwrap();
    let ivp = oracle::integrate_ivp(&nl, lambda, beta, Side::Left, 1000).unwrap();
    for node in &prof.left {
        let (u, ux) = ivp.at(&nl, node.x);
        assert!((node.u - u).abs() < 1e-8, "x={} {} vs {u}", node.x, node.u);
        assert!((node.ux - ux).abs() < 1e-8 * lambda.sqrt());
    }
    assert!((prof.left[0].u - g_oracle(&nl, beta).unwrap()).abs() < 1e-13);
    assert!(prof.energy_spread(&nl) < 1e-10);
}

#[test]
fn zero_count_on_odd_branches() {
    // the k-th odd branch has k − 1 sign changes on each half-interval
    let sc = cubic();
    for k in 1..=3 {
        let lambda = sc.lambda_branch(0.3, k, Parity::Odd).unwrap();
        let prof = reconstruct_solution(&sc, lambda, 0.3, -0.3, 401).unwrap();
        assert_eq!(prof.interior_zeros(), 2 * (k - 1), "k={k}");
        let r = prof.matching_residual();
        assert!(r[0].abs() < 1e-9 && r[1].abs() < 1e-9);
    }
}

#[test]
fn diagram_below_first_bifurcation_is_trivial_only() {
    let sc = cubic();
    let d = assemble_diagram(&sc, 2, 0.5, &DiagramOptions::default()).unwrap();
    assert_eq!(d.branches.len(), 1);
    assert_eq!(d.branches[0].id, "trivial");
    assert!(d.primary_bifurcations.is_empty());
}

#[test]
fn diagram_layout_and_csv() {
    let sc = cubic();
    let opts = DiagramOptions {
        beta_points: 40,
        scan_points: 100,
        secondary_steps: 100,
        ..DiagramOptions::default()
    };
    let d = assemble_diagram(&sc, 1, 5.0, &opts).unwrap();
    let ids: Vec<&str> = d.branches.iter().map(|b| b.id.as_str()).collect();
    for id in ["trivial", "odd-k1+", "odd-k1-", "secondary-k1+", "secondary-k1-"] {
        assert!(ids.contains(&id), "{ids:?}");
    }
    assert!(d.branch("even-k1+").is_none());
    let csv = d.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), d.branches.iter().map(|b| b.points.len()).sum::<usize>());
    assert!(rows.iter().all(|r| r.len() == 7));
    for r in &rows {
        let lambda: f64 = r[1].parse().unwrap();
        assert!(lambda <= 5.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boundary_value_round_trip(s in 0.01f64..0.99, k in 1usize..3, even in any::<bool>()) {
        let sc = cubic();
        let nl = Nonlinearity::cubic();
        let parity = if even { Parity::Even } else { Parity::Odd };
        let b = s * sc.beta0();
        let lambda = sc.lambda_branch(b, k, parity).unwrap();
        let b2 = if even { b } else { -b };
        let prof = reconstruct_solution(&sc, lambda, b, b2, 65).unwrap();
        // u(−1) = G(β₁), recovered by inverting the energy
        let u = prof.left[0].u;
        let back = u.signum() * nl.eval_energy(u).sqrt();
        prop_assert!((back - b).abs() <= 1e-12);
        prop_assert!(prof.left[0].ux.abs() <= 1e-12 && prof.right.last().unwrap().ux.abs() <= 1e-12);
        prop_assert!(prof.max_abs_u() < 1.0);
    }
}
