use bifurcata::acceptance::trivial_eigenvalues;
use bifurcata::branches::{find_secondary_bifurcations, reconstruct_solution};
use bifurcata::nonlinearity::{GKernel, Nonlinearity};
use bifurcata::oracle::z_oracle;
use bifurcata::shooting::{Parity, ShootingContext};
use bifurcata::spectrum::{
    build_extended, compute_spectrum, eigen_cross_check_with, eigenvalues_top, morse_index, nondegeneracy_verdict,
};
use bifurcata::Error;
use proptest::prelude::*;

const N: usize = 400;

fn cubic() -> ShootingContext {
    ShootingContext::new(GKernel::new(Nonlinearity::cubic()).unwrap(), 1.0).unwrap()
}

fn odd_profile(sc: &ShootingContext, beta: f64, k: usize) -> bifurcata::branches::SolutionProfile {
    let lambda = sc.lambda_branch(beta, k, Parity::Odd).unwrap();
    reconstruct_solution(sc, lambda, beta, -beta, N + 1).unwrap()
}

#[test]
fn trivial_spectrum_matches_closed_form() {
    let sc = cubic();
    let lambda = 20.0;
    let exact = trivial_eigenvalues(&sc, lambda, 6).unwrap();
    let prof = reconstruct_solution(&sc, lambda, 0.0, 0.0, N + 1).unwrap();
    let s = compute_spectrum(&prof, &sc, N, 6).unwrap();
    for (i, (m, e)) in s.eigenvalues.iter().zip(&exact).enumerate() {
        assert!((m - e).abs() < 1e-6 * e.abs().max(1.0), "μ{i}: {m} vs {e}");
        assert!((m - e).abs() <= s.error_estimates[i] * 10.0 + 1e-9);
    }
    assert_eq!(s.morse_index, exact.iter().filter(|&&m| m > 0.0).count());
}

#[test]
fn trivial_single_grid_error_is_second_order() {
    let sc = cubic();
    let lambda = 20.0;
    let exact = trivial_eigenvalues(&sc, lambda, 4).unwrap();
    let err = |n: usize| {
        let prof = reconstruct_solution(&sc, lambda, 0.0, 0.0, n + 1).unwrap();
        let ep = build_extended(&prof, &sc, n).unwrap();
        eigenvalues_top(&ep, 4).unwrap().eigenvalues[1] - exact[1]
    };
    let ratio = err(100) / err(200);
    assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
}

#[test]
fn trivial_zero_mode_at_first_bifurcation() {
    let sc = cubic();
    let l1 = z_oracle(1.0, 1).unwrap().powi(2);
    let prof = reconstruct_solution(&sc, l1, 0.0, 0.0, N + 1).unwrap();
    let s = compute_spectrum(&prof, &sc, N, 4).unwrap();
    assert!(s.eigenvalues[1].abs() < 1e-6);
    assert!(s.degenerate);
    assert!(matches!(morse_index(&prof, &sc, N, 4), Err(Error::IndexUncertain { .. })));

    // just above λ₁ both the constant mode λf′(0) and λf′(0) − z₁² are positive
    let prof = reconstruct_solution(&sc, l1 + 0.01, 0.0, 0.0, N + 1).unwrap();
    let expect = trivial_eigenvalues(&sc, l1 + 0.01, 4).unwrap().iter().filter(|&&m| m > 0.0).count();
    assert_eq!(expect, 2);
    assert_eq!(morse_index(&prof, &sc, N, 4).unwrap().morse_index, expect);
}

#[test]
fn extended_problem_structure() {
    let sc = cubic();
    let prof = odd_profile(&sc, 0.4, 1);
    let ep = build_extended(&prof, &sc, N).unwrap();
    let a = sc.a();
    for x in [-a, a] {
        let eps = 1e-12;
        assert!((ep.ubar(x - eps) - ep.ubar(x + eps)).abs() < 1e-10);
    }
    let slope = (ep.ubar(0.5 * a) - ep.ubar(-0.5 * a)) / a;
    assert!((slope - prof.ux_minus0()).abs() < 1e-10);
    assert_eq!(ep.weight(0.0), 0.0);
    assert_eq!(ep.potential(0.0), 0.0);
    assert!(ep.weight(-1.0 - a) > 0.0);

    let triv = reconstruct_solution(&sc, 3.0, 0.0, 0.0, N + 1).unwrap();
    let ep = build_extended(&triv, &sc, N).unwrap();
    assert!((ep.potential(-1.5 - a / 2.0 + 0.5) - 3.0).abs() < 1e-14);
}

#[test]
fn odd_branch_index_changes_at_secondary_point() {
    let sc = cubic();
    let bp = find_secondary_bifurcations(&sc, 1, 400).unwrap().points[0];
    let below = odd_profile(&sc, 0.8 * bp.beta_star, 1);
    let above = odd_profile(&sc, 0.5 * (bp.beta_star + sc.beta0()), 1);
    assert_eq!(morse_index(&below, &sc, N, 6).unwrap().morse_index, 1);
    assert_eq!(morse_index(&above, &sc, N, 6).unwrap().morse_index, 0);

    // the eigenvalue through zero decreases in λ while D increases
    let at = |beta: f64| {
        let p = odd_profile(&sc, beta, 1);
        let mu = compute_spectrum(&p, &sc, N, 4).unwrap().eigenvalues[0];
        let d = sc.eval_d(p.lambda, beta, -beta).unwrap();
        (p.lambda, mu, d)
    };
    let h = 1e-3;
    let (l0, m0, d0) = at(bp.beta_star - h);
    let (l1, m1, d1) = at(bp.beta_star + h);
    assert!(m0 > 0.0 && m1 < 0.0);
    assert!((m1 - m0) / (l1 - l0) < 0.0);
    assert!((d1 - d0) / (l1 - l0) > 0.0);

    let prof = odd_profile(&sc, bp.beta_star, 1);
    let s = compute_spectrum(&prof, &sc, 2000, 4).unwrap();
    let rep = nondegeneracy_verdict(&sc, prof.lambda, bp.beta_star, -bp.beta_star, &s).unwrap();
    assert!(!rep.d_nondegenerate && s.degenerate && rep.agree, "{rep:?}");
}

#[test]
fn even_branch_is_nondegenerate_with_index_two() {
    let sc = cubic();
    for beta in [0.1, 0.4, 0.65] {
        let lambda = sc.lambda_branch(beta, 1, Parity::Even).unwrap();
        let prof = reconstruct_solution(&sc, lambda, beta, beta, N + 1).unwrap();
        let s = morse_index(&prof, &sc, N, 6).unwrap();
        assert_eq!(s.morse_index, 2);
        assert!(s.eigenvalues[2] < 0.0);
        let rep = nondegeneracy_verdict(&sc, lambda, beta, beta, &s).unwrap();
        assert!(rep.d > 0.0 && rep.agree);
    }
}

#[test]
fn shooting_cross_check() {
    let sc = cubic();
    let prof = odd_profile(&sc, 0.4, 1);
    let fd = compute_spectrum(&prof, &sc, N, 5).unwrap();
    let sh = eigen_cross_check_with(&prof, &sc, N, 5).unwrap();
    for e in &sh {
        let m = fd.eigenvalues[e.rank];
        assert!((e.mu - m).abs() < 1e-4 * m.abs().max(1.0));
        assert_eq!(e.zeros, e.rank);
        let expect = if e.rank % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(e.end_sign, expect, "rank {}", e.rank);
    }
}

#[test]
fn generic_trivial_point_is_nondegenerate() {
    let sc = cubic();
    let prof = reconstruct_solution(&sc, 5.0, 0.0, 0.0, N + 1).unwrap();
    let s = compute_spectrum(&prof, &sc, N, 4).unwrap();
    let rep = nondegeneracy_verdict(&sc, 5.0, 0.0, 0.0, &s).unwrap();
    assert!(rep.d_nondegenerate && rep.spectral_nondegenerate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn odd_branch_bounds_and_simplicity(s in 0.05f64..0.95, k in 1usize..3) {
        let sc = cubic();
        let beta = s * sc.beta0();
        let prof = odd_profile(&sc, beta, k);
        let sp = compute_spectrum(&prof, &sc, N, 2 * k + 2).unwrap();
        // odd-branch solutions have u(−0)u(+0) < 0, so μ_{2k−1} < 0
        prop_assert!(prof.u_minus0() * prof.u_plus0() < 0.0);
        prop_assert!(sp.eigenvalues[2 * k - 1] < 0.0);
        if !sp.degenerate {
            let err = sp.error_estimates.iter().copied().fold(0.0, f64::max);
            prop_assert!(sp.min_gap() > 100.0 * err);
        }
        prop_assert!(sp.eigenvalues.windows(2).all(|w| w[0] > w[1]));
    }
}
