use bifurcata::nonlinearity::{GKernel, Nonlinearity};
use bifurcata::oracle::{tanh_sinh, time_map_oracle, g_oracle};
use bifurcata::quadrature::PhaseIntegrator;
use proptest::prelude::*;
use std::f64::consts::PI;

fn integrator(nl: Nonlinearity) -> PhaseIntegrator {
    PhaseIntegrator::new(GKernel::new(nl).unwrap())
}

#[test]
fn zero_amplitude_is_linear() {
    let pi = integrator(Nonlinearity::sine());
    let v = pi.theta_integral(0.0, 2.5).unwrap();
    assert!((v - 2.5 / PI.sqrt()).abs() < 1e-14);
    assert_eq!(pi.curvature_integral(0.0, 2.5).unwrap(), 0.0);
    assert!((pi.solve_theta(1.7, 0.0).unwrap() - 1.7 * PI.sqrt()).abs() < 1e-12);
    assert_eq!(pi.solve_theta(0.0, 0.3).unwrap(), 0.0);
}

#[test]
fn theta_integral_matches_independent_scheme() {
    for nl in [Nonlinearity::cubic(), Nonlinearity::sine()] {
        let pi = integrator(nl.clone());
        let b0 = nl.beta0();
        for (frac, phi) in [(0.7, PI), (0.3, 2.0), (0.9, 5.0)] {
            let beta = frac * b0;
            let ours = pi.theta_integral(beta, phi).unwrap();
            let oracle = time_map_oracle(&nl, beta, phi).unwrap();
            assert!((ours - oracle).abs() < 1e-10 * oracle, "{beta} {phi}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn near_singular_amplitude() {
    let nl = Nonlinearity::cubic();
    let pi = integrator(nl.clone());
    let beta = (1.0 - 1e-6) * nl.beta0();
    let ours = pi.theta_integral(beta, PI / 2.0).unwrap();
    let oracle = time_map_oracle(&nl, beta, PI / 2.0).unwrap();
    assert!((ours - oracle).abs() < 1e-8 * oracle, "{ours} vs {oracle}");
}

#[test]
fn curvature_integral_matches_independent_scheme() {
    let nl = Nonlinearity::cubic();
    let pi = integrator(nl.clone());
    // G″(v) from a central difference of G′ = v/f(G(v)), both from bisection
    let g1 = |v: f64| v / nl.f(g_oracle(&nl, v).unwrap());
    let g2 = |v: f64| {
        let h = 1e-5;
        (g1(v + h) - g1(v - h)) / (2.0 * h)
    };
    let oracle = tanh_sinh(|t| g2(0.5 * t.cos()) * t.cos(), 0.0, PI, 1e-10).unwrap();
    let ours = pi.curvature_integral(0.5, PI).unwrap();
    assert!(ours > 0.0);
    assert!((ours - oracle).abs() < 1e-7 * oracle.abs(), "{ours} vs {oracle}");
}

#[test]
fn full_period_doubles_half() {
    let pi = integrator(Nonlinearity::cubic());
    for beta in [0.2, 0.6, 0.7] {
        let half = pi.theta_integral(beta, PI).unwrap();
        let full = pi.theta_integral(beta, 2.0 * PI).unwrap();
        assert!((full - 2.0 * half).abs() < 1e-10 * full);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_in_amplitude(s in 0.0f64..0.99, phi in 0.0f64..8.0) {
        let pi = integrator(Nonlinearity::cubic());
        let b = s * pi.kernel().beta0();
        let (p, m) = (pi.theta_integral(b, phi).unwrap(), pi.theta_integral(-b, phi).unwrap());
        prop_assert!((p - m).abs() <= 1e-13 * p.max(1.0));
    }

    #[test]
    fn additive(s in 0.0f64..0.99, p1 in 0.0f64..4.0, p2 in 0.0f64..4.0) {
        let pi = integrator(Nonlinearity::sine());
        let b = s * pi.kernel().beta0();
        let whole = pi.theta_integral(b, p1 + p2).unwrap();
        let first = pi.theta_integral(b, p1).unwrap();
        let orbit = pi.orbit(b).unwrap();
        let second = tanh_sinh(|t| orbit.kernel_point(t).g1, p1, p1 + p2, 1e-12).unwrap();
        prop_assert!((whole - first - second).abs() <= 1e-9 * whole.max(1.0));
        prop_assert!(whole >= first);
    }

    #[test]
    fn solve_theta_round_trip(s in -0.99f64..0.99, y in 0.0f64..6.0) {
        let pi = integrator(Nonlinearity::cubic());
        let b = s * pi.kernel().beta0();
        let t = pi.solve_theta(y, b).unwrap();
        prop_assert!((pi.theta_integral(b, t).unwrap() - y).abs() <= 1e-10 * y.max(1.0));
    }
}
