use bifurcata::nonlinearity::{check_conditions, GKernel, Nonlinearity};
use bifurcata::oracle::g_oracle;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cubic() -> GKernel {
    GKernel::new(Nonlinearity::cubic()).unwrap()
}

fn sine() -> GKernel {
    GKernel::new(Nonlinearity::sine()).unwrap()
}

#[test]
fn pointwise_values() {
    let c = Nonlinearity::cubic();
    let s = Nonlinearity::sine();
    assert_eq!(c.eval_f(0.0, 1), 1.0);
    assert_eq!(c.eval_f(1.0, 0), 0.0);
    assert!((s.eval_f(0.5, 0) - 1.0).abs() < 1e-15);
    assert!((c.eval_energy(1.0) - 0.5).abs() < 1e-15);
    assert!((c.eval_energy(-1.0) - 0.5).abs() < 1e-15);
    assert_eq!(s.eval_energy(0.0), 0.0);
    assert!((c.beta0() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((c.u0() - 3f64.sqrt().recip()).abs() < 1e-14);
}

#[test]
fn energy_matches_quadrature_of_f() {
    // F(u) = 2∫₀ᵘ f, checked with composite Simpson on the polynomial path
    let nl = Nonlinearity::polynomial(&[0.0, 2.0, 0.0, -3.0, 0.0, 1.0]).unwrap();
    for &u in &[0.2, 0.7, 1.0] {
        let n = 2000;
        let h = u / n as f64;
        let mut s = nl.f(0.0) + nl.f(u);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * nl.f(i as f64 * h);
        }
        let integral = 2.0 * s * h / 3.0;
        assert!((nl.eval_energy(u) - integral).abs() < 1e-12);
    }
}

#[test]
fn kernel_reference_values() {
    let gk = cubic();
    assert_eq!(gk.eval_g(0.0).unwrap(), 0.0);
    let u = (1.0 - (1.0f64 - 0.5).sqrt()).sqrt();
    assert!((gk.eval_g(0.5).unwrap() - u).abs() < 1e-14);
    let (g1, _) = gk.eval_g_derivs(0.5).unwrap();
    assert!((g1 - 0.5 / (u - u * u * u)).abs() < 1e-12);
    let (g1, g2) = gk.eval_g_derivs(0.0).unwrap();
    assert!((g1 - 1.0).abs() < 1e-15 && g2.abs() < 1e-15);
    let (g1, _) = sine().eval_g_derivs(0.0).unwrap();
    assert!((g1 - PI.sqrt().recip()).abs() < 1e-15);
}

#[test]
fn h_vanishes_at_inflection_amplitude() {
    let gk = cubic();
    let (h, _) = gk.eval_h_big_h(gk.v0()).unwrap();
    assert!(h.abs() < 1e-10);
    let (h, big_h) = gk.eval_h_big_h(0.0).unwrap();
    assert_eq!((h, big_h), (1.0, 0.0));
    let (h, _) = gk.eval_h_big_h(1e-7).unwrap();
    assert!((h - 1.0).abs() < 1e-8);
    // H(0) = 0 and sgn(v)·H′(v) > 0, so H is positive on both sides
    for v in [0.4, -0.4] {
        let (_, big_h) = gk.eval_h_big_h(v).unwrap();
        let (_, hp) = gk.eval_h_big_h(v + 1e-6).unwrap();
        let (_, hm) = gk.eval_h_big_h(v - 1e-6).unwrap();
        assert!(big_h > 0.0);
        assert!(v.signum() * (hp - hm) > 0.0);
    }
}

#[test]
fn domain_is_enforced() {
    let gk = cubic();
    let b0 = gk.beta0();
    assert!(gk.eval_g(b0).is_err());
    assert!(gk.eval_g_derivs(-b0).is_err());
    assert!(gk.eval_h_big_h(2.0).is_err());
}

#[test]
fn builtins_satisfy_every_condition() {
    for nl in [Nonlinearity::cubic(), Nonlinearity::sine()] {
        let r = check_conditions(&nl, 2000);
        assert!(r.all(), "{r:?}");
    }
}

#[test]
fn rejects_malformed_polynomials() {
    // even term
    assert!(Nonlinearity::polynomial(&[0.0, 1.0, 1.0, -2.0]).is_err());
    // f′(0) < 0
    assert!(Nonlinearity::polynomial(&[0.0, -1.0, 0.0, 1.0]).is_err());
    // f(1) ≠ 0
    assert!(Nonlinearity::polynomial(&[0.0, 1.0, 0.0, -0.5]).is_err());
}

#[test]
fn kernel_agrees_with_bisection_oracle() {
    for nl in [Nonlinearity::cubic(), Nonlinearity::sine()] {
        let gk = GKernel::new(nl.clone()).unwrap();
        let b0 = nl.beta0();
        for i in 1..40 {
            let v = b0 * i as f64 / 40.0;
            let u = gk.eval_g(v).unwrap();
            let o = g_oracle(&nl, v).unwrap();
            assert!((u - o).abs() < 1e-12, "v={v} {u} vs {o}");
        }
    }
}

#[test]
fn derivative_blow_up_rate_is_inverse_square_root() {
    let gk = cubic();
    let b0 = gk.beta0();
    let ratios: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&s| {
            let v = s * b0;
            gk.eval_g_derivs(v).unwrap().0 * (b0 - v).sqrt()
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(lo > 0.0 && hi / lo < 1.5, "{ratios:?}");
}

proptest! {
    #[test]
    fn round_trip(s in -0.999f64..0.999) {
        for gk in [cubic(), sine()] {
            let v = s * gk.beta0();
            let u = gk.eval_g(v).unwrap();
            let f = gk.nl().eval_energy(u);
            prop_assert!((f - v * v).abs() < 1e-12 * (v * v).max(1.0));
            prop_assert!(u.abs() < 1.0 && u.signum() == v.signum() || v == 0.0);
        }
    }

    #[test]
    fn parity(s in 0.0f64..0.999) {
        for gk in [cubic(), sine()] {
            let v = s * gk.beta0();
            prop_assert!((gk.eval_g(v).unwrap() + gk.eval_g(-v).unwrap()).abs() <= 1e-13);
            let (a1, a2) = gk.eval_g_derivs(v).unwrap();
            let (b1, b2) = gk.eval_g_derivs(-v).unwrap();
            prop_assert!((a1 - b1).abs() <= 1e-13 * a1.abs().max(1.0));
            prop_assert!((a2 + b2).abs() <= 1e-13 * a2.abs().max(1.0));
            prop_assert!(a1 > 0.0);
        }
    }

    #[test]
    fn monotone(s in -0.99f64..0.99, ds in 1e-6f64..0.01) {
        let gk = cubic();
        let b0 = gk.beta0();
        prop_assert!(gk.eval_g((s + ds) * b0).unwrap() > gk.eval_g(s * b0).unwrap());
    }

    #[test]
    fn h_two_ways(s in 0.01f64..0.99, neg in any::<bool>()) {
        for gk in [cubic(), sine()] {
            let v = if neg { -s } else { s } * gk.beta0();
            let (h, _) = gk.eval_h_big_h(v).unwrap();
            let u = gk.eval_g(v).unwrap();
            let direct = gk.nl().h_of_u(u);
            prop_assert!((h - direct).abs() <= 1e-10 * direct.abs().max(1.0), "{} {}", h, direct);
        }
    }
}
