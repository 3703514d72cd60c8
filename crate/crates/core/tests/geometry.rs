//! Bundle-metric and averaging properties on random data.

use std::sync::Arc;

use fastslow_core::averaging::{
    oscillation_induced_potential, AveragedSystem, FiberOscillationProblem,
};
use fastslow_core::bundle_geometry::{Chart, PhaseStateReduced, TrivialBundleMetric};
use fastslow_core::quadrature::{FourierSeries, QuadratureRule};
use fastslow_core::systems::{custom_systems, pendulum_systems, CustomParams, PendulumParams};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coupled_metric(c: [f64; 3], h: f64) -> TrivialBundleMetric {
    TrivialBundleMetric::new(
        3,
        Arc::new(move |q, phi: f64| vec![c[0] + 0.1 * q[0] * phi.cos(), c[1], c[2] * q[1]]),
        Arc::new(move |q, phi: f64| h + 0.1 * (phi + q[2]).sin()),
    )
    .unwrap()
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 3)
}

fn vec2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 2)
}

proptest! {
    #[test]
    fn metric_is_the_gram_contraction(
        c in prop::array::uniform3(-1.0..1.0_f64), h in 0.5..3.0_f64,
        q in vec3(), u in vec3(), phi in 0.0..6.3_f64, gamma in -2.0..2.0_f64,
    ) {
        let m = coupled_metric(c, h);
        let mut v = u.clone();
        v.push(gamma);
        let v = DVector::from_vec(v);
        let want = (v.transpose() * m.gram(&q, phi) * &v)[(0, 0)];
        let got = m.metric_eval(&q, phi, &u, gamma).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn momentum_map_is_bilinear_and_matches_connection(
        c in prop::array::uniform3(-1.0..1.0_f64), h in 0.5..3.0_f64,
        q in vec3(), u in vec3(), w in vec3(), xi in -2.0..2.0_f64, zeta in -2.0..2.0_f64, s in -3.0..3.0_f64,
    ) {
        let m = TrivialBundleMetric::invariant(3, move |q| vec![c[0], c[1] * q[0], c[2]], move |q| h + 0.1 * q[1].sin())
            .unwrap();
        let j = |u: &[f64], xi: f64| m.momentum_map(&q, 0.0, u, xi);
        let uw: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + s * b).collect();
        let lin = j(&u, xi) + s * j(&w, zeta);
        prop_assert!((j(&uw, xi + s * zeta) - lin).abs() < 1e-12 * (1.0 + lin.abs()));
        let a = m.mechanical_connection(&q);
        let via_connection = m.fiber_inertia(&q, 0.0) * (a.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() + xi);
        prop_assert!((via_connection - j(&u, xi)).abs() < 1e-12 * (1.0 + via_connection.abs()));
    }

    #[test]
    fn chart_round_trip_is_identity(q in vec2(), p in vec2(), b in -2.0..2.0_f64, mu in -3.0..3.0_f64) {
        let (_, avg) = custom_systems(CustomParams { b, mu, ..Default::default() }).unwrap();
        let s = PhaseStateReduced::canonical(q, p);
        let back = avg.to_chart(&avg.to_chart(&s, Chart::Magnetic), Chart::Canonical);
        for (x, y) in back.p.iter().zip(&s.p) {
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + y.abs()));
        }
        prop_assert_eq!(back.q, s.q);
    }

    #[test]
    fn hamiltonian_chart_identity(q in vec2(), p in vec2(), b in -2.0..2.0_f64, mu in -3.0..3.0_f64) {
        let (_, avg) = custom_systems(CustomParams { b, mu, ..Default::default() }).unwrap();
        let p1 = avg.to_chart(&PhaseStateReduced::canonical(q.clone(), p.clone()), Chart::Magnetic).p;
        let shifted = 0.5 * p1.iter().map(|x| x * x).sum::<f64>() + avg.effective_potential(&q);
        let h = avg.averaged_hamiltonian(&q, &p);
        prop_assert!((shifted - h).abs() < 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn magnetic_form_is_antisymmetric(q in vec3(), k in prop::array::uniform3(-1.0..1.0_f64)) {
        let avg = AveragedSystem::new(
            3,
            Arc::new(move |q| vec![k[0] * q[1] * q[2], (k[1] * q[0]).sin(), k[2] * q[0] * q[1].cos()]),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            1.7,
        );
        let b = avg.magnetic_form(&q);
        prop_assert!((&b + b.transpose()).amax() < 1e-12);
    }

    #[test]
    fn pendulum_effective_potential_closed_form(
        l in 0.3..3.0_f64, g in 0.1..3.0_f64, a in 0.1..2.0_f64, mu in -4.0..4.0_f64, theta in 0.0..std::f64::consts::TAU,
    ) {
        let p = PendulumParams { l, g, a, mu, epsilon: 1e-2 };
        let (_, avg) = pendulum_systems(&p).unwrap();
        let want = 0.25 * mu * mu * a * a * theta.sin().powi(2) - g * l * theta.cos();
        prop_assert!((avg.effective_potential(&[l * theta]) - want).abs() < 1e-10);
    }

    #[test]
    fn single_harmonic_fiber_oracle(k in 0.2..2.0_f64, s in -1.0..1.0_f64, x in -1.5..1.5_f64, eps in 1e-3..0.1_f64, omega in 1.0..50.0_f64) {
        // Ũ = f(x) cos τ with f = s·sin(kx): the added term is (εω)²f′²/4.
        let prob = FiberOscillationProblem::new(1, Arc::new(move |x, t: f64| s * (k * x[0]).sin() * t.cos()), omega, eps);
        let got = oscillation_induced_potential(&prob, |_: &[f64]| 0.0, &[x], &QuadratureRule::default()).unwrap();
        let fp = s * k * (k * x).cos();
        prop_assert!((got - (eps * omega).powi(2) * fp * fp / 4.0).abs() < 1e-8);
    }

    #[test]
    fn trapezoid_kills_nonzero_harmonics(n in 2usize..80, k in 1usize..200, shift in 0.0..6.3_f64) {
        prop_assume!(k % n != 0);
        let rule = QuadratureRule::trapezoid(n);
        let (c, s) = (rule.mean(|t| (k as f64 * (t + shift)).cos()), rule.mean(|t| (k as f64 * (t + shift)).sin()));
        // Rounding of the phase k(t + shift) bounds the residual.
        let tol = 4.0 * f64::EPSILON * k as f64 * (std::f64::consts::TAU + shift);
        prop_assert!(c.abs() < tol && s.abs() < tol, "{c} {s} {tol}");
    }

    #[test]
    fn antiderivative_differentiates_back(coef in prop::collection::vec(-1.0..1.0_f64, 6), t in 0.0..6.3_f64) {
        let f = |x: f64| (0..3).map(|k| coef[2 * k] * ((k + 1) as f64 * x).cos() + coef[2 * k + 1] * ((k + 1) as f64 * x).sin()).sum::<f64>();
        let rule = QuadratureRule::trapezoid(16);
        let v = FourierSeries::project(f, &rule).antiderivative();
        let h = 1e-4;
        let dv = (v.eval(t + h) - v.eval(t - h)) / (2.0 * h);
        prop_assert!((dv - f(t)).abs() < 1e-7);
        prop_assert!(rule.mean(|x| v.eval(x)).abs() < 1e-14);
    }
}

fn smallest_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.min()
}

/// The cometric `[[I, a], [aᵀ, h]]` of the registered fast-slow system is
/// positive definite at random probes.
#[test]
fn registered_cometric_is_positive_definite() {
    let (full, _) = custom_systems(CustomParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let q: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let a = full.a(&q, phi);
        let mut g = DMatrix::identity(3, 3);
        for i in 0..2 {
            g[(i, 2)] = a[i];
            g[(2, i)] = a[i];
        }
        g[(2, 2)] = full.h(&q, phi);
        assert!(smallest_eigenvalue(g) > 0.0);
    }
}

#[test]
fn bundle_metric_invariants_are_checked() {
    let m = coupled_metric([0.3, -0.2, 0.1], 1.5);
    let points: Vec<Vec<f64>> = (0..10)
        .map(|k| vec![0.1 * k as f64, -0.05 * k as f64, 0.2])
        .collect();
    assert!(m.check_invariants(&points, 32).is_ok());
    // h·|a|² ≥ 1 breaks definiteness of the velocity metric.
    let bad = TrivialBundleMetric::invariant(1, |_| vec![2.0], |_| 1.0).unwrap();
    assert!(bad.check_invariants(&[vec![0.0]], 4).is_err());
}
