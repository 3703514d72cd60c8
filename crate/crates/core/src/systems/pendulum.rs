//! Pendulum of length `l` whose suspension point vibrates vertically with
//! amplitude `εa` and frequency `ω = μ/ε`.
//!
//! The base coordinate is arc length `q = lθ`. The Hamiltonian is written in
//! the velocity-coupled gauge
//!
//! ```text
//! H(q, p, φ) = ½(p − aμ sin φ sin(q/l))² − gl cos(q/l),   φ = μτ,
//! ```
//!
//! which differs from the vertical-forcing form by a total time derivative
//! in the Lagrangian. In this gauge the canonical momentum is slow, so it
//! can be compared directly with the averaged momentum.

use std::sync::Arc;

use super::SuspendedSystem;
use crate::averaging::{AveragedSystem, FiberOscillationProblem};
use crate::quadrature::QuadratureRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub l: f64,
    pub g: f64,
    pub a: f64,
    pub mu: f64,
    pub epsilon: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            l: 1.0,
            g: 1.0,
            a: 0.5,
            mu: 3.0,
            epsilon: 1e-2,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l", self.l),
            ("g", self.g),
            ("a", self.a),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "pendulum parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::Domain("pendulum parameter mu must be finite".into()));
        }
        Ok(())
    }

    /// `¼μ²a² sin²θ − gl cos θ`.
    pub fn effective_potential(&self, theta: f64) -> f64 {
        0.25 * self.mu * self.mu * self.a * self.a * theta.sin().powi(2)
            - self.g * self.l * theta.cos()
    }

    /// `d²Ū_μ/dθ²` at the upper position, `½μ²a² − gl`.
    pub fn upper_stiffness(&self) -> f64 {
        0.5 * self.mu * self.mu * self.a * self.a - self.g * self.l
    }
}

/// Fiber problem `Ũ(q, τ) = a l sin τ cos(q/l)` at unit μ.
pub fn pendulum_fiber_problem(p: &PendulumParams) -> FiberOscillationProblem {
    let (a, l) = (p.a, p.l);
    FiberOscillationProblem::new(
        1,
        Arc::new(move |q, t: f64| a * l * t.sin() * (q[0] / l).cos()),
        1.0,
        1.0,
    )
    .with_gradient(Arc::new(move |q, t: f64| {
        vec![-a * t.sin() * (q[0] / l).sin()]
    }))
}

/// Full suspended pendulum and its averaged system. The averaged `h₀` is
/// the mean square fiber velocity computed from the fiber problem.
pub fn pendulum_systems(p: &PendulumParams) -> Result<(SuspendedSystem, AveragedSystem)> {
    p.validate()?;
    let PendulumParams {
        l,
        g,
        a,
        mu,
        epsilon,
    } = *p;
    let am = a * mu;
    let full = SuspendedSystem {
        dim_base: 1,
        epsilon,
        mu,
        hamiltonian: Arc::new(move |q, pp, phi| {
            let w = pp[0] - am * phi.sin() * (q[0] / l).sin();
            0.5 * w * w - g * l * (q[0] / l).cos()
        }),
        gradient: Arc::new(move |q, pp, phi| {
            let (s, c) = (q[0] / l).sin_cos();
            let w = pp[0] - am * phi.sin() * s;
            (
                vec![-w * am * phi.sin() * c / l + g * s],
                vec![w],
                -w * am * phi.cos() * s,
            )
        }),
    };

    let fiber = pendulum_fiber_problem(p);
    let rule = QuadratureRule::default();
    let avg = AveragedSystem::new(
        1,
        Arc::new(|_| vec![0.0]),
        Arc::new(move |q| {
            fiber
                .mean_square_velocity(q, &rule)
                .expect("the pendulum forcing has zero mean")
        }),
        Arc::new(move |q| -g * l * (q[0] / l).cos()),
        mu,
    )
    .with_grad_a0(Arc::new(|_| vec![vec![0.0]]))
    .with_grad_h0(Arc::new(move |q| {
        vec![a * a / (2.0 * l) * (2.0 * q[0] / l).sin()]
    }))
    .with_grad_u0(Arc::new(move |q| vec![g * (q[0] / l).sin()]));
    Ok((full, avg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_equilibrium_value() {
        let p = PendulumParams::default();
        let (_, avg) = pendulum_systems(&p).unwrap();
        assert!((avg.effective_potential(&[0.0]) + p.g * p.l).abs() < 1e-15);
    }

    #[test]
    fn threshold_for_unit_pendulum() {
        let p = PendulumParams {
            mu: 2.0 * 2f64.sqrt(),
            ..Default::default()
        };
        assert!(p.upper_stiffness().abs() < 1e-14);
    }

    #[test]
    fn closed_form_for_long_pendulum() {
        let p = PendulumParams {
            l: 2.5,
            g: 9.81,
            a: 0.3,
            mu: 4.0,
            epsilon: 1e-2,
        };
        let (_, avg) = pendulum_systems(&p).unwrap();
        for k in 0..50 {
            let theta = 0.13 * k as f64;
            let got = avg.effective_potential(&[p.l * theta]);
            assert!(
                (got - p.effective_potential(theta)).abs() < 1e-10,
                "θ = {theta}"
            );
        }
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let p = PendulumParams::default();
        let (full, avg) = pendulum_systems(&p).unwrap();
        let q = [2.3];
        let fd = crate::diff::gradient(|x| (avg.h0)(x), &q);
        assert!((avg.grad_h0(&q)[0] - fd[0]).abs() < 1e-8);
        let (pp, phi) = ([0.4], 1.1);
        let (hq, hp, hphi) = (full.gradient)(&q, &pp, phi);
        let h = |q: f64, p: f64, f: f64| (full.hamiltonian)(&[q], &[p], f);
        let d = 1e-6;
        assert!(
            (hq[0] - (h(q[0] + d, pp[0], phi) - h(q[0] - d, pp[0], phi)) / (2.0 * d)).abs() < 1e-8
        );
        assert!(
            (hp[0] - (h(q[0], pp[0] + d, phi) - h(q[0], pp[0] - d, phi)) / (2.0 * d)).abs() < 1e-8
        );
        assert!(
            (hphi - (h(q[0], pp[0], phi + d) - h(q[0], pp[0], phi - d)) / (2.0 * d)).abs() < 1e-8
        );
    }
}
