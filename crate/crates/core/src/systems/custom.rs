//! Planar natural system whose average carries a uniform magnetic term:
//!
//! ```text
//! a = b(−q₂, q₁)/2 + 0.1(cos φ, q₁ sin φ),   h = 1 + 0.1|q|² + 0.2 cos φ,
//! U = ½|q|² + 0.3 q₁ cos φ.
//! ```

use std::sync::Arc;

use crate::averaging::{AveragedSystem, FastSlowSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomParams {
    pub b: f64,
    pub epsilon: f64,
    pub mu: f64,
}

impl Default for CustomParams {
    fn default() -> Self {
        Self {
            b: 0.4,
            epsilon: 1e-2,
            mu: 1.0,
        }
    }
}

pub fn custom_systems(p: CustomParams) -> Result<(FastSlowSystem, AveragedSystem)> {
    if !p.b.is_finite() || !p.mu.is_finite() {
        return Err(Error::Domain(format!(
            "b and mu must be finite, got b = {}, mu = {}",
            p.b, p.mu
        )));
    }
    let b = p.b;
    let full = FastSlowSystem::new(2, p.epsilon, p.mu)?
        .with_a(
            Arc::new(move |q| vec![-0.5 * b * q[1], 0.5 * b * q[0]]),
            Arc::new(|q, phi: f64| vec![0.1 * phi.cos(), 0.1 * q[0] * phi.sin()]),
        )
        .with_h(
            Arc::new(|q| 1.0 + 0.1 * (q[0] * q[0] + q[1] * q[1])),
            Arc::new(|_, phi: f64| 0.2 * phi.cos()),
        )
        .with_u(
            Arc::new(|q| 0.5 * (q[0] * q[0] + q[1] * q[1])),
            Arc::new(|q, phi: f64| 0.3 * q[0] * phi.cos()),
        );
    let avg = AveragedSystem::new(2, full.a0.clone(), full.h0.clone(), full.u0.clone(), p.mu)
        .with_grad_a0(Arc::new(move |_| {
            vec![vec![0.0, 0.5 * b], vec![-0.5 * b, 0.0]]
        }))
        .with_grad_h0(Arc::new(|q| vec![0.2 * q[0], 0.2 * q[1]]))
        .with_grad_u0(Arc::new(|q| q.to_vec()));
    Ok((full, avg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::average_coefficients;
    use crate::quadrature::QuadratureRule;

    #[test]
    fn oscillating_parts_have_zero_mean() {
        let (full, _) = custom_systems(CustomParams::default()).unwrap();
        let r = full.validate(&QuadratureRule::default()).unwrap();
        assert!(r.a1 < 1e-14 && r.h1 < 1e-14 && r.u1 < 1e-14);
    }

    #[test]
    fn uniform_field_strength() {
        let (_, avg) = custom_systems(CustomParams {
            b: 0.4,
            mu: 2.0,
            ..Default::default()
        })
        .unwrap();
        let bm = avg.magnetic_form(&[0.3, -0.2]);
        assert!((bm[(0, 1)].abs() - 0.8).abs() < 1e-12);
        assert!((bm[(0, 1)] + bm[(1, 0)]).abs() < 1e-15);
    }

    #[test]
    fn analytic_and_averaged_coefficients_agree() {
        let (full, avg) = custom_systems(CustomParams::default()).unwrap();
        let num = average_coefficients(&full, &QuadratureRule::default()).unwrap();
        let q = [0.4, -0.1];
        assert!((num.effective_potential(&q) - avg.effective_potential(&q)).abs() < 1e-14);
        for (x, y) in num
            .grad_effective_potential(&q)
            .iter()
            .zip(avg.grad_effective_potential(&q))
        {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
