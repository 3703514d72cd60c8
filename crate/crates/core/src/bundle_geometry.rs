//! Metric data on the trivial circle bundle `ℝ^ℓ × S¹`: fiber inertia,
//! momentum map and mechanical connection.
//!
//! The velocity-side quadratic form is
//!
//! ```text
//! ((u, ξ), (u, ξ)) = u·u + 2ξ h(q,φ) a(q,φ)·u + h(q,φ) ξ²
//! ```
//!
//! with Gram matrix `[[Id, h a], [h aᵀ, h]]`. The `h` in the cross term makes
//! the momentum map `J = h(a·u + ξ)` and the connection `A = a` consistent
//! with the pairing `⟨J, ζ⟩ = ((u, ξ), (0, ζ))`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{check_finite, dot, wrap_angle, Error, FiberFn, FiberVecFn, Result};

/// φ-samples used when probing a metric for φ-invariance.
pub const INVARIANCE_PROBES: usize = 32;
/// Largest φ-variation tolerated before an "averaged" metric is flagged.
pub const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct TrivialBundleMetric {
    dim_base: usize,
    a: FiberVecFn,
    h: FiberFn,
}

impl std::fmt::Debug for TrivialBundleMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrivialBundleMetric")
            .field("dim_base", &self.dim_base)
            .finish_non_exhaustive()
    }
}

impl TrivialBundleMetric {
    pub fn new(dim_base: usize, a: FiberVecFn, h: FiberFn) -> Result<Self> {
        if dim_base == 0 {
            return Err(Error::Domain("base dimension must be positive".into()));
        }
        Ok(Self { dim_base, a, h })
    }

    /// Metric whose coefficients do not depend on φ.
    pub fn invariant(
        dim_base: usize,
        a: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(
            dim_base,
            std::sync::Arc::new(move |q, _| a(q)),
            std::sync::Arc::new(move |q, _| h(q)),
        )
    }

    /// Product metric `u·u + ξ²`.
    pub fn product(dim_base: usize) -> Result<Self> {
        Self::invariant(dim_base, move |_| vec![0.0; dim_base], |_| 1.0)
    }

    pub fn dim_base(&self) -> usize {
        self.dim_base
    }

    pub fn a(&self, q: &[f64], phi: f64) -> Vec<f64> {
        (self.a)(q, phi)
    }

    pub fn h(&self, q: &[f64], phi: f64) -> f64 {
        (self.h)(q, phi)
    }

    /// The `(ℓ+1)×(ℓ+1)` Gram matrix in the basis `(∂_q, ∂_φ)`.
    pub fn gram(&self, q: &[f64], phi: f64) -> DMatrix<f64> {
        let l = self.dim_base;
        let a = self.a(q, phi);
        let h = self.h(q, phi);
        let mut g = DMatrix::identity(l + 1, l + 1);
        for i in 0..l {
            g[(i, l)] = h * a[i];
            g[(l, i)] = h * a[i];
        }
        g[(l, l)] = h;
        g
    }

    /// Check positivity, periodicity and positive-definiteness at the given
    /// base points, each probed at `n_phi` fiber angles.
    pub fn check_invariants(&self, points: &[Vec<f64>], n_phi: usize) -> Result<()> {
        for q in points {
            self.check_dim(q)?;
            for (name, d) in [
                ("h", (self.h(q, 0.0) - self.h(q, TAU)).abs()),
                (
                    "a",
                    self.a(q, 0.0)
                        .iter()
                        .zip(self.a(q, TAU))
                        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())),
                ),
            ] {
                if d >= 1e-12 {
                    return Err(Error::Domain(format!(
                        "{name} is not 2π-periodic at q = {q:?} (jump {d:e})"
                    )));
                }
            }
            for k in 0..n_phi.max(1) {
                let phi = TAU * k as f64 / n_phi.max(1) as f64;
                let h = self.h(q, phi);
                if h <= 0.0 || !h.is_finite() {
                    return Err(Error::Domain(format!("h = {h} at q = {q:?}, φ = {phi}")));
                }
                let lam = smallest_eigenvalue(self.gram(q, phi));
                if lam <= 0.0 {
                    return Err(Error::Domain(format!(
                        "metric not positive definite at q = {q:?}, φ = {phi} (λ_min = {lam:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `u·u + 2γ h a·u + h γ²`.
    pub fn metric_eval(&self, q: &[f64], phi: f64, u: &[f64], gamma: f64) -> Result<f64> {
        self.check_dim(q)?;
        self.check_dim(u)?;
        check_finite("q", q)?;
        check_finite("u", u)?;
        check_finite("(φ, γ)", &[phi, gamma])?;
        let a = self.a(q, phi);
        let h = self.h(q, phi);
        Ok(dot(u, u) + 2.0 * gamma * h * dot(&a, u) + h * gamma * gamma)
    }

    /// Fiber inertia `𝕀(q) = h(q, φ)`.
    pub fn fiber_inertia(&self, q: &[f64], phi: f64) -> f64 {
        self.h(q, phi)
    }

    /// Momentum map `J = h(q)(a(q)·u + ξ)` of an averaged metric.
    pub fn momentum_map(&self, q: &[f64], phi: f64, u: &[f64], xi: f64) -> f64 {
        self.warn_if_not_invariant(q);
        self.h(q, phi) * (dot(&self.a(q, phi), u) + xi)
    }

    /// Base part `A(q)` of the mechanical connection `A(q) + dφ`.
    pub fn mechanical_connection(&self, q: &[f64]) -> Vec<f64> {
        self.warn_if_not_invariant(q);
        self.a(q, 0.0)
    }

    /// Largest deviation of `a` or `h` from their values at φ = 0 over
    /// [`INVARIANCE_PROBES`] equispaced angles.
    pub fn phi_variation(&self, q: &[f64]) -> f64 {
        let a0 = self.a(q, 0.0);
        let h0 = self.h(q, 0.0);
        (1..INVARIANCE_PROBES)
            .map(|k| {
                let phi = TAU * k as f64 / INVARIANCE_PROBES as f64;
                let da = self
                    .a(q, phi)
                    .iter()
                    .zip(&a0)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
                da.max((self.h(q, phi) - h0).abs())
            })
            .fold(0.0, f64::max)
    }

    fn warn_if_not_invariant(&self, q: &[f64]) {
        let dev = self.phi_variation(q);
        if dev > INVARIANCE_TOL {
            log::warn!("metric coefficients vary with φ by {dev:e} at q = {q:?}; expected an averaged metric");
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim_base {
            return Err(Error::Domain(format!(
                "expected a vector of length {}, got {}",
                self.dim_base,
                v.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn smallest_eigenvalue(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.min()
}

/// Point `(q, φ; p, γ)` of the full phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStateFull {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Always in `[0, 2π)`.
    pub phi: f64,
    pub gamma: f64,
}

impl PhaseStateFull {
    pub fn new(q: Vec<f64>, p: Vec<f64>, phi: f64, gamma: f64) -> Self {
        Self {
            q,
            p,
            phi: wrap_angle(phi),
            gamma,
        }
    }

    pub fn dim_base(&self) -> usize {
        self.q.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// `(Q, P)` with `H = ½P·P + μa₀·P + ½μ²h₀ + U₀`.
    Canonical,
    /// `(Q, P₁)` with `P₁ = P + μa₀(Q)`.
    Magnetic,
}

/// Point of the reduced phase space. `p` holds `P` or `P₁` according to
/// `chart`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStateReduced {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub chart: Chart,
}

impl PhaseStateReduced {
    pub fn canonical(q: Vec<f64>, p: Vec<f64>) -> Self {
        Self {
            q,
            p,
            chart: Chart::Canonical,
        }
    }

    pub fn magnetic(q: Vec<f64>, p1: Vec<f64>) -> Self {
        Self {
            q,
            p: p1,
            chart: Chart::Magnetic,
        }
    }

    /// Re-express in `target`, given `μ` and `a₀(Q)`.
    pub fn to_chart(&self, target: Chart, mu: f64, a0: &[f64]) -> Self {
        let sign = match (self.chart, target) {
            (Chart::Canonical, Chart::Magnetic) => 1.0,
            (Chart::Magnetic, Chart::Canonical) => -1.0,
            _ => return self.clone(),
        };
        Self {
            q: self.q.clone(),
            p: self
                .p
                .iter()
                .zip(a0)
                .map(|(p, a)| p + sign * mu * a)
                .collect(),
            chart: target,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn constant(a: Vec<f64>, h: f64) -> TrivialBundleMetric {
        let l = a.len();
        TrivialBundleMetric::invariant(l, move |_| a.clone(), move |_| h).unwrap()
    }

    #[test]
    fn product_metric_value() {
        let m = TrivialBundleMetric::product(2).unwrap();
        assert_eq!(
            m.metric_eval(&[0.3, 0.1], 1.0, &[1.0, 0.0], 2.0).unwrap(),
            5.0
        );
    }

    #[test]
    fn constant_cross_term() {
        let c = 0.37;
        let m = constant(vec![c, 0.0], 1.0);
        let v = m.metric_eval(&[0.0, 0.0], 0.0, &[1.0, 0.0], 1.0).unwrap();
        assert!((v - (2.0 + 2.0 * c)).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let m = TrivialBundleMetric::product(1).unwrap();
        assert!(m.metric_eval(&[f64::NAN], 0.0, &[0.0], 0.0).is_err());
        assert!(m.metric_eval(&[0.0], 0.0, &[0.0], f64::INFINITY).is_err());
        assert!(m.metric_eval(&[0.0, 1.0], 0.0, &[0.0], 0.0).is_err());
    }

    #[test]
    fn momentum_map_matches_pairing() {
        let m = constant(vec![1.0, 0.0], 2.0);
        let (q, u, xi) = ([0.0, 0.0], [3.0, 0.0], 1.0);
        let j = m.momentum_map(&q, 0.0, &u, xi);
        assert_eq!(j, 8.0);
        let g = m.gram(&q, 0.0);
        let v = nalgebra::DVector::from_vec(vec![u[0], u[1], xi]);
        let e = nalgebra::DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!((v.dot(&(&g * e)) - j).abs() < 1e-14);
    }

    #[test]
    fn fiber_inertia_reads_h() {
        let m = TrivialBundleMetric::new(
            1,
            Arc::new(|_, _| vec![0.0]),
            Arc::new(|_, phi: f64| 2.0 + phi.sin()),
        )
        .unwrap();
        assert!((m.fiber_inertia(&[0.0], std::f64::consts::FRAC_PI_2) - 3.0).abs() < 1e-15);
        assert!(m.phi_variation(&[0.0]) > 0.9);
    }

    #[test]
    fn flat_connection_for_zero_a() {
        let m = TrivialBundleMetric::product(3).unwrap();
        assert_eq!(m.mechanical_connection(&[1.0, 2.0, 3.0]), vec![0.0; 3]);
    }

    #[test]
    fn invariants_detect_indefinite_metric() {
        let good = constant(vec![0.5, 0.0], 1.0);
        assert!(good.check_invariants(&[vec![0.0, 0.0]], 8).is_ok());
        // h a·a = 4 > 1 makes the Gram matrix indefinite.
        let bad = constant(vec![2.0, 0.0], 1.0);
        assert!(bad.check_invariants(&[vec![0.0, 0.0]], 8).is_err());
        let nonpositive = constant(vec![0.0], -1.0);
        assert!(nonpositive.check_invariants(&[vec![0.0]], 8).is_err());
    }

    #[test]
    fn phase_state_wraps_angle() {
        let s = PhaseStateFull::new(vec![0.0], vec![0.0], -0.5, 1.0);
        assert!((s.phi - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn chart_round_trip() {
        let s = PhaseStateReduced::canonical(vec![0.1, 0.2], vec![0.3, -0.4]);
        let a0 = [0.7, -1.1];
        let m = s.to_chart(Chart::Magnetic, 1.5, &a0);
        assert_eq!(m.chart, Chart::Magnetic);
        let back = m.to_chart(Chart::Canonical, 1.5, &a0);
        for (x, y) in back.p.iter().zip(&s.p) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
