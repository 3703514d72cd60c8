//! Fiber averaging of a fast-slow natural system and the objects built from
//! the averages: averaged Hamiltonian, effective potential, magnetic form
//! and the oscillation-induced potential of a fast forcing.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bundle_geometry::{Chart, PhaseStateReduced};
use crate::diff;
use crate::quadrature::{FourierSeries, QuadratureRule};
use crate::{dot, BaseFn, BaseVecFn, Error, FiberFn, FiberVecFn, Result};

/// Tolerance on the fiber means of `a₁`, `h₁`, `U₁` and of fast forcings.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// Jacobian-valued base function, `J[i][j] = ∂ᵢ f_j`.
pub type BaseJacFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// Natural Hamiltonian
/// `H = ½p·p + γ a·p + ½h γ² + U` with `a = a₀ + εa₁`, `h = h₀ + εh₁`,
/// `U = U₀ + εU₁` and zero-mean `a₁`, `h₁`, `U₁`.
#[derive(Clone)]
pub struct FastSlowSystem {
    pub dim_base: usize,
    pub a0: BaseVecFn,
    pub a1: FiberVecFn,
    pub h0: BaseFn,
    pub h1: FiberFn,
    pub u0: BaseFn,
    pub u1: FiberFn,
    pub epsilon: f64,
    pub mu: f64,
    /// Base points at which invariants are sampled.
    pub probe_points: Vec<Vec<f64>>,
}

impl std::fmt::Debug for FastSlowSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastSlowSystem")
            .field("dim_base", &self.dim_base)
            .field("epsilon", &self.epsilon)
            .field("mu", &self.mu)
            .finish_non_exhaustive()
    }
}

impl FastSlowSystem {
    /// Free system `a = 0`, `h = 1`, `U = 0`; refine with the `with_*` setters.
    pub fn new(dim_base: usize, epsilon: f64, mu: f64) -> Result<Self> {
        if dim_base == 0 {
            return Err(Error::Domain("base dimension must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "need ε > 0 and finite μ, got ε = {epsilon}, μ = {mu}"
            )));
        }
        Ok(Self {
            dim_base,
            a0: Arc::new(move |_| vec![0.0; dim_base]),
            a1: Arc::new(move |_, _| vec![0.0; dim_base]),
            h0: Arc::new(|_| 1.0),
            h1: Arc::new(|_, _| 0.0),
            u0: Arc::new(|_| 0.0),
            u1: Arc::new(|_, _| 0.0),
            epsilon,
            mu,
            probe_points: default_probe_points(dim_base),
        })
    }

    pub fn with_a(mut self, a0: BaseVecFn, a1: FiberVecFn) -> Self {
        self.a0 = a0;
        self.a1 = a1;
        self
    }

    pub fn with_h(mut self, h0: BaseFn, h1: FiberFn) -> Self {
        self.h0 = h0;
        self.h1 = h1;
        self
    }

    pub fn with_u(mut self, u0: BaseFn, u1: FiberFn) -> Self {
        self.u0 = u0;
        self.u1 = u1;
        self
    }

    pub fn with_probe_points(mut self, points: Vec<Vec<f64>>) -> Self {
        self.probe_points = points;
        self
    }

    pub fn a(&self, q: &[f64], phi: f64) -> Vec<f64> {
        let a1 = (self.a1)(q, phi);
        (self.a0)(q)
            .iter()
            .zip(a1)
            .map(|(x, y)| x + self.epsilon * y)
            .collect()
    }

    pub fn h(&self, q: &[f64], phi: f64) -> f64 {
        (self.h0)(q) + self.epsilon * (self.h1)(q, phi)
    }

    pub fn u(&self, q: &[f64], phi: f64) -> f64 {
        (self.u0)(q) + self.epsilon * (self.u1)(q, phi)
    }

    /// Full Hamiltonian at `(q, φ; p, γ)`.
    pub fn hamiltonian(&self, q: &[f64], phi: f64, p: &[f64], gamma: f64) -> f64 {
        0.5 * dot(p, p)
            + gamma * dot(&self.a(q, phi), p)
            + 0.5 * self.h(q, phi) * gamma * gamma
            + self.u(q, phi)
    }

    /// Fiber means of `a₁`, `h₁`, `U₁` at `q`, largest component first.
    pub fn oscillating_means(&self, q: &[f64], rule: &QuadratureRule) -> MeanResiduals {
        let a1 = rule
            .mean_vec(self.dim_base, |phi| (self.a1)(q, phi))
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        MeanResiduals {
            a1,
            h1: rule.mean(|phi| (self.h1)(q, phi)).abs(),
            u1: rule.mean(|phi| (self.u1)(q, phi)).abs(),
        }
    }

    /// Zero-mean and positivity checks at every probe point.
    pub fn validate(&self, rule: &QuadratureRule) -> Result<MeanResiduals> {
        let mut worst = MeanResiduals::default();
        for q in &self.probe_points {
            let m = self.oscillating_means(q, rule);
            for (name, v) in [("a1", m.a1), ("h1", m.h1), ("U1", m.u1)] {
                if v >= ZERO_MEAN_TOL {
                    return Err(Error::NonzeroMean {
                        coefficient: name.into(),
                        point: q.clone(),
                        mean: v,
                    });
                }
            }
            worst = worst.max(&m);
            for &phi in rule.nodes() {
                let h = self.h(q, phi);
                if h <= 0.0 || !h.is_finite() {
                    return Err(Error::Domain(format!("h = {h} at q = {q:?}, φ = {phi}")));
                }
            }
        }
        Ok(worst)
    }
}

/// Measured fiber means of the oscillating coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanResiduals {
    pub a1: f64,
    pub h1: f64,
    pub u1: f64,
}

impl MeanResiduals {
    fn max(&self, o: &Self) -> Self {
        Self {
            a1: self.a1.max(o.a1),
            h1: self.h1.max(o.h1),
            u1: self.u1.max(o.u1),
        }
    }
}

/// Averaged data `(a₀, h₀, U₀, μ)` of the reduced system
/// `H̄ = ½P·P + μa₀·P + ½μ²h₀ + U₀`.
#[derive(Clone)]
pub struct AveragedSystem {
    pub dim_base: usize,
    pub a0: BaseVecFn,
    pub h0: BaseFn,
    pub u0: BaseFn,
    pub mu: f64,
    pub grad_a0: Option<BaseJacFn>,
    pub grad_h0: Option<BaseVecFn>,
    pub grad_u0: Option<BaseVecFn>,
    /// Fiber means of the discarded oscillating parts, when averaged.
    pub residuals: Option<MeanResiduals>,
}

impl std::fmt::Debug for AveragedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AveragedSystem")
            .field("dim_base", &self.dim_base)
            .field("mu", &self.mu)
            .field("residuals", &self.residuals)
            .finish_non_exhaustive()
    }
}

impl AveragedSystem {
    pub fn new(dim_base: usize, a0: BaseVecFn, h0: BaseFn, u0: BaseFn, mu: f64) -> Self {
        Self {
            dim_base,
            a0,
            h0,
            u0,
            mu,
            grad_a0: None,
            grad_h0: None,
            grad_u0: None,
            residuals: None,
        }
    }

    pub fn with_grad_a0(mut self, g: BaseJacFn) -> Self {
        self.grad_a0 = Some(g);
        self
    }

    pub fn with_grad_h0(mut self, g: BaseVecFn) -> Self {
        self.grad_h0 = Some(g);
        self
    }

    pub fn with_grad_u0(mut self, g: BaseVecFn) -> Self {
        self.grad_u0 = Some(g);
        self
    }

    pub fn a0(&self, q: &[f64]) -> Vec<f64> {
        (self.a0)(q)
    }

    /// `J[i][j] = ∂ᵢ a₀ⱼ`.
    pub fn jacobian_a0(&self, q: &[f64]) -> Vec<Vec<f64>> {
        match &self.grad_a0 {
            Some(g) => g(q),
            None => diff::jacobian_rows(|x| (self.a0)(x), q),
        }
    }

    pub fn grad_h0(&self, q: &[f64]) -> Vec<f64> {
        match &self.grad_h0 {
            Some(g) => g(q),
            None => diff::gradient(|x| (self.h0)(x), q),
        }
    }

    pub fn grad_u0(&self, q: &[f64]) -> Vec<f64> {
        match &self.grad_u0 {
            Some(g) => g(q),
            None => diff::gradient(|x| (self.u0)(x), q),
        }
    }

    /// `½P·P + μa₀(Q)·P + ½μ²h₀(Q) + U₀(Q)`.
    pub fn averaged_hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        let mu = self.mu;
        0.5 * dot(p, p) + mu * dot(&self.a0(q), p) + 0.5 * mu * mu * (self.h0)(q) + (self.u0)(q)
    }

    /// `Ū_μ(Q) = ½μ²(h₀ − a₀·a₀) + U₀`.
    pub fn effective_potential(&self, q: &[f64]) -> f64 {
        let a0 = self.a0(q);
        0.5 * self.mu * self.mu * ((self.h0)(q) - dot(&a0, &a0)) + (self.u0)(q)
    }

    /// `∇Ū_μ(Q)`.
    pub fn grad_effective_potential(&self, q: &[f64]) -> Vec<f64> {
        let a0 = self.a0(q);
        let jac = self.jacobian_a0(q);
        let gh = self.grad_h0(q);
        let gu = self.grad_u0(q);
        let mu2 = self.mu * self.mu;
        (0..self.dim_base)
            .map(|i| 0.5 * mu2 * (gh[i] - 2.0 * dot(&jac[i], &a0)) + gu[i])
            .collect()
    }

    /// `h₀(Q) − a₀(Q)·a₀(Q)`; its sign is recorded, never asserted.
    pub fn schur_complement(&self, q: &[f64]) -> f64 {
        let a0 = self.a0(q);
        (self.h0)(q) - dot(&a0, &a0)
    }

    /// `B_ij = μ(∂ᵢa₀ⱼ − ∂ⱼa₀ᵢ)`.
    pub fn magnetic_form(&self, q: &[f64]) -> DMatrix<f64> {
        let l = self.dim_base;
        let jac = self.jacobian_a0(q);
        DMatrix::from_fn(l, l, |i, j| self.mu * (jac[i][j] - jac[j][i]))
    }

    /// Convert a reduced state between the canonical and magnetic charts.
    pub fn to_chart(&self, s: &PhaseStateReduced, target: Chart) -> PhaseStateReduced {
        s.to_chart(target, self.mu, &self.a0(&s.q))
    }
}

/// Average every coefficient over the fiber. `a₀`, `h₀`, `U₀` are carried
/// over; the measured means of `a₁`, `h₁`, `U₁` are stored as residuals.
pub fn average_coefficients(sys: &FastSlowSystem, rule: &QuadratureRule) -> Result<AveragedSystem> {
    let residuals = sys.validate(rule)?;
    let mut avg = AveragedSystem::new(
        sys.dim_base,
        sys.a0.clone(),
        sys.h0.clone(),
        sys.u0.clone(),
        sys.mu,
    );
    avg.residuals = Some(residuals);
    for q in &sys.probe_points {
        let s = avg.schur_complement(q);
        if s <= 0.0 {
            log::info!("h₀ − a₀·a₀ = {s:e} ≤ 0 at Q = {q:?}");
        }
    }
    Ok(avg)
}

/// Leading-order fiber problem `d²x̃/dτ² = −∇Ũ(x̄, τ)` of a fast forcing.
#[derive(Clone)]
pub struct FiberOscillationProblem {
    pub dim_base: usize,
    /// Oscillatory part `Ũ(x, τ)`, zero-mean in τ.
    pub potential_tilde: FiberFn,
    /// Optional analytic `∇ₓŨ(x, τ)`.
    pub grad_tilde: Option<FiberVecFn>,
    pub omega: f64,
    pub epsilon: f64,
}

impl std::fmt::Debug for FiberOscillationProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiberOscillationProblem")
            .field("dim_base", &self.dim_base)
            .field("omega", &self.omega)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl FiberOscillationProblem {
    pub fn new(dim_base: usize, potential_tilde: FiberFn, omega: f64, epsilon: f64) -> Self {
        Self {
            dim_base,
            potential_tilde,
            grad_tilde: None,
            omega,
            epsilon,
        }
    }

    pub fn with_gradient(mut self, g: FiberVecFn) -> Self {
        self.grad_tilde = Some(g);
        self
    }

    /// `μ = εω`.
    pub fn mu(&self) -> f64 {
        self.epsilon * self.omega
    }

    fn forcing(&self, x: &[f64], tau: f64) -> Vec<f64> {
        match &self.grad_tilde {
            Some(g) => g(x, tau).into_iter().map(|v| -v).collect(),
            None => diff::gradient(|y| (self.potential_tilde)(y, tau), x)
                .into_iter()
                .map(|v| -v)
                .collect(),
        }
    }

    /// Zero-mean periodic velocity `ṽ` and displacement `x̃`, one series per
    /// base component.
    pub fn solve(
        &self,
        x: &[f64],
        rule: &QuadratureRule,
    ) -> Result<(Vec<FourierSeries>, Vec<FourierSeries>)> {
        let samples: Vec<Vec<f64>> = rule.nodes().iter().map(|&t| self.forcing(x, t)).collect();
        let mut v = Vec::with_capacity(self.dim_base);
        let mut xt = Vec::with_capacity(self.dim_base);
        for i in 0..self.dim_base {
            let column: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            let f = FourierSeries::from_samples(&column, rule);
            if f.constant.abs() >= ZERO_MEAN_TOL {
                return Err(Error::NonzeroMean {
                    coefficient: format!("∂Ũ/∂x{i}"),
                    point: x.to_vec(),
                    mean: f.constant,
                });
            }
            let vi = f.antiderivative();
            xt.push(vi.antiderivative());
            v.push(vi);
        }
        Ok((v, xt))
    }

    /// `(1/2π)∫ ṽ·ṽ dτ` at `x`.
    pub fn mean_square_velocity(&self, x: &[f64], rule: &QuadratureRule) -> Result<f64> {
        let (v, _) = self.solve(x, rule)?;
        Ok(v.iter().map(FourierSeries::mean_square).sum())
    }
}

/// `U_slow(x̄) + (ε²ω²/4π)∫₀^{2π} ṽ·ṽ dτ`.
pub fn oscillation_induced_potential(
    prob: &FiberOscillationProblem,
    u_slow: impl Fn(&[f64]) -> f64,
    x: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    let mu = prob.mu();
    Ok(u_slow(x) + 0.5 * mu * mu * prob.mean_square_velocity(x, rule)?)
}

/// Deterministic, well-spread sample points in `[-1, 1]^ℓ`.
pub(crate) fn default_probe_points(dim: usize) -> Vec<Vec<f64>> {
    (0..8)
        .map(|k| {
            (0..dim)
                .map(|i| (1.7 * (k * dim + i) as f64 + 0.3).sin())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn nothing_to_average() {
        let sys = FastSlowSystem::new(2, 0.1, 1.5)
            .unwrap()
            .with_u(Arc::new(|q| q[0] * q[1]), Arc::new(|_, _| 0.0));
        let avg = average_coefficients(&sys, &rule()).unwrap();
        let q = [0.3, -0.7];
        assert_eq!((avg.u0)(&q), (sys.u0)(&q));
        assert_eq!((avg.h0)(&q), 1.0);
        assert_eq!(avg.residuals.unwrap(), MeanResiduals::default());
    }

    #[test]
    fn cosine_potential_has_zero_mean() {
        let sys = FastSlowSystem::new(1, 0.1, 1.0).unwrap().with_u(
            Arc::new(|q| q[0] * q[0]),
            Arc::new(|q, phi: f64| q[0] * q[0] * phi.cos()),
        );
        let avg = average_coefficients(&sys, &rule()).unwrap();
        assert_eq!((avg.u0)(&[2.0]), 4.0);
        assert!(avg.residuals.unwrap().u1 < 1e-12);
    }

    #[test]
    fn third_harmonic_in_h() {
        let sys = FastSlowSystem::new(1, 0.1, 1.0)
            .unwrap()
            .with_h(Arc::new(|_| 2.0), Arc::new(|_, phi: f64| (3.0 * phi).sin()));
        let avg = average_coefficients(&sys, &QuadratureRule::trapezoid(8)).unwrap();
        assert_eq!((avg.h0)(&[0.0]), 2.0);
        assert!(avg.residuals.unwrap().h1 < 1e-15);
    }

    #[test]
    fn nonzero_mean_names_the_coefficient() {
        let sys = FastSlowSystem::new(1, 0.1, 1.0)
            .unwrap()
            .with_h(Arc::new(|_| 2.0), Arc::new(|_, phi: f64| 0.5 + phi.sin()));
        match average_coefficients(&sys, &rule()) {
            Err(Error::NonzeroMean {
                coefficient, mean, ..
            }) => {
                assert_eq!(coefficient, "h1");
                assert!((mean - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hamiltonian_values() {
        let avg = AveragedSystem::new(
            2,
            Arc::new(|_| vec![0.0, 0.0]),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            2.0,
        );
        assert_eq!(avg.averaged_hamiltonian(&[0.0, 0.0], &[1.0, 0.0]), 2.5);
        assert_eq!(avg.effective_potential(&[0.0, 0.0]), 2.0);
    }

    #[test]
    fn zero_momentum_drops_corrections() {
        let avg = AveragedSystem::new(
            1,
            Arc::new(|q| vec![q[0].sin()]),
            Arc::new(|q| 2.0 + q[0].cos()),
            Arc::new(|q| q[0] * q[0]),
            0.0,
        );
        let (q, p) = ([0.4], [1.3]);
        assert_eq!(avg.averaged_hamiltonian(&q, &p), 0.5 * 1.3 * 1.3 + 0.16);
        assert_eq!(avg.effective_potential(&q), 0.4 * 0.4);
    }

    #[test]
    fn symmetric_gauge_gives_unit_field() {
        let avg = AveragedSystem::new(
            2,
            Arc::new(|q| vec![-q[1] / 2.0, q[0] / 2.0]),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            1.0,
        );
        let b = avg.magnetic_form(&[0.3, -1.2]);
        assert!((b[(0, 1)] - 1.0).abs() < 1e-9);
        assert!((b[(1, 0)] + 1.0).abs() < 1e-9);
        assert_eq!(b[(0, 0)], 0.0);
    }

    #[test]
    fn one_dimensional_base_has_no_magnetic_term() {
        let avg = AveragedSystem::new(
            1,
            Arc::new(|q| vec![q[0].powi(3)]),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            3.0,
        );
        assert_eq!(avg.magnetic_form(&[0.7])[(0, 0)], 0.0);
    }

    #[test]
    fn gradient_of_effective_potential() {
        let avg = AveragedSystem::new(
            2,
            Arc::new(|q| vec![q[1].sin(), q[0] * q[1]]),
            Arc::new(|q| 3.0 + q[0].cos()),
            Arc::new(|q| q[0] * q[0] - q[1]),
            1.3,
        );
        let q = [0.2, 0.9];
        let fd = diff::gradient(|x| avg.effective_potential(x), &q);
        for (a, b) in avg.grad_effective_potential(&q).iter().zip(&fd) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn single_harmonic_fiber_problem() {
        // Ũ = f(x) cos τ with f = x³: ṽ = f′ sin τ… up to sign, mean ṽ² = ½f′².
        let prob = FiberOscillationProblem::new(
            1,
            Arc::new(|x, t: f64| x[0].powi(3) * t.cos()),
            50.0,
            0.02,
        );
        let x = [0.8];
        let fp = 3.0 * 0.64;
        let got = oscillation_induced_potential(&prob, |_| 0.25, &x, &rule()).unwrap();
        let want = 0.25 + prob.mu().powi(2) / 4.0 * fp * fp;
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn fiber_problem_rejects_secular_forcing() {
        let prob = FiberOscillationProblem::new(1, Arc::new(|x, _| x[0]), 1.0, 0.1);
        assert!(matches!(
            prob.solve(&[0.0], &rule()),
            Err(Error::NonzeroMean { .. })
        ));
        let quiet = FiberOscillationProblem::new(1, Arc::new(|_, _| 0.0), 1.0, 0.1);
        assert_eq!(
            oscillation_induced_potential(&quiet, |x| x[0], &[0.5], &rule()).unwrap(),
            0.5
        );
    }
}
