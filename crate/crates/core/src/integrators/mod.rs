//! Time integration of the full fast system and of the reduced system in
//! both charts, plus the ε-closeness harness.
//!
//! Clocks: the full system is integrated in fast time τ with the
//! ε-prefixed right-hand sides
//!
//! ```text
//! q̇ = ε ∂H/∂p,  ṗ = −ε ∂H/∂q,  φ̇ = ∂H/∂γ,  γ̇ = −∂H/∂φ,
//! ```
//!
//! and `IntegratorConfig::dt` is a τ-step. Reduced systems are integrated
//! directly in slow time `t = ετ` with a t-step. Every [`Trajectory`]
//! reports slow time, and horizons are always given in slow time.

mod closeness;
mod stepper;
mod trajectory;

use nalgebra::DMatrix;

pub use closeness::{closeness_report, epsilon_sweep, ClosenessReport, RatioTable};
pub use stepper::Stepper;
pub use trajectory::{StateLayout, Trajectory};

use crate::averaging::{AveragedSystem, FastSlowSystem};
use crate::bundle_geometry::{Chart, PhaseStateFull, PhaseStateReduced};
use crate::{diff, dot, wrap_angle, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ImplicitMidpoint,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Nominal step; the actual step divides the horizon evenly.
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Store every `output_stride`-th step (the final step is always kept).
    pub output_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::ImplicitMidpoint,
            dt: 1e-2,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            output_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64) -> Self {
        Self {
            method: Method::Rk4,
            dt,
            ..Self::default()
        }
    }

    pub fn midpoint(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-6) {
            return Err(Error::Config(format!(
                "newton_tol must lie in (0, 1e-6], got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 || self.output_stride == 0 {
            return Err(Error::Config(
                "newton_max_iter and output_stride must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// An autonomous vector field `ẋ = f(x)` with logged invariants.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, x: &[f64], dx: &mut [f64]);
    fn energy(&self, x: &[f64]) -> f64;
    fn momentum(&self, x: &[f64]) -> f64;
    /// Stored representation of a state and its rate.
    fn record(&self, x: &[f64], dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (x.to_vec(), dx.to_vec())
    }
    /// `φ̇` for systems with a fast angle.
    fn fast_rate(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// A full fast-slow system integrable by [`integrate_full`].
pub trait FullDynamics: Dynamics {
    fn dim_base(&self) -> usize;
    fn epsilon(&self) -> f64;
    fn mu(&self) -> f64;
    /// Internal state vector for a phase point.
    fn pack(&self, s: &PhaseStateFull) -> Vec<f64>;
}

/// Full system in fast time; state `(q, p, φ, γ)`, momentum `J = γ`.
impl Dynamics for FastSlowSystem {
    fn dim(&self) -> usize {
        2 * self.dim_base + 2
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let l = self.dim_base;
        let (q, p, phi, gamma) = (&x[..l], &x[l..2 * l], x[2 * l], x[2 * l + 1]);
        let eps = self.epsilon;
        let a = self.a(q, phi);
        let h = self.h(q, phi);
        for i in 0..l {
            dx[i] = eps * (p[i] + gamma * a[i]);
        }
        let slow = |y: &[f64]| {
            gamma * dot(&self.a(y, phi), p) + 0.5 * self.h(y, phi) * gamma * gamma + self.u(y, phi)
        };
        let grad = diff::gradient(slow, q);
        for i in 0..l {
            dx[l + i] = -eps * grad[i];
        }
        dx[2 * l] = dot(&a, p) + h * gamma;
        // Only the ε-parts depend on φ.
        let fast = |ph: f64| {
            gamma * dot(&(self.a1)(q, ph), p)
                + 0.5 * (self.h1)(q, ph) * gamma * gamma
                + (self.u1)(q, ph)
        };
        let hs = 1e-6;
        dx[2 * l + 1] = -eps * (fast(phi + hs) - fast(phi - hs)) / (2.0 * hs);
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let l = self.dim_base;
        self.hamiltonian(&x[..l], x[2 * l], &x[l..2 * l], x[2 * l + 1])
    }

    fn momentum(&self, x: &[f64]) -> f64 {
        x[2 * self.dim_base + 1]
    }

    fn record(&self, x: &[f64], dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut s = x.to_vec();
        s[2 * self.dim_base] = wrap_angle(s[2 * self.dim_base]);
        (s, dx.to_vec())
    }

    fn fast_rate(&self, x: &[f64]) -> Option<f64> {
        let l = self.dim_base;
        Some(
            dot(&self.a(&x[..l], x[2 * l]), &x[l..2 * l])
                + self.h(&x[..l], x[2 * l]) * x[2 * l + 1],
        )
    }
}

impl FullDynamics for FastSlowSystem {
    fn dim_base(&self) -> usize {
        self.dim_base
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn pack(&self, s: &PhaseStateFull) -> Vec<f64> {
        let mut x = s.q.clone();
        x.extend(&s.p);
        x.push(s.phi);
        x.push(s.gamma);
        x
    }
}

/// Run `n` steps of size `dt` in the integration clock and store states at
/// reported times `t0 + clock_to_t · (k dt)`.
pub fn run<D: Dynamics + ?Sized>(
    d: &D,
    x0: Vec<f64>,
    n: usize,
    dt: f64,
    clock_to_t: f64,
    cfg: &IntegratorConfig,
    layout: StateLayout,
) -> Result<Trajectory> {
    if x0.len() != d.dim() {
        return Err(Error::Domain(format!(
            "initial state has length {}, system expects {}",
            x0.len(),
            d.dim()
        )));
    }
    crate::check_finite("initial state", &x0)?;
    let mut traj = Trajectory::new(layout);
    let mut x = x0;
    let mut dx = vec![0.0; x.len()];
    let mut min_rate = f64::INFINITY;
    let mut store = |traj: &mut Trajectory, x: &[f64], dx: &mut [f64], k: usize| {
        d.rhs(x, dx);
        let rate: Vec<f64> = dx.iter().map(|v| v / clock_to_t).collect();
        let (s, r) = d.record(x, &rate);
        if let Some(w) = d.fast_rate(x) {
            min_rate = min_rate.min(w.abs());
        }
        traj.push(clock_to_t * dt * k as f64, s, r, d.energy(x), d.momentum(x));
    };
    store(&mut traj, &x, &mut dx, 0);
    let mut stepper = Stepper::new(*cfg);
    for k in 1..=n {
        stepper.step(d, &mut x, dt, k)?;
        if k % cfg.output_stride == 0 || k == n {
            store(&mut traj, &x, &mut dx, k);
        }
    }
    if min_rate.is_finite() {
        log::debug!("min |φ̇| along trajectory: {min_rate:e}");
        traj.min_fast_rate = Some(min_rate);
    }
    Ok(traj)
}

/// Steps needed to cover `span` with steps no longer than `dt`.
fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Integrate the full system up to slow time `horizon ≤ 10/ε`.
pub fn integrate_full<S: FullDynamics>(
    sys: &S,
    s0: &PhaseStateFull,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let eps = sys.epsilon();
    if horizon.is_nan() || horizon <= 0.0 || horizon > 10.0 / eps * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "horizon {horizon} outside (0, 10/ε = {}]",
            10.0 / eps
        )));
    }
    if s0.q.len() != sys.dim_base() || s0.p.len() != sys.dim_base() {
        return Err(Error::Domain(
            "initial state has the wrong base dimension".into(),
        ));
    }
    let span = horizon / eps;
    let n = step_count(span, cfg.dt);
    run(
        sys,
        sys.pack(s0),
        n,
        span / n as f64,
        eps,
        cfg,
        StateLayout::Full {
            dim_base: sys.dim_base(),
        },
    )
}

/// Integrate any vector field in its own clock up to `horizon`.
pub fn integrate<D: Dynamics + ?Sized>(
    d: &D,
    x0: Vec<f64>,
    horizon: f64,
    cfg: &IntegratorConfig,
    layout: StateLayout,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let n = step_count(horizon, cfg.dt);
    run(d, x0, n, horizon / n as f64, 1.0, cfg, layout)
}

/// Reduced flow in the canonical chart, slow time:
/// `Q' = P + μa₀`, `P' = −∂_Q(μa₀·P + ½μ²h₀ + U₀)`.
#[derive(Debug, Clone, Copy)]
pub struct CanonicalFlow<'a>(pub &'a AveragedSystem);

impl Dynamics for CanonicalFlow<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim_base
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let avg = self.0;
        let l = avg.dim_base;
        let (q, p) = (&x[..l], &x[l..]);
        let mu = avg.mu;
        let a0 = avg.a0(q);
        let jac = avg.jacobian_a0(q);
        let gh = avg.grad_h0(q);
        let gu = avg.grad_u0(q);
        for i in 0..l {
            dx[i] = p[i] + mu * a0[i];
            dx[l + i] = -(mu * dot(&jac[i], p) + 0.5 * mu * mu * gh[i] + gu[i]);
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let l = self.0.dim_base;
        self.0.averaged_hamiltonian(&x[..l], &x[l..])
    }

    fn momentum(&self, _x: &[f64]) -> f64 {
        self.0.mu
    }
}

/// Reduced Hamiltonian system `H(Q, P₁)` with magnetic term
/// `ω = dQ∧dP₁ − ½B_ij dQⁱ∧dQʲ`:
/// `Q' = ∂H/∂P₁`, `P₁' = −∂H/∂Q − B Q'`.
pub trait MagneticSystem: Sync {
    fn dim_base(&self) -> usize;
    fn mu(&self) -> f64;
    fn hamiltonian(&self, q: &[f64], p1: &[f64]) -> f64;
    fn velocity(&self, q: &[f64], p1: &[f64]) -> Vec<f64>;
    /// `−∂H/∂Q`.
    fn force(&self, q: &[f64], p1: &[f64]) -> Vec<f64>;
    fn magnetic(&self, q: &[f64]) -> DMatrix<f64>;
}

/// `H = ½P₁·P₁ + Ū_μ(Q)` with `B` from [`AveragedSystem::magnetic_form`].
impl MagneticSystem for AveragedSystem {
    fn dim_base(&self) -> usize {
        self.dim_base
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn hamiltonian(&self, q: &[f64], p1: &[f64]) -> f64 {
        0.5 * dot(p1, p1) + self.effective_potential(q)
    }

    fn velocity(&self, _q: &[f64], p1: &[f64]) -> Vec<f64> {
        p1.to_vec()
    }

    fn force(&self, q: &[f64], _p1: &[f64]) -> Vec<f64> {
        self.grad_effective_potential(q)
            .into_iter()
            .map(|g| -g)
            .collect()
    }

    fn magnetic(&self, q: &[f64]) -> DMatrix<f64> {
        self.magnetic_form(q)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MagneticFlow<'a, M: ?Sized>(pub &'a M);

impl<M: MagneticSystem + ?Sized> Dynamics for MagneticFlow<'_, M> {
    fn dim(&self) -> usize {
        2 * self.0.dim_base()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let l = self.0.dim_base();
        let (q, p1) = (&x[..l], &x[l..]);
        let v = self.0.velocity(q, p1);
        let f = self.0.force(q, p1);
        let b = self.0.magnetic(q);
        for i in 0..l {
            dx[i] = v[i];
            dx[l + i] = f[i] - (0..l).map(|j| b[(i, j)] * v[j]).sum::<f64>();
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let l = self.0.dim_base();
        self.0.hamiltonian(&x[..l], &x[l..])
    }

    fn momentum(&self, _x: &[f64]) -> f64 {
        self.0.mu()
    }
}

fn reduced_x0(s0: &PhaseStateReduced, want: Chart, l: usize) -> Result<Vec<f64>> {
    if s0.chart != want {
        return Err(Error::Domain(format!(
            "expected a {want:?}-chart state, got {:?}",
            s0.chart
        )));
    }
    if s0.q.len() != l || s0.p.len() != l {
        return Err(Error::Domain(
            "initial state has the wrong base dimension".into(),
        ));
    }
    let mut x = s0.q.clone();
    x.extend(&s0.p);
    Ok(x)
}

/// Integrate the averaged system in the canonical chart (slow time).
pub fn integrate_reduced_canonical(
    avg: &AveragedSystem,
    s0: &PhaseStateReduced,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let x0 = reduced_x0(s0, Chart::Canonical, avg.dim_base)?;
    integrate(
        &CanonicalFlow(avg),
        x0,
        horizon,
        cfg,
        StateLayout::Reduced {
            dim_base: avg.dim_base,
            chart: Chart::Canonical,
        },
    )
}

/// Integrate a reduced system in the magnetic chart (slow time).
pub fn integrate_reduced_magnetic<M: MagneticSystem + ?Sized>(
    sys: &M,
    s0: &PhaseStateReduced,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let l = sys.dim_base();
    let x0 = reduced_x0(s0, Chart::Magnetic, l)?;
    integrate(
        &MagneticFlow(sys),
        x0,
        horizon,
        cfg,
        StateLayout::Reduced {
            dim_base: l,
            chart: Chart::Magnetic,
        },
    )
}
