//! Particle in a rapidly oscillating potential,
//!
//! ```text
//! H = ½p·p + Ū(x) + μ²(U − Ū)(x, φ),   φ = μτ = μt/ε,
//! ```
//!
//! which at μ = 1 is `½p·p + U(x, t/ε)`. With `V`, `S` the zero-mean first
//! and second τ-antiderivatives of `U − Ū`, its average is
//!
//! ```text
//! H̄ = ½P·P + Ū + (ε²μ²/2) mean(V′·V′) − ε³μ mean(S″V′)·P.
//! ```
//!
//! As a reduced bundle system this is `h₀ = ε² mean(V′·V′)`, `U₀ = Ū` and
//! `a₀ = −ε³ mean(S″V′)`, where primes are x-derivatives and `S″V′` is the
//! Hessian of S applied to the gradient of V.

use std::sync::Arc;

use super::{SuspendedGradient, SuspendedSystem};
use crate::averaging::AveragedSystem;
use crate::diff;
use crate::quadrature::{FourierSeries, QuadratureRule};
use crate::{dot, BaseFn, Error, FiberFn, FiberVecFn, Result};

/// Tolerance on the mean of an integrand before antidifferentiation.
const SECULAR_TOL: f64 = 1e-10;

/// Hessian-valued function of `(x, τ)`.
pub type FiberMatFn = Arc<dyn Fn(&[f64], f64) -> Vec<Vec<f64>> + Send + Sync>;

/// Harmonic `(k, c_k(x), s_k(x))` of `U = Σ c_k cos kτ + s_k sin kτ`.
#[derive(Clone)]
pub struct FourierMode {
    pub k: u32,
    pub c: BaseFn,
    pub s: BaseFn,
}

#[derive(Clone)]
pub struct OscillatingPotential {
    pub dim: usize,
    pub u: FiberFn,
    pub grad: Option<FiberVecFn>,
    pub hessian: Option<FiberMatFn>,
    pub fourier_modes: Option<Vec<FourierMode>>,
}

impl std::fmt::Debug for OscillatingPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OscillatingPotential")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish_non_exhaustive()
    }
}

impl OscillatingPotential {
    pub fn new(dim: usize, u: FiberFn) -> Self {
        Self {
            dim,
            u,
            grad: None,
            hessian: None,
            fourier_modes: None,
        }
    }

    pub fn with_derivatives(mut self, grad: FiberVecFn, hessian: FiberMatFn) -> Self {
        self.grad = Some(grad);
        self.hessian = Some(hessian);
        self
    }

    pub fn with_modes(mut self, modes: Vec<FourierMode>) -> Self {
        self.fourier_modes = Some(modes);
        self
    }

    /// `|U(x, 0) − U(x, 2π)|`.
    pub fn periodicity_defect(&self, x: &[f64]) -> f64 {
        ((self.u)(x, 0.0) - (self.u)(x, std::f64::consts::TAU)).abs()
    }

    pub fn grad(&self, x: &[f64], tau: f64) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x, tau),
            None => {
                let h = 1e-3 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                (0..self.dim)
                    .map(|i| diff::partial4(|y| (self.u)(y, tau), x, i, h))
                    .collect()
            }
        }
    }

    /// `H[i][j] = ∂ᵢ∂ⱼU`.
    pub fn hessian(&self, x: &[f64], tau: f64) -> Vec<Vec<f64>> {
        match &self.hessian {
            Some(h) => h(x, tau),
            None => {
                let h = 1e-3 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                (0..self.dim)
                    .map(|i| {
                        (0..self.dim)
                            .map(|j| diff::partial4(|y| self.grad(y, tau)[j], x, i, h))
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// `Ū(x)`.
    pub fn mean(&self, x: &[f64], rule: &QuadratureRule) -> f64 {
        rule.mean(|t| (self.u)(x, t))
    }
}

/// Zero-mean τ-antiderivative of `U − Ū` (order 1, `V`) or of `V`
/// (order 2, `S`). Exact per harmonic when `fourier_modes` is present,
/// spectral from the quadrature samples otherwise.
pub fn zero_mean_antiderivative(
    pot: &OscillatingPotential,
    x: &[f64],
    order: u8,
    rule: &QuadratureRule,
) -> Result<FourierSeries> {
    if !(1..=2).contains(&order) {
        return Err(Error::Domain(format!(
            "antiderivative order must be 1 or 2, got {order}"
        )));
    }
    let mut series = match &pot.fourier_modes {
        Some(modes) => {
            let kmax = modes.iter().map(|m| m.k).max().unwrap_or(0) as usize;
            let mut s = FourierSeries {
                constant: 0.0,
                harmonics: vec![(0.0, 0.0); kmax],
            };
            for m in modes {
                if m.k == 0 {
                    s.constant += (m.c)(x);
                } else {
                    let h = &mut s.harmonics[m.k as usize - 1];
                    h.0 += (m.c)(x);
                    h.1 += (m.s)(x);
                }
            }
            s
        }
        None => FourierSeries::project(|t| (pot.u)(x, t), rule),
    };
    // Subtracting Ū leaves the integrand U − Ū with zero mean.
    series.constant = 0.0;
    for _ in 0..order {
        if series.constant.abs() > SECULAR_TOL {
            return Err(Error::NonzeroMean {
                coefficient: "antiderivative integrand".into(),
                point: x.to_vec(),
                mean: series.constant,
            });
        }
        series = series.antiderivative();
    }
    Ok(series)
}

/// Fiber means entering the averaged particle Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleReference {
    pub x: Vec<f64>,
    /// `Ū(x)`.
    pub mean_u: f64,
    /// `mean(V′·V′)`.
    pub mean_vv: f64,
    /// `mean(S″V′)`.
    pub mean_sv: Vec<f64>,
}

/// Means `Ū`, `mean(V′·V′)` and `mean(S″V′)` at `x`.
pub fn particle_means(
    pot: &OscillatingPotential,
    x: &[f64],
    rule: &QuadratureRule,
) -> ParticleReference {
    let l = pot.dim;
    let nodes = rule.nodes();
    let grads: Vec<Vec<f64>> = nodes.iter().map(|&t| pot.grad(x, t)).collect();
    let hess: Vec<Vec<Vec<f64>>> = nodes.iter().map(|&t| pot.hessian(x, t)).collect();
    let zero_mean = |mut s: FourierSeries| {
        s.constant = 0.0;
        s
    };
    let dv: Vec<FourierSeries> = (0..l)
        .map(|i| {
            let col: Vec<f64> = grads.iter().map(|g| g[i]).collect();
            zero_mean(FourierSeries::from_samples(&col, rule)).antiderivative()
        })
        .collect();
    let mean_sv = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    let col: Vec<f64> = hess.iter().map(|h| h[i][j]).collect();
                    let s_ij = zero_mean(FourierSeries::from_samples(&col, rule))
                        .antiderivative()
                        .antiderivative();
                    s_ij.mean_product(&dv[j])
                })
                .sum()
        })
        .collect();
    ParticleReference {
        x: x.to_vec(),
        mean_u: pot.mean(x, rule),
        mean_vv: dv.iter().map(FourierSeries::mean_square).sum(),
        mean_sv,
    }
}

/// Averaged particle system, plus the means at the origin for reference.
pub fn oscillating_particle_averaged(
    pot: &OscillatingPotential,
    epsilon: f64,
    mu: f64,
    rule: &QuadratureRule,
) -> Result<(AveragedSystem, ParticleReference)> {
    if epsilon.is_nan() || epsilon <= 0.0 || !mu.is_finite() {
        return Err(Error::Domain(format!(
            "need ε > 0 and finite μ, got ε = {epsilon}, μ = {mu}"
        )));
    }
    let origin = vec![0.0; pot.dim];
    let defect = pot.periodicity_defect(&origin);
    if defect > 1e-12 {
        return Err(Error::Domain(format!(
            "potential is not 2π-periodic in τ (defect {defect:e})"
        )));
    }
    // Validates the antiderivative chain once; the closures below reuse it.
    zero_mean_antiderivative(pot, &origin, 2, rule)?;
    let reference = particle_means(pot, &origin, rule);
    let (e2, e3) = (epsilon * epsilon, epsilon.powi(3));
    let (p1, r1) = (pot.clone(), rule.clone());
    let (p2, r2) = (pot.clone(), rule.clone());
    let (p3, r3) = (pot.clone(), rule.clone());
    let avg = AveragedSystem::new(
        pot.dim,
        Arc::new(move |x| {
            particle_means(&p1, x, &r1)
                .mean_sv
                .into_iter()
                .map(|c| -e3 * c)
                .collect()
        }),
        Arc::new(move |x| e2 * particle_means(&p2, x, &r2).mean_vv),
        Arc::new(move |x| p3.mean(x, &r3)),
        mu,
    );
    let (p4, r4) = (pot.clone(), rule.clone());
    let avg = avg.with_grad_u0(Arc::new(move |x| r4.mean_vec(p4.dim, |t| p4.grad(x, t))));
    Ok((avg, reference))
}

/// `½P·P + Ū + ½ε²μ² mean(V′·V′) − ε³μ mean(S″V′)·P`, assembled term by term.
pub fn particle_averaged_hamiltonian(
    r: &ParticleReference,
    p: &[f64],
    epsilon: f64,
    mu: f64,
) -> f64 {
    0.5 * dot(p, p) + r.mean_u + 0.5 * epsilon * epsilon * mu * mu * r.mean_vv
        - epsilon.powi(3) * mu * dot(&r.mean_sv, p)
}

/// Full forced particle as a suspended system.
pub fn particle_full_system(
    pot: &OscillatingPotential,
    epsilon: f64,
    mu: f64,
    rule: &QuadratureRule,
) -> SuspendedSystem {
    let mu2 = mu * mu;
    let (p1, r1) = (pot.clone(), rule.clone());
    let (p2, r2) = (pot.clone(), rule.clone());
    let gradient: SuspendedGradient = Arc::new(move |x, p, phi| {
        let g = p2.grad(x, phi);
        let gbar = r2.mean_vec(p2.dim, |t| p2.grad(x, t));
        let hq = g
            .iter()
            .zip(&gbar)
            .map(|(g, m)| mu2 * g + (1.0 - mu2) * m)
            .collect();
        let e = 1e-6;
        let hphi = mu2 * ((p2.u)(x, phi + e) - (p2.u)(x, phi - e)) / (2.0 * e);
        (hq, p.to_vec(), hphi)
    });
    SuspendedSystem {
        dim_base: pot.dim,
        epsilon,
        mu,
        hamiltonian: Arc::new(move |x, p, phi| {
            let ubar = p1.mean(x, &r1);
            0.5 * dot(p, p) + ubar + mu2 * ((p1.u)(x, phi) - ubar)
        }),
        gradient,
    }
}

/// `U = f(x) cos τ + g(x) sin τ + w(x)` with closed-form derivatives.
#[derive(Clone)]
pub struct TwoHarmonic {
    pub potential: OscillatingPotential,
    /// `½(|f′|² + |g′|²)`.
    pub mean_vv: BaseFn,
    /// `½(f″g′ − g″f′)`.
    pub mean_sv: crate::BaseVecFn,
}

/// Planar two-harmonic potential with non-commuting Hessians of `f` and
/// `g`, so that `mean(S″V′)` has nonzero curl:
/// `f = x₁x₂ + ½x₁²`, `g = ½(x₁² − x₂²) + ⅓x₂³`, `w = ½k|x|²`.
pub fn two_harmonic_potential(k: f64) -> TwoHarmonic {
    let f = |x: &[f64]| x[0] * x[1] + 0.5 * x[0] * x[0];
    let g = |x: &[f64]| 0.5 * (x[0] * x[0] - x[1] * x[1]) + x[1].powi(3) / 3.0;
    let df = |x: &[f64]| [x[1] + x[0], x[0]];
    let dg = |x: &[f64]| [x[0], -x[1] + x[1] * x[1]];
    let hf = |_: &[f64]| [[1.0, 1.0], [1.0, 0.0]];
    let hg = |x: &[f64]| [[1.0, 0.0], [0.0, -1.0 + 2.0 * x[1]]];
    let u: FiberFn =
        Arc::new(move |x, t: f64| f(x) * t.cos() + g(x) * t.sin() + 0.5 * k * dot(x, x));
    let grad: FiberVecFn = Arc::new(move |x, t: f64| {
        let (a, b) = (df(x), dg(x));
        (0..2)
            .map(|i| a[i] * t.cos() + b[i] * t.sin() + k * x[i])
            .collect()
    });
    let hess: FiberMatFn = Arc::new(move |x, t: f64| {
        let (a, b) = (hf(x), hg(x));
        (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| a[i][j] * t.cos() + b[i][j] * t.sin() + if i == j { k } else { 0.0 })
                    .collect()
            })
            .collect()
    });
    let modes = vec![
        FourierMode {
            k: 0,
            c: Arc::new(move |x| 0.5 * k * dot(x, x)),
            s: Arc::new(|_| 0.0),
        },
        FourierMode {
            k: 1,
            c: Arc::new(f),
            s: Arc::new(g),
        },
    ];
    TwoHarmonic {
        potential: OscillatingPotential::new(2, u)
            .with_derivatives(grad, hess)
            .with_modes(modes),
        mean_vv: Arc::new(move |x| {
            let (a, b) = (df(x), dg(x));
            0.5 * (a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1])
        }),
        mean_sv: Arc::new(move |x| {
            let (a, b, ha, hb) = (df(x), dg(x), hf(x), hg(x));
            (0..2)
                .map(|i| {
                    0.5 * (0..2)
                        .map(|j| ha[i][j] * b[j] - hb[i][j] * a[j])
                        .sum::<f64>()
                })
                .collect()
        }),
    }
}
