//! Averaging and symplectic reduction for one-frequency fast-oscillating
//! natural Hamiltonian systems.
//!
//! The crate is organised around the pipeline
//!
//! ```text
//! fast-slow system ──average over the fiber──▶ averaged system
//!        │                                          │
//!   integrate_full                     integrate_reduced_{canonical,magnetic}
//!        └──────────────▶ closeness_report ◀────────┘
//! ```
//!
//! plus the worked examples in [`systems`] and the finite-dimensional
//! central-extension Euler equation in [`lie_poisson`].
//!
//! Sweeps over ε and other batch work go through [`parallel::par_map`], which
//! uses rayon when the `parallel` feature is enabled (the default) and a plain
//! sequential loop otherwise.

pub mod averaging;
pub mod bundle_geometry;
pub mod diff;
mod error;
pub mod integrators;
pub mod lie_poisson;
pub mod parallel;
pub mod quadrature;
pub mod systems;

pub use error::{Error, Result};

/// Scalar field on the base, `q ↦ f(q)`.
pub type BaseFn = std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Vector field on the base, `q ↦ v(q) ∈ ℝ^ℓ`.
pub type BaseVecFn = std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Scalar function of base point and fiber angle, `(q, φ) ↦ f(q, φ)`.
pub type FiberFn = std::sync::Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Vector function of base point and fiber angle, `(q, φ) ↦ v(q, φ) ∈ ℝ^ℓ`.
pub type FiberVecFn = std::sync::Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = phi.rem_euclid(tau);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= tau {
        0.0
    } else {
        r
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Domain(format!(
            "{what}[{i}] is not finite ({})",
            xs[i]
        ))),
        None => Ok(()),
    }
}
