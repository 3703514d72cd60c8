//! Worked examples: the vibrating pendulum, the spinning disk on a surface,
//! a particle in a rapidly oscillating potential, a generic natural system
//! with a magnetic averaged term, and the registry the CLI resolves names
//! against.

mod custom;
mod particle;
mod pendulum;
mod surface;

use std::sync::Arc;

pub use custom::{custom_systems, CustomParams};
pub use particle::{
    oscillating_particle_averaged, particle_averaged_hamiltonian, particle_full_system,
    particle_means, two_harmonic_potential, zero_mean_antiderivative, FiberMatFn, FourierMode,
    OscillatingPotential, ParticleReference, TwoHarmonic,
};
pub use pendulum::{pendulum_fiber_problem, pendulum_systems, PendulumParams};
pub use surface::{
    curvature_identity_defect, disk_connection, gaussian_curvature, spinning_disk_rhs,
    DiskCanonicalFlow, DiskMagnetic, DiskParams, DiskTangentFlow, FormField, SqrtPartials,
    SurfaceMetric,
};

use crate::bundle_geometry::PhaseStateFull;
use crate::integrators::{Dynamics, FullDynamics};
use crate::wrap_angle;

/// `H(q, p, φ)`.
pub type SuspendedHamiltonian = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;
/// `(∂H/∂q, ∂H/∂p, ∂H/∂φ)` at `(q, p, φ)`.
pub type SuspendedGradient =
    Arc<dyn Fn(&[f64], &[f64], f64) -> (Vec<f64>, Vec<f64>, f64) + Send + Sync>;

/// A Hamiltonian `H(q, p, φ)` periodically forced at the fixed fast rate
/// `φ̇ = μ` in fast time, made autonomous by adjoining the action `I`
/// conjugate to φ:
///
/// ```text
/// q̇ = ε∂H/∂p,  ṗ = −ε∂H/∂q,  φ̇ = μ,  İ = −ε∂H/∂φ.
/// ```
///
/// `εH + μI` is conserved; the logged energy is `H + μI/ε`. The fiber
/// momentum is the parameter μ, so the γ slot of stored states holds μ.
#[derive(Clone)]
pub struct SuspendedSystem {
    pub dim_base: usize,
    pub epsilon: f64,
    pub mu: f64,
    pub hamiltonian: SuspendedHamiltonian,
    pub gradient: SuspendedGradient,
}

impl std::fmt::Debug for SuspendedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuspendedSystem")
            .field("dim_base", &self.dim_base)
            .field("epsilon", &self.epsilon)
            .field("mu", &self.mu)
            .finish_non_exhaustive()
    }
}

impl Dynamics for SuspendedSystem {
    fn dim(&self) -> usize {
        2 * self.dim_base + 2
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let l = self.dim_base;
        let (q, p, phi) = (&x[..l], &x[l..2 * l], x[2 * l]);
        let (hq, hp, hphi) = (self.gradient)(q, p, phi);
        let eps = self.epsilon;
        for i in 0..l {
            dx[i] = eps * hp[i];
            dx[l + i] = -eps * hq[i];
        }
        dx[2 * l] = self.mu;
        dx[2 * l + 1] = -eps * hphi;
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let l = self.dim_base;
        (self.hamiltonian)(&x[..l], &x[l..2 * l], x[2 * l]) + self.mu * x[2 * l + 1] / self.epsilon
    }

    fn momentum(&self, _x: &[f64]) -> f64 {
        self.mu
    }

    fn record(&self, x: &[f64], dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let l = self.dim_base;
        let mut s = x.to_vec();
        s[2 * l] = wrap_angle(s[2 * l]);
        s[2 * l + 1] = self.mu;
        let mut r = dx.to_vec();
        r[2 * l + 1] = 0.0;
        (s, r)
    }

    fn fast_rate(&self, _x: &[f64]) -> Option<f64> {
        Some(self.mu)
    }
}

impl FullDynamics for SuspendedSystem {
    fn dim_base(&self) -> usize {
        self.dim_base
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    /// The action starts at zero; `s.gamma` is ignored.
    fn pack(&self, s: &PhaseStateFull) -> Vec<f64> {
        let mut x = s.q.clone();
        x.extend(&s.p);
        x.push(s.phi);
        x.push(0.0);
        x
    }
}

/// A registered example and its parameter schema.
#[derive(Debug, Clone, Copy)]
pub struct ExampleInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// `(key, default, meaning)`.
    pub parameters: &'static [(&'static str, &'static str, &'static str)],
}

pub const REGISTRY: &[ExampleInfo] = &[
    ExampleInfo {
        name: "pendulum",
        summary: "pendulum with a vertically vibrating suspension point",
        parameters: &[
            ("l", "1", "length"),
            ("g", "1", "gravity"),
            ("a", "0.5", "vibration amplitude scale (amplitude is ε·a)"),
            ("mu", "3", "μ = εω"),
            ("theta0", "3.1915926535897933", "initial angle (π + 0.05)"),
            ("omega0", "0", "initial angular velocity"),
        ],
    },
    ExampleInfo {
        name: "disk",
        summary: "spinning disk rolling on a sphere; gyroscopic force from curvature",
        parameters: &[
            ("radius", "1", "sphere radius"),
            ("m", "1", "mass"),
            ("i_a", "0.5", "axial moment of inertia"),
            ("i_d", "0.25", "diametral moment of inertia"),
            ("mu", "0.7", "axial angular momentum"),
            ("q1", "1.2", "initial colatitude"),
            ("q2", "0.3", "initial longitude"),
            ("v1", "0.2", "initial colatitude rate"),
            ("v2", "0.4", "initial longitude rate"),
            ("time", "10", "integration time"),
        ],
    },
    ExampleInfo {
        name: "particle",
        summary: "particle in a rapidly oscillating two-harmonic potential",
        parameters: &[
            ("mu", "1", "μ = εω"),
            ("x1", "0.4", "initial position, first coordinate"),
            ("x2", "-0.3", "initial position, second coordinate"),
            ("p1", "0.2", "initial momentum, first coordinate"),
            ("p2", "0.1", "initial momentum, second coordinate"),
        ],
    },
    ExampleInfo {
        name: "euler",
        summary: "Euler equation on a centrally extended Lie algebra dual",
        parameters: &[
            (
                "algebra",
                "so3",
                "so3, heisenberg, oscillator, abelian<n> or a file path",
            ),
            ("inertia", "1, 2, 3", "diagonal of the inertia operator"),
            ("shift", "0, 0, 0", "shift covector L"),
            ("xi0", "0.1, 1, 0.1", "initial covector"),
            ("time", "100", "integration time"),
        ],
    },
    ExampleInfo {
        name: "custom",
        summary: "natural fast-slow system on the plane with a magnetic averaged term",
        parameters: &[
            (
                "b",
                "0.4",
                "strength of the averaged connection (a₀ = b(−q₂, q₁)/2)",
            ),
            ("mu", "1", "fiber momentum γ(0) = μ"),
            ("x1", "0.5", "initial position, first coordinate"),
            ("x2", "0", "initial position, second coordinate"),
            ("p1", "0", "initial momentum, first coordinate"),
            ("p2", "0.3", "initial momentum, second coordinate"),
        ],
    },
];

pub fn lookup(name: &str) -> Option<&'static ExampleInfo> {
    REGISTRY.iter().find(|e| e.name == name)
}
