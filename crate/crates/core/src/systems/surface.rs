//! Disk rolling on a surface given in orthogonal coordinates,
//! `ds² = a₁₁dq₁² + a₂₂dq₂²`. Writing `E = √a₁₁`, `G = √a₂₂` and `Eᵢ`,
//! `Gᵢ` for their partials:
//!
//! ```text
//! K = −(1/EG)[∂₁(G₁/E) + ∂₂(E₂/G)],   A = (E₂/G, −G₁/E),
//! ```
//!
//! so that `∂₁A₂ − ∂₂A₁ = EG·K`. The center's kinetic energy is
//! `½vᵀM(q)v` with `M = m·diag(a₁₁, a₂₂) + 𝕀_d·S(q)`, and the spinning disk
//! feels the gyroscopic force `EGμK·[[0,−1],[1,0]]v`.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::diff;
use crate::integrators::{Dynamics, MagneticSystem};
use crate::{Error, Result};

/// Step of the fourth-order differences used for second derivatives.
const FD_STEP: f64 = 1e-3;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// `[∂₁E, ∂₂E, ∂₁G, ∂₂G]`.
pub type SqrtPartials = Arc<dyn Fn(&[f64]) -> [f64; 4] + Send + Sync>;
/// Matrix of the second fundamental form in the chart.
pub type FormField = Arc<dyn Fn(&[f64]) -> [[f64; 2]; 2] + Send + Sync>;

#[derive(Clone)]
pub struct SurfaceMetric {
    pub name: String,
    pub a11: ScalarField,
    pub a22: ScalarField,
    pub partials: Option<SqrtPartials>,
    /// Chart rectangle `[(lo₁, hi₁), (lo₂, hi₂)]`.
    pub domain: [(f64, f64); 2],
}

impl std::fmt::Debug for SurfaceMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceMetric")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_partials", &self.partials.is_some())
            .finish_non_exhaustive()
    }
}

impl SurfaceMetric {
    pub fn new(name: &str, a11: ScalarField, a22: ScalarField, domain: [(f64, f64); 2]) -> Self {
        Self {
            name: name.to_string(),
            a11,
            a22,
            partials: None,
            domain,
        }
    }

    pub fn with_partials(mut self, p: SqrtPartials) -> Self {
        self.partials = Some(p);
        self
    }

    pub fn plane() -> Self {
        Self::new(
            "plane",
            Arc::new(|_| 1.0),
            Arc::new(|_| 1.0),
            [(-1e3, 1e3), (-1e3, 1e3)],
        )
        .with_partials(Arc::new(|_| [0.0; 4]))
    }

    /// Colatitude `q₁` and longitude `q₂`; the poles are excluded.
    pub fn sphere(radius: f64) -> Self {
        let r2 = radius * radius;
        let pi = std::f64::consts::PI;
        Self::new(
            "sphere",
            Arc::new(move |_| r2),
            Arc::new(move |q| r2 * q[0].sin().powi(2)),
            [(0.05, pi - 0.05), (-1e3, 1e3)],
        )
        .with_partials(Arc::new(move |q| [0.0, 0.0, radius * q[0].cos(), 0.0]))
    }

    /// `a₁₁ = 1`, `a₂₂ = e^{2q₁}`, constant curvature −1.
    pub fn pseudosphere() -> Self {
        Self::new(
            "pseudosphere",
            Arc::new(|_| 1.0),
            Arc::new(|q| (2.0 * q[0]).exp()),
            [(-5.0, 5.0), (-1e3, 1e3)],
        )
        .with_partials(Arc::new(|q| [0.0, 0.0, q[0].exp(), 0.0]))
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == 2 && (0..2).all(|i| q[i] >= self.domain[i].0 && q[i] <= self.domain[i].1)
    }

    /// `(E, G)` after checking the chart and positivity.
    pub fn lame(&self, q: &[f64]) -> Result<(f64, f64)> {
        if !self.contains(q) {
            return Err(Error::Domain(format!(
                "{q:?} is outside the {} chart",
                self.name
            )));
        }
        let (a, b) = ((self.a11)(q), (self.a22)(q));
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain(format!(
                "metric coefficients must be positive, got a11 = {a}, a22 = {b} at {q:?}"
            )));
        }
        Ok((a.sqrt(), b.sqrt()))
    }

    /// `[∂₁E, ∂₂E, ∂₁G, ∂₂G]`, by differences when no closure is given.
    pub fn sqrt_partials(&self, q: &[f64]) -> [f64; 4] {
        if let Some(p) = &self.partials {
            return p(q);
        }
        let e = |x: &[f64]| (self.a11)(x).sqrt();
        let g = |x: &[f64]| (self.a22)(x).sqrt();
        [
            diff::partial4(e, q, 0, FD_STEP),
            diff::partial4(e, q, 1, FD_STEP),
            diff::partial4(g, q, 0, FD_STEP),
            diff::partial4(g, q, 1, FD_STEP),
        ]
    }
}

pub fn gaussian_curvature(surface: &SurfaceMetric, q: &[f64]) -> Result<f64> {
    let (e, g) = surface.lame(q)?;
    let t1 = |x: &[f64]| surface.sqrt_partials(x)[2] / (surface.a11)(x).sqrt();
    let t2 = |x: &[f64]| surface.sqrt_partials(x)[1] / (surface.a22)(x).sqrt();
    let div = diff::partial4(t1, q, 0, FD_STEP) + diff::partial4(t2, q, 1, FD_STEP);
    Ok(-div / (e * g))
}

pub fn disk_connection(surface: &SurfaceMetric, q: &[f64]) -> Result<[f64; 2]> {
    let (e, g) = surface.lame(q)?;
    let d = surface.sqrt_partials(q);
    Ok([d[1] / g, -d[2] / e])
}

/// Largest `|∂₁A₂ − ∂₂A₁ − EG·K|` over an `n × n` grid covering `rect`.
pub fn curvature_identity_defect(
    surface: &SurfaceMetric,
    rect: [(f64, f64); 2],
    n: usize,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    let conn = |i: usize| move |x: &[f64]| disk_connection(surface, x).map_or(f64::NAN, |a| a[i]);
    for i in 0..n {
        for j in 0..n {
            let at = |k: usize, s: usize| {
                let (lo, hi) = rect[k];
                lo + (hi - lo) * (s as f64 + 0.5) / n as f64
            };
            let q = [at(0, i), at(1, j)];
            let (e, g) = surface.lame(&q)?;
            let curl =
                diff::partial4(conn(1), &q, 0, FD_STEP) - diff::partial4(conn(0), &q, 1, FD_STEP);
            let defect = (curl - e * g * gaussian_curvature(surface, &q)?).abs();
            if !defect.is_finite() {
                return Err(Error::Domain(format!(
                    "grid point {q:?} leaves the {} chart",
                    surface.name
                )));
            }
            worst = worst.max(defect);
        }
    }
    Ok(worst)
}

#[derive(Clone)]
pub struct DiskParams {
    pub m: f64,
    pub i_a: f64,
    pub i_d: f64,
    /// Zero when absent.
    pub second_form: Option<FormField>,
    /// Axial angular momentum `𝕀_a ω_a`.
    pub mu: f64,
}

impl std::fmt::Debug for DiskParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskParams")
            .field("m", &self.m)
            .field("i_a", &self.i_a)
            .field("i_d", &self.i_d)
            .field("second_form", &self.second_form.is_some())
            .field("mu", &self.mu)
            .finish()
    }
}

impl Default for DiskParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            i_a: 0.5,
            i_d: 0.25,
            second_form: None,
            mu: 0.7,
        }
    }
}

impl DiskParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("i_a", self.i_a), ("i_d", self.i_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn axial_rate(&self) -> f64 {
        self.mu / self.i_a
    }
}

/// Inertia of the disk center and its partials.
struct Inertia {
    m: Matrix2<f64>,
    dm: [Matrix2<f64>; 2],
}

fn inertia(surface: &SurfaceMetric, disk: &DiskParams, q: &[f64]) -> Result<Inertia> {
    let (e, g) = surface.lame(q)?;
    let d = surface.sqrt_partials(q);
    let mut m = Matrix2::new(disk.m * e * e, 0.0, 0.0, disk.m * g * g);
    let mut dm = [0, 1].map(|k| {
        Matrix2::new(
            2.0 * disk.m * e * d[k],
            0.0,
            0.0,
            2.0 * disk.m * g * d[2 + k],
        )
    });
    if let Some(s) = &disk.second_form {
        let at = |x: &[f64]| Matrix2::from_fn(|i, j| s(x)[i][j]);
        m += disk.i_d * at(q);
        for (k, dk) in dm.iter_mut().enumerate() {
            *dk +=
                disk.i_d * Matrix2::from_fn(|i, j| diff::partial4(|x| s(x)[i][j], q, k, FD_STEP));
        }
    }
    Ok(Inertia { m, dm })
}

fn kinetic_force(inr: &Inertia, v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(0.5 * v.dot(&(inr.dm[0] * v)), 0.5 * v.dot(&(inr.dm[1] * v)))
}

/// `(q̇, q̈)` of `M q̈ + Σₖ(∂ₖM v)vₖ − ½vᵀ∂ᵢMv = EGμK·[[0,−1],[1,0]]v`.
pub fn spinning_disk_rhs(
    surface: &SurfaceMetric,
    disk: &DiskParams,
    q: &[f64],
    v: &[f64],
) -> Result<([f64; 2], [f64; 2])> {
    let inr = inertia(surface, disk, q)?;
    let (e, g) = surface.lame(q)?;
    let kappa = e * g * disk.mu * gaussian_curvature(surface, q)?;
    let vv = Vector2::new(v[0], v[1]);
    let rhs = Vector2::new(-kappa * v[1], kappa * v[0]) + kinetic_force(&inr, &vv)
        - (inr.dm[0] * vv) * v[0]
        - (inr.dm[1] * vv) * v[1];
    let acc = inr
        .m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("disk inertia at {q:?}")))?;
    Ok(([v[0], v[1]], [acc[0], acc[1]]))
}

fn fill_nan(dx: &mut [f64]) {
    dx.iter_mut().for_each(|d| *d = f64::NAN);
}

/// Disk center in `(q, v)`, integrated in the surface's own time.
#[derive(Debug, Clone)]
pub struct DiskTangentFlow {
    pub surface: SurfaceMetric,
    pub disk: DiskParams,
}

impl Dynamics for DiskTangentFlow {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        match spinning_disk_rhs(&self.surface, &self.disk, &x[..2], &x[2..]) {
            Ok((v, a)) => dx.copy_from_slice(&[v[0], v[1], a[0], a[1]]),
            Err(_) => fill_nan(dx),
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let v = Vector2::new(x[2], x[3]);
        inertia(&self.surface, &self.disk, &x[..2]).map_or(f64::NAN, |i| 0.5 * v.dot(&(i.m * v)))
    }

    fn momentum(&self, _x: &[f64]) -> f64 {
        self.disk.mu
    }
}

/// `H = ½P₁ᵀM⁻¹P₁`, `P₁ = Mv`, with `B = EGμK·[[0,1],[−1,0]]`.
#[derive(Debug, Clone)]
pub struct DiskMagnetic {
    pub surface: SurfaceMetric,
    pub disk: DiskParams,
}

impl DiskMagnetic {
    /// `P₁ = M(q)v`.
    pub fn momentum_of(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let p = inertia(&self.surface, &self.disk, q)?.m * Vector2::new(v[0], v[1]);
        Ok(vec![p[0], p[1]])
    }
}

fn solve_velocity(
    surface: &SurfaceMetric,
    disk: &DiskParams,
    q: &[f64],
    p: [f64; 2],
) -> Option<(Inertia, Vector2<f64>)> {
    let inr = inertia(surface, disk, q).ok()?;
    let v = inr.m.lu().solve(&Vector2::new(p[0], p[1]))?;
    Some((inr, v))
}

impl MagneticSystem for DiskMagnetic {
    fn dim_base(&self) -> usize {
        2
    }

    fn mu(&self) -> f64 {
        self.disk.mu
    }

    fn hamiltonian(&self, q: &[f64], p1: &[f64]) -> f64 {
        solve_velocity(&self.surface, &self.disk, q, [p1[0], p1[1]])
            .map_or(f64::NAN, |(_, v)| 0.5 * (p1[0] * v[0] + p1[1] * v[1]))
    }

    fn velocity(&self, q: &[f64], p1: &[f64]) -> Vec<f64> {
        solve_velocity(&self.surface, &self.disk, q, [p1[0], p1[1]])
            .map_or(vec![f64::NAN; 2], |(_, v)| vec![v[0], v[1]])
    }

    fn force(&self, q: &[f64], p1: &[f64]) -> Vec<f64> {
        solve_velocity(&self.surface, &self.disk, q, [p1[0], p1[1]]).map_or(
            vec![f64::NAN; 2],
            |(i, v)| {
                let f = kinetic_force(&i, &v);
                vec![f[0], f[1]]
            },
        )
    }

    fn magnetic(&self, q: &[f64]) -> DMatrix<f64> {
        let kappa = self
            .surface
            .lame(q)
            .and_then(|(e, g)| Ok(e * g * self.disk.mu * gaussian_curvature(&self.surface, q)?))
            .unwrap_or(f64::NAN);
        DMatrix::from_row_slice(2, 2, &[0.0, kappa, -kappa, 0.0])
    }
}

/// Canonical chart `(q, P)` with `v = M⁻¹(P + μA)`:
/// `P' = ½vᵀ∂ᵢMv − μ(∂ᵢA)·v`.
#[derive(Debug, Clone)]
pub struct DiskCanonicalFlow {
    pub surface: SurfaceMetric,
    pub disk: DiskParams,
}

impl DiskCanonicalFlow {
    /// `P = M(q)v − μA(q)`.
    pub fn momentum_of(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let p = inertia(&self.surface, &self.disk, q)?.m * Vector2::new(v[0], v[1]);
        let a = disk_connection(&self.surface, q)?;
        Ok(vec![p[0] - self.disk.mu * a[0], p[1] - self.disk.mu * a[1]])
    }

    fn kinetic(&self, x: &[f64]) -> Option<(Inertia, Vector2<f64>)> {
        let a = disk_connection(&self.surface, &x[..2]).ok()?;
        let mu = self.disk.mu;
        solve_velocity(
            &self.surface,
            &self.disk,
            &x[..2],
            [x[2] + mu * a[0], x[3] + mu * a[1]],
        )
    }
}

impl Dynamics for DiskCanonicalFlow {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let Some((inr, v)) = self.kinetic(x) else {
            return fill_nan(dx);
        };
        let f = kinetic_force(&inr, &v);
        let q = &x[..2];
        let conn = |j: usize| {
            move |y: &[f64]| disk_connection(&self.surface, y).map_or(f64::NAN, |a| a[j])
        };
        let mu = self.disk.mu;
        dx[0] = v[0];
        dx[1] = v[1];
        for i in 0..2 {
            let da: f64 = (0..2)
                .map(|j| diff::partial4(conn(j), q, i, FD_STEP) * v[j])
                .sum();
            dx[2 + i] = f[i] - mu * da;
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.kinetic(x)
            .map_or(f64::NAN, |(i, v)| 0.5 * v.dot(&(i.m * v)))
    }

    fn momentum(&self, _x: &[f64]) -> f64 {
        self.disk.mu
    }
}
