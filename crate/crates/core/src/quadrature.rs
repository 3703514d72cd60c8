//! Fiber averages `(1/2π)∫₀^{2π} f dφ` and zero-mean antiderivatives.
//!
//! Antiderivatives are computed spectrally: the integrand is projected onto
//! harmonics `|k| ≤ K` with the rule's weights and each harmonic is
//! integrated exactly. For a smooth periodic integrand this keeps the
//! accuracy of the underlying quadrature, which a cumulative trapezoid sum
//! would reduce to second order.

use std::f64::consts::{PI, TAU};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    TrapezoidPeriodic,
    GaussLegendreMapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    scheme: QuadratureScheme,
    nodes: Vec<f64>,
    /// Weights normalised so that they sum to one (they compute means).
    weights: Vec<f64>,
    /// `2w·(cos kx, sin kx)` for node-major `(x, k)`, `k = 1..=max_harmonic`.
    basis: Vec<(f64, f64)>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::trapezoid(64)
    }
}

impl QuadratureRule {
    pub fn new(scheme: QuadratureScheme, n_nodes: usize) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        Ok(match scheme {
            QuadratureScheme::TrapezoidPeriodic => Self::trapezoid(n_nodes),
            QuadratureScheme::GaussLegendreMapped => Self::gauss_legendre(n_nodes),
        })
    }

    /// Equispaced periodic trapezoid rule on `[0, 2π)`.
    pub fn trapezoid(n: usize) -> Self {
        let n = n.max(1);
        Self::with_basis(
            QuadratureScheme::TrapezoidPeriodic,
            (0..n).map(|j| TAU * j as f64 / n as f64).collect(),
            vec![1.0 / n as f64; n],
        )
    }

    /// Gauss–Legendre rule mapped from `[-1, 1]` onto `[0, 2π]`.
    pub fn gauss_legendre(n: usize) -> Self {
        let (x, w) = legendre_nodes(n.max(1));
        Self::with_basis(
            QuadratureScheme::GaussLegendreMapped,
            x.iter().map(|t| PI * (t + 1.0)).collect(),
            w.iter().map(|wi| 0.5 * wi).collect(),
        )
    }

    fn with_basis(scheme: QuadratureScheme, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut rule = Self {
            scheme,
            nodes,
            weights,
            basis: Vec::new(),
        };
        let kmax = rule.max_harmonic();
        rule.basis = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .flat_map(|(&x, &w)| {
                (1..=kmax).map(move |k| {
                    let (s, c) = (k as f64 * x).sin_cos();
                    (2.0 * w * c, 2.0 * w * s)
                })
            })
            .collect();
        rule
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Highest harmonic the rule resolves without aliasing.
    pub fn max_harmonic(&self) -> usize {
        match self.scheme {
            QuadratureScheme::TrapezoidPeriodic => (self.nodes.len() - 1) / 2,
            // A degree-(2n-1) exact rule integrates products of harmonics up
            // to roughly n/2 each to high accuracy.
            QuadratureScheme::GaussLegendreMapped => self.nodes.len() / 3,
        }
    }

    /// Fiber mean `(1/2π)∫₀^{2π} f(φ) dφ`.
    pub fn mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Component-wise fiber mean of a vector-valued integrand.
    pub fn mean_vec(&self, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
        let mut acc = vec![0.0; dim];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            for (a, v) in acc.iter_mut().zip(f(x)) {
                *a += w * v;
            }
        }
        acc
    }
}

/// Truncated real Fourier series `c₀ + Σ_k (a_k cos kφ + b_k sin kφ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub constant: f64,
    /// `(a_k, b_k)` for `k = 1, 2, …`.
    pub harmonics: Vec<(f64, f64)>,
}

impl FourierSeries {
    /// Project `f` onto harmonics `0..=rule.max_harmonic()`.
    pub fn project(f: impl Fn(f64) -> f64, rule: &QuadratureRule) -> Self {
        let values: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
        Self::from_samples(&values, rule)
    }

    /// Project values sampled at `rule.nodes()`.
    pub fn from_samples(values: &[f64], rule: &QuadratureRule) -> Self {
        debug_assert_eq!(values.len(), rule.nodes.len());
        let kmax = rule.max_harmonic();
        let mut constant = 0.0;
        let mut harmonics = vec![(0.0, 0.0); kmax];
        for (j, (&w, &v)) in rule.weights.iter().zip(values).enumerate() {
            constant += w * v;
            let row = &rule.basis[j * kmax..(j + 1) * kmax];
            for ((a, b), (c, s)) in harmonics.iter_mut().zip(row) {
                *a += v * c;
                *b += v * s;
            }
        }
        Self {
            constant,
            harmonics,
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.harmonics
            .iter()
            .enumerate()
            .fold(self.constant, |acc, (k, (a, b))| {
                let kx = (k + 1) as f64 * phi;
                acc + a * kx.cos() + b * kx.sin()
            })
    }

    /// Zero-mean antiderivative. The constant term must already vanish.
    pub fn antiderivative(&self) -> FourierSeries {
        FourierSeries {
            constant: 0.0,
            harmonics: self
                .harmonics
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let k = (k + 1) as f64;
                    (-b / k, a / k)
                })
                .collect(),
        }
    }

    /// Mean of the product, `(1/2π)∫ f g dφ` (Parseval).
    pub fn mean_product(&self, other: &FourierSeries) -> f64 {
        self.constant * other.constant
            + 0.5
                * self
                    .harmonics
                    .iter()
                    .zip(&other.harmonics)
                    .map(|((a, b), (c, d))| a * c + b * d)
                    .sum::<f64>()
    }

    /// Mean of the square, `(1/2π)∫ f² dφ` (Parseval).
    pub fn mean_square(&self) -> f64 {
        self.constant * self.constant
            + 0.5
                * self
                    .harmonics
                    .iter()
                    .map(|(a, b)| a * a + b * b)
                    .sum::<f64>()
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on `[-1, 1]`.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(z) and its derivative.
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
