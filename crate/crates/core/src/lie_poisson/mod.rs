//! Central extensions at Lie-algebra level: scalar 2-cocycles, the extended
//! Lie–Poisson bracket and the Euler equation on the extended dual
//!
//! ```text
//! ξ̇ = −ad*_{𝕀⁻¹ξ}(ξ − L),
//! ```
//!
//! with the shift cocycle `σ(X, Y) = −⟨L, [X, Y]⟩`.

// Structure-constant contractions read best with explicit indices.
#![allow(clippy::needless_range_loop)]

mod algebra;

use nalgebra::{Cholesky, DMatrix, DVector};

pub use algebra::{LieAlgebraData, JACOBI_TOL};

use crate::integrators::{integrate, Dynamics, IntegratorConfig, StateLayout, Trajectory};
use crate::{dot, Error, Result};

/// Largest cocycle-identity defect accepted by [`Cocycle::new`].
pub const COCYCLE_TOL: f64 = 1e-12;

/// Scalar 2-cocycle `σ(eᵢ, eⱼ) = sigma[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    sigma: DMatrix<f64>,
}

impl Cocycle {
    pub fn new(alg: &LieAlgebraData, sigma: DMatrix<f64>) -> Result<Self> {
        let n = alg.dim();
        if sigma.shape() != (n, n) {
            return Err(Error::Algebra(format!("cocycle must be {n}×{n}")));
        }
        let asym = (&sigma + sigma.transpose()).amax();
        if asym > 0.0 {
            return Err(Error::Algebra(format!(
                "cocycle is not antisymmetric (defect {asym:e})"
            )));
        }
        let coc = Self { sigma };
        let d = coc.cocycle_defect(alg);
        if d > COCYCLE_TOL {
            return Err(Error::Algebra(format!("cocycle identity fails by {d:e}")));
        }
        Ok(coc)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            sigma: DMatrix::zeros(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `σ(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.sigma[(i, j)] * y[j];
            }
        }
        s
    }

    /// `max |σ([eᵢ,eⱼ],eₖ) + σ([eⱼ,eₖ],eᵢ) + σ([eₖ,eᵢ],eⱼ)|`.
    pub fn cocycle_defect(&self, alg: &LieAlgebraData) -> f64 {
        let n = alg.dim();
        let s = &self.sigma;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v: f64 = (0..n)
                        .map(|m| {
                            alg.c(i, j, m) * s[(m, k)]
                                + alg.c(j, k, m) * s[(m, i)]
                                + alg.c(k, i, m) * s[(m, j)]
                        })
                        .sum();
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

/// Sign convention of the Lie–Poisson bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `{f, g}(ν) = −⟨ν, [df, dg]⟩ − σ(df, dg)`.
    #[default]
    Left,
    /// The opposite sign; its Hamiltonian flow for `H = ½⟨ξ, 𝕀⁻¹ξ⟩` is the
    /// Euler equation `ξ̇ = −ad*_{𝕀⁻¹ξ}(ξ − L)`.
    Right,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Left => 1.0,
            Orientation::Right => -1.0,
        }
    }
}

/// `ad*_X ξ`, defined by `⟨ad*_X ξ, Y⟩ = ⟨ξ, [X, Y]⟩`:
/// `ηⱼ = Σᵢₖ ξₖ cᵏᵢⱼ Xᵢ`.
pub fn coadjoint_action(alg: &LieAlgebraData, x: &[f64], xi: &[f64]) -> Vec<f64> {
    let n = alg.dim();
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    s += xi[k] * alg.c(i, j, k) * x[i];
                }
            }
            s
        })
        .collect()
}

/// `−⟨ν, [df, dg]⟩ − σ(df, dg)` with the left-action signs.
pub fn extended_bracket(
    alg: &LieAlgebraData,
    coc: &Cocycle,
    df: &[f64],
    dg: &[f64],
    nu: &[f64],
) -> f64 {
    extended_bracket_oriented(alg, coc, df, dg, nu, Orientation::Left)
}

pub fn extended_bracket_oriented(
    alg: &LieAlgebraData,
    coc: &Cocycle,
    df: &[f64],
    dg: &[f64],
    nu: &[f64],
    orientation: Orientation,
) -> f64 {
    orientation.sign() * (-dot(nu, &alg.bracket(df, dg)) - coc.eval(df, dg))
}

/// `ν̇ⱼ = {νⱼ, H}` for a Hamiltonian with gradient `dh` at `ν`.
pub fn hamiltonian_vector_field(
    alg: &LieAlgebraData,
    coc: &Cocycle,
    orientation: Orientation,
    nu: &[f64],
    dh: &[f64],
) -> Vec<f64> {
    let n = alg.dim();
    let mut e = vec![0.0; n];
    (0..n)
        .map(|j| {
            e[j] = 1.0;
            let v = extended_bracket_oriented(alg, coc, &e, dh, nu, orientation);
            e[j] = 0.0;
            v
        })
        .collect()
}

/// Jacobiator `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` at `ν` for the linear
/// functions `f = ⟨α,ν⟩`, `g = ⟨β,ν⟩`, `h = ⟨γ,ν⟩`.
///
/// The bracket of two linear functions is affine with gradient `−[·,·]`,
/// so the outer brackets are again brackets of linear gradients.
pub fn jacobiator_linear(
    alg: &LieAlgebraData,
    coc: &Cocycle,
    alpha: &[f64],
    beta: &[f64],
    gamma: &[f64],
    nu: &[f64],
) -> f64 {
    let outer = |x: &[f64], y: &[f64], z: &[f64]| {
        let inner: Vec<f64> = alg.bracket(y, z).into_iter().map(|v| -v).collect();
        extended_bracket(alg, coc, x, &inner, nu)
    };
    outer(alpha, beta, gamma) + outer(beta, gamma, alpha) + outer(gamma, alpha, beta)
}

/// Euler system on the centrally extended dual: inertia `𝕀` and shift `L`.
#[derive(Debug, Clone)]
pub struct EulerSystem {
    pub algebra: LieAlgebraData,
    inertia: DMatrix<f64>,
    inertia_chol: Cholesky<f64, nalgebra::Dyn>,
    pub shift: Vec<f64>,
}

impl EulerSystem {
    pub fn new(algebra: LieAlgebraData, inertia: DMatrix<f64>, shift: Vec<f64>) -> Result<Self> {
        let n = algebra.dim();
        if inertia.shape() != (n, n) || shift.len() != n {
            return Err(Error::Algebra(format!(
                "inertia must be {n}×{n} and shift of length {n}"
            )));
        }
        let asym = (&inertia - inertia.transpose()).amax();
        if asym > 1e-14 {
            return Err(Error::Algebra(format!(
                "inertia is not symmetric (defect {asym:e})"
            )));
        }
        let inertia_chol = Cholesky::new(inertia.clone())
            .ok_or_else(|| Error::Singular("inertia is not positive definite".into()))?;
        Ok(Self {
            algebra,
            inertia,
            inertia_chol,
            shift,
        })
    }

    /// Diagonal inertia `diag(moments)`.
    pub fn diagonal(algebra: LieAlgebraData, moments: &[f64], shift: Vec<f64>) -> Result<Self> {
        Self::new(
            algebra,
            DMatrix::from_diagonal(&DVector::from_column_slice(moments)),
            shift,
        )
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn inertia(&self) -> &DMatrix<f64> {
        &self.inertia
    }

    /// `𝕀⁻¹ξ`.
    pub fn velocity(&self, xi: &[f64]) -> Vec<f64> {
        self.inertia_chol
            .solve(&DVector::from_column_slice(xi))
            .iter()
            .copied()
            .collect()
    }

    /// `H(ξ) = ½⟨ξ, 𝕀⁻¹ξ⟩`.
    pub fn energy(&self, xi: &[f64]) -> f64 {
        0.5 * dot(xi, &self.velocity(xi))
    }

    /// Casimir evaluated at `ξ − L` (see [`LieAlgebraData::casimir`]).
    pub fn casimir(&self, xi: &[f64]) -> Option<f64> {
        let eta: Vec<f64> = xi.iter().zip(&self.shift).map(|(x, l)| x - l).collect();
        self.algebra.casimir(&eta)
    }
}

/// `σ_ij = −⟨L, [eᵢ, eⱼ]⟩ = −Σₖ Lₖ cᵏᵢⱼ`.
pub fn shift_cocycle(sys: &EulerSystem) -> Cocycle {
    let alg = &sys.algebra;
    let n = alg.dim();
    let sigma = DMatrix::from_fn(n, n, |i, j| {
        -(0..n).map(|k| sys.shift[k] * alg.c(i, j, k)).sum::<f64>()
    });
    Cocycle { sigma }
}

/// `ξ̇ = −ad*_{𝕀⁻¹ξ}(ξ − L)`.
pub fn euler_vector_field(sys: &EulerSystem, xi: &[f64]) -> Vec<f64> {
    let v = sys.velocity(xi);
    let eta: Vec<f64> = xi.iter().zip(&sys.shift).map(|(x, l)| x - l).collect();
    coadjoint_action(&sys.algebra, &v, &eta)
        .into_iter()
        .map(|x| -x)
        .collect()
}

impl Dynamics for EulerSystem {
    fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        dx.copy_from_slice(&euler_vector_field(self, x));
    }

    fn energy(&self, x: &[f64]) -> f64 {
        EulerSystem::energy(self, x)
    }

    fn momentum(&self, x: &[f64]) -> f64 {
        self.casimir(x).unwrap_or(f64::NAN)
    }
}

/// Integrate the Euler equation; the momentum column holds the Casimir.
pub fn integrate_euler(
    sys: &EulerSystem,
    xi0: &[f64],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate(
        sys,
        xi0.to_vec(),
        horizon,
        cfg,
        StateLayout::Algebra { dim: sys.dim() },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigid_body(shift: Vec<f64>) -> EulerSystem {
        EulerSystem::diagonal(LieAlgebraData::so3(), &[1.0, 2.0, 3.0], shift).unwrap()
    }

    #[test]
    fn abelian_coadjoint_vanishes() {
        let g = LieAlgebraData::abelian(3);
        assert_eq!(
            coadjoint_action(&g, &[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]),
            vec![0.0; 3]
        );
    }

    #[test]
    fn so3_coadjoint_is_cross_product() {
        let g = LieAlgebraData::so3();
        let (x, xi) = ([0.3, -1.2, 0.5], [2.0, 0.7, -0.4]);
        let cross = [
            xi[1] * x[2] - xi[2] * x[1],
            xi[2] * x[0] - xi[0] * x[2],
            xi[0] * x[1] - xi[1] * x[0],
        ];
        for (a, b) in coadjoint_action(&g, &x, &xi).iter().zip(cross) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pairing_identity_on_basis() {
        let g = LieAlgebraData::so3();
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let xi = [0.4, -0.9, 1.3];
        for i in 0..3 {
            for j in 0..3 {
                let lhs = dot(&coadjoint_action(&g, &e(i), &xi), &e(j));
                let rhs = dot(&xi, &g.bracket(&e(i), &e(j)));
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_cocycle_values() {
        let sys = rigid_body(vec![0.0, 0.0, 1.0]);
        let s = shift_cocycle(&sys);
        assert_eq!(s.matrix()[(0, 1)], -1.0);
        assert_eq!(s.matrix()[(1, 0)], 1.0);
        assert_eq!(s.matrix()[(0, 2)], 0.0);
        assert!(s.cocycle_defect(&sys.algebra) < 1e-14);
        assert_eq!(shift_cocycle(&rigid_body(vec![0.0; 3])), Cocycle::zero(3));
    }

    #[test]
    fn cocycle_validation() {
        let g = LieAlgebraData::so3();
        let bad = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(Cocycle::new(&g, bad).is_err());
        // Every antisymmetric form on the Heisenberg algebra is a cocycle.
        let h = LieAlgebraData::heisenberg();
        let s = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
        assert!(Cocycle::new(&h, s).is_ok());
    }

    #[test]
    fn bracket_value_and_antisymmetry() {
        let g = LieAlgebraData::so3();
        let z = Cocycle::zero(3);
        let nu = [1.0, 0.0, 0.0];
        assert_eq!(
            extended_bracket(&g, &z, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &nu),
            -1.0
        );
        let coc = shift_cocycle(&rigid_body(vec![0.2, -0.5, 0.9]));
        let (df, dg, nu) = ([0.3, 0.1, -0.7], [1.1, -0.4, 0.2], [0.5, 0.6, -0.8]);
        assert_eq!(
            extended_bracket(&g, &coc, &df, &dg, &nu),
            -extended_bracket(&g, &coc, &dg, &df, &nu)
        );
    }

    #[test]
    fn rigid_body_components() {
        let sys = rigid_body(vec![0.0; 3]);
        let xi = [0.3, 1.1, -0.6];
        let f = euler_vector_field(&sys, &xi);
        // ξ̇ = Ω × ξ with Ω = 𝕀⁻¹ξ: the classical body-frame equations with
        // time reversed, since ad*_Ω ξ = ξ × Ω here.
        assert!((f[0] - (1.0 / 2.0 - 1.0 / 3.0) * xi[1] * xi[2]).abs() < 1e-15);
        assert!((f[1] - (1.0 / 3.0 - 1.0) * xi[2] * xi[0]).abs() < 1e-15);
        assert!((f[2] - (1.0 - 1.0 / 2.0) * xi[0] * xi[1]).abs() < 1e-15);
    }

    #[test]
    fn shift_is_an_equilibrium() {
        let l = vec![0.2, -0.3, 0.7];
        let sys = rigid_body(l.clone());
        assert_eq!(euler_vector_field(&sys, &l), vec![0.0; 3]);
    }

    #[test]
    fn euler_field_is_the_right_oriented_hamiltonian_flow() {
        let sys = EulerSystem::diagonal(
            LieAlgebraData::oscillator(),
            &[1.0, 2.0, 1.5, 3.0],
            vec![0.1, 0.4, -0.2, 0.3],
        )
        .unwrap();
        let coc = shift_cocycle(&sys);
        let xi = [0.7, -0.2, 0.9, 0.4];
        let ham = hamiltonian_vector_field(
            &sys.algebra,
            &coc,
            Orientation::Right,
            &xi,
            &sys.velocity(&xi),
        );
        for (a, b) in ham.iter().zip(euler_vector_field(&sys, &xi)) {
            assert!((a - b).abs() < 1e-14);
        }
        let left = hamiltonian_vector_field(
            &sys.algebra,
            &coc,
            Orientation::Left,
            &xi,
            &sys.velocity(&xi),
        );
        for (a, b) in left.iter().zip(&ham) {
            assert_eq!(*a, -b);
        }
    }

    #[test]
    fn inertia_validation() {
        let g = LieAlgebraData::so3();
        let asym = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(EulerSystem::new(g.clone(), asym, vec![0.0; 3]).is_err());
        assert!(matches!(
            EulerSystem::diagonal(g, &[1.0, -1.0, 1.0], vec![0.0; 3]),
            Err(Error::Singular(_))
        ));
    }
}
