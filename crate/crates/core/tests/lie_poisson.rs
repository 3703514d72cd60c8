//! Lie–Poisson identities on built-in and randomly re-based algebras.

use fastslow_core::integrators::{integrate, Dynamics, IntegratorConfig, StateLayout};
use fastslow_core::lie_poisson::{
    coadjoint_action, euler_vector_field, extended_bracket, integrate_euler, jacobiator_linear,
    shift_cocycle, Cocycle, EulerSystem, LieAlgebraData,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The algebra in the basis `e′ᵢ = Σₐ Pₐᵢ eₐ`.
fn rebase(alg: &LieAlgebraData, p: &DMatrix<f64>) -> LieAlgebraData {
    let n = alg.dim();
    let pinv = p.clone().try_inverse().expect("invertible change of basis");
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let x: Vec<f64> = p.column(i).iter().copied().collect();
            let y: Vec<f64> = p.column(j).iter().copied().collect();
            let z = nalgebra::DVector::from_vec(alg.bracket(&x, &y));
            let zk = &pinv * z;
            for k in 0..n {
                c[(i * n + j) * n + k] = zk[k];
            }
        }
    }
    LieAlgebraData::new("rebased", n, c).expect("a change of basis preserves Jacobi")
}

/// 4-dimensional filiform algebra: `[e₁,e₂] = e₃`, `[e₁,e₃] = e₄`.
fn filiform() -> LieAlgebraData {
    LieAlgebraData::from_brackets("filiform", 4, &[(0, 1, 2, 1.0), (0, 2, 3, 1.0)]).unwrap()
}

fn basis_change(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-0.3..0.3_f64, n * n)
        .prop_map(move |v| DMatrix::identity(n, n) + DMatrix::from_vec(n, n, v))
}

fn vecn(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0_f64, n)
}

fn builtins() -> Vec<LieAlgebraData> {
    ["so3", "heisenberg", "oscillator", "abelian4"]
        .iter()
        .map(|n| LieAlgebraData::builtin(n).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn pairing_identity_in_random_nilpotent_basis(p in basis_change(4), x in vecn(4), xi in vecn(4), y in vecn(4)) {
        let alg = rebase(&filiform(), &p);
        let lhs = dot(&coadjoint_action(&alg, &x, &xi), &y);
        let rhs = dot(&xi, &alg.bracket(&x, &y));
        prop_assert!((lhs - rhs).abs() < 1e-13 * (1.0 + rhs.abs()) + 1e-13);
    }

    #[test]
    fn jacobiator_vanishes_with_shift_cocycles(
        which in 0usize..4, l in vecn(4), a in vecn(4), b in vecn(4), c in vecn(4), nu in vecn(4),
    ) {
        let alg = builtins().swap_remove(which);
        let n = alg.dim();
        let sys = EulerSystem::diagonal(alg.clone(), &vec![1.0; n], l[..n].to_vec()).unwrap();
        let coc = shift_cocycle(&sys);
        prop_assert!(coc.cocycle_defect(&alg) < 1e-14);
        prop_assert!(jacobiator_linear(&alg, &coc, &a[..n], &b[..n], &c[..n], &nu[..n]).abs() < 1e-12);
    }

    #[test]
    fn jacobiator_vanishes_with_abelian_cocycles(s in vecn(6), a in vecn(4), b in vecn(4), c in vecn(4), nu in vecn(4)) {
        let alg = LieAlgebraData::abelian(4);
        let mut sigma = DMatrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                sigma[(i, j)] = s[k];
                sigma[(j, i)] = -s[k];
                k += 1;
            }
        }
        let coc = Cocycle::new(&alg, sigma).unwrap();
        prop_assert!(jacobiator_linear(&alg, &coc, &a, &b, &c, &nu).abs() < 1e-12);
    }

    #[test]
    fn leibniz_on_products_of_linear_functions(
        which in 0usize..4, l in vecn(4), a in vecn(4), b in vecn(4), c in vecn(4), nu in vecn(4),
    ) {
        let alg = builtins().swap_remove(which);
        let n = alg.dim();
        let (a, b, c, nu) = (&a[..n], &b[..n], &c[..n], &nu[..n]);
        let sys = EulerSystem::diagonal(alg.clone(), &vec![1.0; n], l[..n].to_vec()).unwrap();
        let coc = shift_cocycle(&sys);
        // d(fg) = f·dg + g·df with f = ⟨a,ν⟩, g = ⟨b,ν⟩.
        let (f, g) = (dot(a, nu), dot(b, nu));
        let dfg: Vec<f64> = a.iter().zip(b).map(|(x, y)| f * y + g * x).collect();
        let lhs = extended_bracket(&alg, &coc, &dfg, c, nu);
        let rhs = f * extended_bracket(&alg, &coc, b, c, nu) + g * extended_bracket(&alg, &coc, a, c, nu);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn euler_field_preserves_energy(which in 0usize..4, m in vecn(4), l in vecn(4), xi in vecn(4)) {
        let alg = builtins().swap_remove(which);
        let n = alg.dim();
        let moments: Vec<f64> = m[..n].iter().map(|v| 1.5 + v).collect();
        let sys = EulerSystem::diagonal(alg, &moments, l[..n].to_vec()).unwrap();
        let f = euler_vector_field(&sys, &xi[..n]);
        prop_assert!(dot(&f, &sys.velocity(&xi[..n])).abs() < 1e-13);
    }
}

/// `η = ξ − L` evolved directly by `η̇ = −ad*_{𝕀⁻¹(η+L)} η`.
struct ShiftedEta<'a>(&'a EulerSystem);

impl Dynamics for ShiftedEta<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rhs(&self, eta: &[f64], d: &mut [f64]) {
        let xi: Vec<f64> = eta.iter().zip(&self.0.shift).map(|(e, l)| e + l).collect();
        let ad = coadjoint_action(&self.0.algebra, &self.0.velocity(&xi), eta);
        for (di, a) in d.iter_mut().zip(ad) {
            *di = -a;
        }
    }

    fn energy(&self, _: &[f64]) -> f64 {
        0.0
    }

    fn momentum(&self, _: &[f64]) -> f64 {
        0.0
    }
}

#[test]
fn shift_equivalence_two_paths() {
    for (alg, moments, l, xi0) in [
        (
            LieAlgebraData::so3(),
            vec![1.0, 2.0, 3.0],
            vec![0.2, -0.1, 0.3],
            vec![0.1, 1.0, 0.1],
        ),
        (
            LieAlgebraData::oscillator(),
            vec![1.0, 1.5, 2.0, 0.7],
            vec![0.1, 0.2, -0.3, 0.4],
            vec![0.5, -0.2, 0.3, 0.8],
        ),
    ] {
        let sys = EulerSystem::diagonal(alg, &moments, l.clone()).unwrap();
        let cfg = IntegratorConfig::rk4(1e-2);
        let xt = integrate_euler(&sys, &xi0, 20.0, &cfg).unwrap();
        let eta0: Vec<f64> = xi0.iter().zip(&l).map(|(x, l)| x - l).collect();
        let et = integrate(
            &ShiftedEta(&sys),
            eta0,
            20.0,
            &cfg,
            StateLayout::Algebra { dim: sys.dim() },
        )
        .unwrap();
        for (x, e) in xt.states.iter().zip(&et.states) {
            for k in 0..sys.dim() {
                assert!((x[k] - l[k] - e[k]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn energy_is_conserved_for_random_examples() {
    let cfg = IntegratorConfig::midpoint(1e-2);
    for (alg, moments, l, xi0) in [
        (
            LieAlgebraData::so3(),
            vec![1.3, 0.8, 2.1],
            vec![0.1, 0.0, -0.2],
            vec![0.4, -0.7, 0.2],
        ),
        (
            LieAlgebraData::heisenberg(),
            vec![1.0, 2.0, 0.5],
            vec![0.3, 0.1, 0.2],
            vec![0.2, 0.6, -0.4],
        ),
        (
            LieAlgebraData::oscillator(),
            vec![1.0, 1.5, 2.0, 0.7],
            vec![0.1, 0.2, -0.3, 0.4],
            vec![0.5, -0.2, 0.3, 0.8],
        ),
    ] {
        let sys = EulerSystem::diagonal(alg, &moments, l).unwrap();
        let t = integrate_euler(&sys, &xi0, 100.0, &cfg).unwrap();
        assert!(
            t.relative_energy_drift() < 1e-8,
            "{}: {:e}",
            sys.algebra.name(),
            t.relative_energy_drift()
        );
        assert!(
            t.momentum_drift() < 1e-8,
            "{}: Casimir {:e}",
            sys.algebra.name(),
            t.momentum_drift()
        );
    }
}

#[test]
fn algebra_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("fastslow-alg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("osc.txt");
    let osc = LieAlgebraData::oscillator();
    std::fs::write(&path, osc.to_text()).unwrap();
    let back = LieAlgebraData::load(&path).unwrap();
    assert_eq!(back.dim(), 4);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(back.c(i, j, k), osc.c(i, j, k));
            }
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(LieAlgebraData::load(dir.join("missing.txt")).is_err());
}
