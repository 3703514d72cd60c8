//! Structure constants `[eᵢ, eⱼ] = Σₖ cᵏᵢⱼ eₖ` of a finite-dimensional Lie
//! algebra, validated for antisymmetry and the Jacobi identity.

use std::path::Path;

use crate::{Error, Result};

/// Largest Jacobi-identity defect accepted at load.
pub const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    dim: usize,
    /// `c[(i·n + j)·n + k] = cᵏᵢⱼ`.
    c: Vec<f64>,
    name: String,
}

impl LieAlgebraData {
    /// Build from a dense `c[i][j][k] = cᵏᵢⱼ` table.
    pub fn new(name: impl Into<String>, dim: usize, c: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Algebra("dimension must be positive".into()));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::Algebra(format!(
                "expected {} structure constants, got {}",
                dim * dim * dim,
                c.len()
            )));
        }
        let alg = Self {
            dim,
            c,
            name: name.into(),
        };
        alg.check_antisymmetry()?;
        let defect = alg.jacobi_defect();
        if defect > JACOBI_TOL {
            return Err(Error::Algebra(format!(
                "Jacobi identity fails by {defect:e}"
            )));
        }
        Ok(alg)
    }

    /// Build from the nonzero `(i, j, k, cᵏᵢⱼ)` entries with `i < j`; the
    /// `(j, i)` entries are filled in by antisymmetry.
    pub fn from_brackets(
        name: impl Into<String>,
        dim: usize,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in entries {
            c[(i * dim + j) * dim + k] = v;
            c[(j * dim + i) * dim + k] = -v;
        }
        Self::new(name, dim, c)
    }

    /// `ℝⁿ` with the zero bracket.
    pub fn abelian(n: usize) -> Self {
        Self::new("abelian", n, vec![0.0; n * n * n]).expect("zero bracket is valid")
    }

    /// `so(3)`: `[e₁, e₂] = e₃` and cyclic.
    pub fn so3() -> Self {
        Self::from_brackets("so3", 3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
            .expect("so(3) is a Lie algebra")
    }

    /// Heisenberg algebra: `[e₁, e₂] = e₃`, `e₃` central.
    pub fn heisenberg() -> Self {
        Self::from_brackets("heisenberg", 3, &[(0, 1, 2, 1.0)])
            .expect("Heisenberg is a Lie algebra")
    }

    /// Oscillator algebra: `[e₄, e₁] = e₂`, `[e₄, e₂] = −e₁`, `[e₁, e₂] = e₃`.
    pub fn oscillator() -> Self {
        Self::from_brackets(
            "oscillator",
            4,
            &[(3, 0, 1, 1.0), (3, 1, 0, -1.0), (0, 1, 2, 1.0)],
        )
        .expect("the oscillator algebra is a Lie algebra")
    }

    /// Built-in algebra by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "so3" => Some(Self::so3()),
            "heisenberg" => Some(Self::heisenberg()),
            "oscillator" => Some(Self::oscillator()),
            _ => name
                .strip_prefix("abelian")
                .and_then(|n| n.parse().ok())
                .filter(|&n| n > 0)
                .map(Self::abelian),
        }
    }

    /// Parse the text format: a `dim <n>` line, then `i j k value` rows
    /// (0-indexed, `value = cᵏᵢⱼ`). Blank lines and `#` comments are
    /// ignored. A row's antisymmetric partner may be omitted.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut dim = None;
        let mut c: Vec<Option<f64>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Algebra(format!("line {}: {m}", n + 1));
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some(d) = dim else {
                let d: usize = match toks.as_slice() {
                    ["dim", v] | [v] => {
                        v.parse().map_err(|_| err(format!("bad dimension {v:?}")))?
                    }
                    _ => return Err(err("expected `dim <n>`".into())),
                };
                if d == 0 {
                    return Err(err("dimension must be positive".into()));
                }
                dim = Some(d);
                c = vec![None; d * d * d];
                continue;
            };
            let [i, j, k, v] = toks.as_slice() else {
                return Err(err("expected `i j k value`".into()));
            };
            let idx = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .ok()
                    .filter(|&x| x < d)
                    .ok_or_else(|| err(format!("index {s:?} outside 0..{d}")))
            };
            let (i, j, k) = (idx(i)?, idx(j)?, idx(k)?);
            let v: f64 = v.parse().map_err(|_| err(format!("bad value {v:?}")))?;
            if i == j && v != 0.0 {
                return Err(err(format!("[e{i}, e{i}] must vanish")));
            }
            for (slot, val) in [((i * d + j) * d + k, v), ((j * d + i) * d + k, -v)] {
                match c[slot] {
                    Some(old) if old != val => {
                        return Err(err(format!(
                            "entry ({i} {j} {k}) contradicts an earlier row"
                        )))
                    }
                    _ => c[slot] = Some(val),
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::Algebra("missing `dim` line".into()))?;
        Self::new(name, dim, c.into_iter().map(|v| v.unwrap_or(0.0)).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom");
        Self::parse(name, &text)
    }

    /// Serialise to the text format accepted by [`LieAlgebraData::parse`].
    pub fn to_text(&self) -> String {
        let n = self.dim;
        let mut out = format!("dim {n}\n");
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        out.push_str(&format!("{i} {j} {k} {v:?}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `cᵏᵢⱼ`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// `[x, y]`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += xy * self.c(i, j, k);
                }
            }
        }
        out
    }

    fn check_antisymmetry(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c(i, j, k) != -self.c(j, i, k) {
                        return Err(Error::Algebra(format!(
                            "c^{k}_{i}{j} = {} but c^{k}_{j}{i} = {}",
                            self.c(i, j, k),
                            self.c(j, i, k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `max |Σₘ (cᵐᵢⱼ cˡₘₖ + cᵐⱼₖ cˡₘᵢ + cᵐₖᵢ cˡₘⱼ)|`.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s: f64 = (0..n)
                            .map(|m| {
                                self.c(i, j, m) * self.c(m, k, l)
                                    + self.c(j, k, m) * self.c(m, i, l)
                                    + self.c(k, i, m) * self.c(m, j, l)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// A Casimir of the coadjoint action for the built-in algebras:
    /// `|η|²` for `so3` and `abelian`, the central coordinate `η₃` for
    /// `heisenberg` and `oscillator`.
    pub fn casimir(&self, eta: &[f64]) -> Option<f64> {
        match self.name.as_str() {
            "so3" | "abelian" => Some(eta.iter().map(|x| x * x).sum()),
            "heisenberg" | "oscillator" => Some(eta[2]),
            _ => None,
        }
    }
}
