//! Stored trajectories, cubic Hermite interpolation and the CSV format
//! `t,<state columns>,energy,momentum` with 17 significant digits.

use std::io::{BufRead, Write};

use crate::bundle_geometry::{Chart, PhaseStateFull, PhaseStateReduced};
use crate::{Error, Result};

/// Interpretation of the state columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLayout {
    /// `(q, p, φ, γ)`.
    Full { dim_base: usize },
    /// `(Q, P)` or `(Q, P₁)`.
    Reduced { dim_base: usize, chart: Chart },
    /// Position and velocity `(q, q̇)` of a second-order system.
    Tangent { dim_base: usize },
    /// A covector `ξ ∈ 𝔤*`.
    Algebra { dim: usize },
}

impl StateLayout {
    pub fn width(&self) -> usize {
        match *self {
            StateLayout::Full { dim_base } => 2 * dim_base + 2,
            StateLayout::Reduced { dim_base, .. } | StateLayout::Tangent { dim_base } => {
                2 * dim_base
            }
            StateLayout::Algebra { dim } => dim,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let idx = |prefix: &str, n: usize| {
            (0..n)
                .map(move |i| format!("{prefix}{i}"))
                .collect::<Vec<_>>()
        };
        match *self {
            StateLayout::Full { dim_base } => {
                let mut c = idx("q", dim_base);
                c.extend(idx("p", dim_base));
                c.push("phi".into());
                c.push("gamma".into());
                c
            }
            StateLayout::Reduced { dim_base, chart } => {
                let mut c = idx("Q", dim_base);
                c.extend(idx(
                    match chart {
                        Chart::Canonical => "P",
                        Chart::Magnetic => "P1_",
                    },
                    dim_base,
                ));
                c
            }
            StateLayout::Tangent { dim_base } => {
                let mut c = idx("q", dim_base);
                c.extend(idx("v", dim_base));
                c
            }
            StateLayout::Algebra { dim } => idx("xi", dim),
        }
    }

    fn parse_header(cols: &[&str]) -> Option<Self> {
        let n = cols.len();
        let first = *cols.first()?;
        if first == "xi0" {
            return Some(StateLayout::Algebra { dim: n });
        }
        if cols.last() == Some(&"gamma") && n >= 4 && n.is_multiple_of(2) {
            return Some(StateLayout::Full {
                dim_base: (n - 2) / 2,
            });
        }
        if !n.is_multiple_of(2) {
            return None;
        }
        let dim_base = n / 2;
        match (first, cols[dim_base]) {
            ("Q0", "P0") => Some(StateLayout::Reduced {
                dim_base,
                chart: Chart::Canonical,
            }),
            ("Q0", "P1_0") => Some(StateLayout::Reduced {
                dim_base,
                chart: Chart::Magnetic,
            }),
            ("q0", "v0") => Some(StateLayout::Tangent { dim_base }),
            _ => None,
        }
    }
}

/// Time-stamped states with their rates and the logged invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub layout: StateLayout,
    /// Strictly increasing slow time.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `d(state)/dt` in slow time, used for Hermite interpolation.
    pub rates: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub momentum: Vec<f64>,
    /// Smallest `|φ̇|` seen at stored points (full system only).
    pub min_fast_rate: Option<f64>,
}

impl Trajectory {
    pub fn new(layout: StateLayout) -> Self {
        Self {
            layout,
            times: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
            energy: Vec::new(),
            momentum: Vec::new(),
            min_fast_rate: None,
        }
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>, rate: Vec<f64>, energy: f64, momentum: f64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.push(state);
        self.rates.push(rate);
        self.energy.push(energy);
        self.momentum.push(momentum);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn full_state(&self, i: usize) -> Option<PhaseStateFull> {
        let StateLayout::Full { dim_base: l } = self.layout else {
            return None;
        };
        let s = self.states.get(i)?;
        Some(PhaseStateFull::new(
            s[..l].to_vec(),
            s[l..2 * l].to_vec(),
            s[2 * l],
            s[2 * l + 1],
        ))
    }

    pub fn reduced_state(&self, i: usize) -> Option<PhaseStateReduced> {
        let StateLayout::Reduced { dim_base: l, chart } = self.layout else {
            return None;
        };
        let s = self.states.get(i)?;
        Some(PhaseStateReduced {
            q: s[..l].to_vec(),
            p: s[l..].to_vec(),
            chart,
        })
    }

    /// Largest `|E(t) − E(0)| / max(1, |E(0)|)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let Some(&e0) = self.energy.first() else {
            return 0.0;
        };
        let scale = e0.abs().max(1.0);
        self.energy
            .iter()
            .fold(0.0, |m, e| m.max((e - e0).abs() / scale))
    }

    /// Largest `|J(t) − J(0)|`.
    pub fn momentum_drift(&self) -> f64 {
        let Some(&j0) = self.momentum.first() else {
            return 0.0;
        };
        self.momentum.iter().fold(0.0, |m, j| m.max((j - j0).abs()))
    }

    /// Cubic Hermite interpolant at `t` from stored states and rates.
    /// Returns `None` outside `[t₀, t_end]`.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let (&t0, &t1) = (self.times.first()?, self.times.last()?);
        if t < t0 || t > t1 {
            return None;
        }
        let k = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => return Some(self.states[k].clone()),
            Err(k) => k - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1) = (&self.states[k], &self.states[k + 1]);
        let (m0, m1) = (&self.rates[k], &self.rates[k + 1]);
        Some(
            (0..y0.len())
                .map(|i| h00 * y0[i] + h10 * h * m0[i] + h01 * y1[i] + h11 * h * m1[i])
                .collect(),
        )
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend(self.layout.column_names());
        cols.push("energy".into());
        cols.push("momentum".into());
        cols.join(",")
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for i in 0..self.len() {
            let mut line = format!("{:.16e}", self.times[i]);
            for v in self.states[i]
                .iter()
                .chain([&self.energy[i], &self.momentum[i]])
            {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parse a CSV produced by [`Trajectory::write_csv`]. Rates are not
    /// stored in the file and come back as zeros.
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let bad = |m: String| Error::Config(format!("trajectory CSV: {m}"));
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("missing header".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 2..] != ["energy", "momentum"] {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let layout = StateLayout::parse_header(&cols[1..cols.len() - 2])
            .ok_or_else(|| bad(format!("unrecognised state columns in {header:?}")))?;
        let width = layout.width();
        let mut traj = Trajectory::new(layout);
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let vals = line
                .split(',')
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
            if vals.len() != width + 3 {
                return Err(bad(format!(
                    "line {}: expected {} fields",
                    n + 2,
                    width + 3
                )));
            }
            traj.times.push(vals[0]);
            traj.states.push(vals[1..=width].to_vec());
            traj.rates.push(vec![0.0; width]);
            traj.energy.push(vals[width + 1]);
            traj.momentum.push(vals[width + 2]);
        }
        Ok(traj)
    }
}
