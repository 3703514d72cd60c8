//! Sup-distance between a full trajectory and the averaged one over the
//! averaging window, and per-halving error ratios across an ε-sweep.
//!
//! The window is `0 ≤ τ ≤ 1/ε` in the fast clock of the full
//! equations, i.e. `0 ≤ t ≤ 1` in the slow time stored in trajectories.

use super::{FullDynamics, StateLayout, Trajectory};
use crate::bundle_geometry::Chart;
use crate::parallel::par_map;
use crate::{Error, Result};

/// Largest initial-condition gap accepted by [`closeness_report`].
pub const INITIAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessReport {
    pub sup_error_q: f64,
    pub sup_error_p: f64,
    pub sup_error_gamma: f64,
    /// `sup (|q − Q| + |p − P| + |γ − μ|)`.
    pub sup_error: f64,
    /// Fast-clock length of the window, `1/ε`.
    pub horizon: f64,
    pub epsilon: f64,
    /// Number of full-trajectory samples compared.
    pub samples: usize,
    pub ratio_table: Option<RatioTable>,
}

/// Errors across a decreasing ε-sweep with consecutive ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub epsilons: Vec<f64>,
    pub errors: Vec<f64>,
    /// `errors[k] / errors[k+1]`.
    pub ratios: Vec<f64>,
}

impl RatioTable {
    pub fn new(epsilons: Vec<f64>, errors: Vec<f64>) -> Self {
        let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
        Self {
            epsilons,
            errors,
            ratios,
        }
    }

    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }

    /// Least-squares slope of `log error` against `log ε`.
    pub fn observed_order(&self) -> f64 {
        let xs: Vec<f64> = self.epsilons.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = self.errors.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Compare a full trajectory with a canonical-chart reduced one. Reduced
/// states are Hermite-interpolated to the full sample times.
pub fn closeness_report<S: FullDynamics + ?Sized>(
    full: &Trajectory,
    reduced: &Trajectory,
    sys: &S,
) -> Result<ClosenessReport> {
    let StateLayout::Full { dim_base: l } = full.layout else {
        return Err(Error::Domain(
            "first trajectory must be a full-system trajectory".into(),
        ));
    };
    match reduced.layout {
        StateLayout::Reduced { dim_base, chart: Chart::Canonical } if dim_base == l => {}
        other => {
            return Err(Error::Domain(format!(
                "second trajectory must be a canonical-chart reduced trajectory of base dimension {l}, got {other:?}"
            )))
        }
    }
    if full.is_empty() || reduced.is_empty() {
        return Err(Error::Domain("cannot compare empty trajectories".into()));
    }
    let eps = sys.epsilon();
    let mu = sys.mu();
    let gap = |x: &[f64], y: &[f64]| norm_diff(&x[..l], &y[..l]) + norm_diff(&x[l..2 * l], &y[l..]);
    let (f0, r0) = (&full.states[0], &reduced.states[0]);
    let initial = gap(f0, r0) + (f0[2 * l + 1] - mu).abs();
    if initial > INITIAL_TOL || full.times[0] != reduced.times[0] {
        return Err(Error::InitialMismatch { gap: initial });
    }

    // τ ≤ 1/ε is t ≤ 1.
    let end = full.end_time().min(reduced.end_time()).min(1.0);
    let mut rep = ClosenessReport {
        sup_error_q: 0.0,
        sup_error_p: 0.0,
        sup_error_gamma: 0.0,
        sup_error: 0.0,
        horizon: 1.0 / eps,
        epsilon: eps,
        samples: 0,
        ratio_table: None,
    };
    for (t, s) in full.times.iter().zip(&full.states) {
        if *t > end * (1.0 + 1e-12) {
            break;
        }
        let r = reduced
            .interpolate(t.min(reduced.end_time()))
            .expect("t lies inside the reduced trajectory");
        let eq = norm_diff(&s[..l], &r[..l]);
        let ep = norm_diff(&s[l..2 * l], &r[l..]);
        let eg = (s[2 * l + 1] - mu).abs();
        rep.sup_error_q = rep.sup_error_q.max(eq);
        rep.sup_error_p = rep.sup_error_p.max(ep);
        rep.sup_error_gamma = rep.sup_error_gamma.max(eg);
        rep.sup_error = rep.sup_error.max(eq + ep + eg);
        rep.samples += 1;
    }
    if ![rep.sup_error_q, rep.sup_error_p, rep.sup_error_gamma]
        .iter()
        .all(|e| e.is_finite())
    {
        return Err(Error::Domain("closeness errors are not finite".into()));
    }
    Ok(rep)
}

/// Run `report` for each ε (in parallel, results in input order) and attach
/// the per-halving ratio table to every report.
pub fn epsilon_sweep<F>(epsilons: &[f64], report: F) -> Result<(Vec<ClosenessReport>, RatioTable)>
where
    F: Fn(f64) -> Result<ClosenessReport> + Sync + Send,
{
    let reports = par_map(epsilons, |&e| report(e))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let table = RatioTable::new(
        epsilons.to_vec(),
        reports.iter().map(|r| r.sup_error).collect(),
    );
    let reports = reports
        .into_iter()
        .map(|mut r| {
            r.ratio_table = Some(table.clone());
            r
        })
        .collect();
    Ok((reports, table))
}
