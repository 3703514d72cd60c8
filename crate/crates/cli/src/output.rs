//! Trajectory and table writers. Outputs depend only on their inputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use fastslow_core::integrators::{ClosenessReport, Trajectory};
use serde_json::{json, Value};

use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Trajectory CSV: `t,<state columns>,energy,momentum`, 17 significant digits.
pub fn emit_csv(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    write_with(path, |w| traj.write_csv(w))
}

/// Column names in CSV order.
pub fn columns(traj: &Trajectory) -> Vec<String> {
    traj.csv_header().split(',').map(str::to_string).collect()
}

/// The CSV columns as JSON arrays, in CSV order, plus `metadata`.
/// Non-finite values become `null`.
pub fn trajectory_json(traj: &Trajectory, metadata: Value) -> Value {
    let names = columns(traj);
    let width = traj.layout.width();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(traj.len()); names.len()];
    for i in 0..traj.len() {
        values[0].push(traj.times[i]);
        for (k, v) in traj.states[i].iter().enumerate() {
            values[1 + k].push(*v);
        }
        values[1 + width].push(traj.energy[i]);
        values[2 + width].push(traj.momentum[i]);
    }
    json!({ "metadata": metadata, "columns": names, "values": values })
}

/// Compact when `pretty` is false (trajectory files can be large).
pub fn emit_json(value: &Value, path: &Path, pretty: bool) -> Result<(), CliError> {
    write_with(path, |w| {
        if pretty {
            serde_json::to_writer_pretty(&mut *w, value)
        } else {
            serde_json::to_writer(&mut *w, value)
        }
        .map_err(std::io::Error::from)?;
        writeln!(w)
    })
}

pub fn emit_text(text: &str, path: &Path) -> Result<(), CliError> {
    write_with(path, |w| w.write_all(text.as_bytes()))
}

pub const SWEEP_COLUMNS: [&str; 6] = [
    "epsilon",
    "sup_error",
    "sup_error_q",
    "sup_error_p",
    "sup_error_gamma",
    "ratio",
];

/// Convergence table, one row per ε; `ratio` is `error(ε_k−1)/error(ε_k)`
/// and empty on the first row.
pub fn sweep_csv(reports: &[ClosenessReport]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for (k, r) in reports.iter().enumerate() {
        let ratio = if k == 0 {
            String::new()
        } else {
            format!("{:.16e}", reports[k - 1].sup_error / r.sup_error)
        };
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{ratio}\n",
            r.epsilon, r.sup_error, r.sup_error_q, r.sup_error_p, r.sup_error_gamma
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fastslow_core::integrators::StateLayout;

    fn tiny() -> Trajectory {
        let mut t = Trajectory::new(StateLayout::Algebra { dim: 2 });
        t.push(0.0, vec![1.0, f64::NAN], vec![0.0, 0.0], 0.5, 2.0);
        t.push(0.1, vec![1.5, 2.0], vec![0.0, 0.0], 0.25, 2.0);
        t
    }

    #[test]
    fn json_mirrors_csv_columns() {
        let v = trajectory_json(&tiny(), json!({ "k": 1 }));
        assert_eq!(
            v["columns"],
            json!(["t", "xi0", "xi1", "energy", "momentum"])
        );
        assert_eq!(v["values"][1], json!([1.0, 1.5]));
        assert_eq!(v["values"][2][0], Value::Null);
        assert_eq!(v["values"][3], json!([0.5, 0.25]));
        assert_eq!(v["metadata"]["k"], 1);
    }

    #[test]
    fn sweep_table_has_ratios_after_the_first_row() {
        let rep = |eps: f64, e: f64| ClosenessReport {
            sup_error_q: e,
            sup_error_p: 0.0,
            sup_error_gamma: 0.0,
            sup_error: e,
            horizon: 1.0 / eps,
            epsilon: eps,
            samples: 1,
            ratio_table: None,
        };
        let text = sweep_csv(&[rep(1e-2, 4e-3), rep(5e-3, 2e-3)]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with(",2.0000000000000000e0"));
    }
}
