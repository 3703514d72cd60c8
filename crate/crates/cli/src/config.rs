//! Line-based experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! experiment = pendulum
//! output_dir = out/pendulum
//! formats = csv, json
//! epsilon_sweep = 1e-2, 5e-3, 2.5e-3
//! horizon_factor = 1
//!
//! [parameters]
//! mu = 3
//!
//! [integrator]
//! method = rk4
//! dt = 2e-2
//! reduced_dt = 1e-3
//! ```
//!
//! Top-level keys must precede the first section header. Parameter names
//! come from the example registry; a parameter's type (number, list or text)
//! is the type of its registered default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fastslow_core::integrators::{IntegratorConfig, Method};
use fastslow_core::systems::{lookup, ExampleInfo};

pub const DEFAULT_SWEEP: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
pub const DEFAULT_REDUCED_DT: f64 = 1e-3;
pub const MAX_HORIZON_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Pendulum,
    Disk,
    Particle,
    Euler,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Pendulum,
        Experiment::Disk,
        Experiment::Particle,
        Experiment::Euler,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Pendulum => "pendulum",
            Experiment::Disk => "disk",
            Experiment::Particle => "particle",
            Experiment::Euler => "euler",
            Experiment::Custom => "custom",
        }
    }

    pub fn info(self) -> &'static ExampleInfo {
        lookup(self.name()).expect("every experiment is registered")
    }

    /// Whether the experiment runs an ε-sweep of full against averaged dynamics.
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            Experiment::Pendulum | Experiment::Particle | Experiment::Custom
        )
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

impl ParamValue {
    /// Type of a registered default: a single number, a comma list of
    /// numbers, or free text.
    fn infer(raw: &str) -> ParamValue {
        if let Ok(x) = raw.parse::<f64>() {
            return ParamValue::Number(x);
        }
        match parse_list(raw) {
            Ok(v) => ParamValue::List(v),
            Err(_) => ParamValue::Text(raw.to_string()),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ParamValue::Number(_) => "number",
            ParamValue::List(_) => "list of numbers",
            ParamValue::Text(_) => "text",
        }
    }

    fn parse_as(&self, raw: &str) -> Result<ParamValue, String> {
        match self {
            ParamValue::Number(_) => parse_number(raw).map(ParamValue::Number),
            ParamValue::List(_) => parse_list(raw).map(ParamValue::List),
            ParamValue::Text(_) if raw.is_empty() => {
                Err("expected text, got an empty value".into())
            }
            ParamValue::Text(_) => Ok(ParamValue::Text(raw.to_string())),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x:?}"),
            ParamValue::List(v) => f.write_str(&join_floats(v)),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Explicitly set parameters; missing ones take the registry default.
    pub parameters: BTreeMap<String, ParamValue>,
    /// Strictly decreasing.
    pub epsilon_sweep: Vec<f64>,
    /// Full-system horizon in units of `1/ε` fast time, in `(0, 10]`.
    pub horizon_factor: f64,
    /// Integrator for the full system.
    pub integrator: IntegratorConfig,
    /// Step for averaged and reduced integrations (same method).
    pub reduced_dt: f64,
    pub output_dir: PathBuf,
    /// Sorted, non-empty, no duplicates.
    pub formats: Vec<Format>,
}

impl ExperimentConfig {
    /// Defaults for `experiment`, writing to `out/<name>`.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            parameters: BTreeMap::new(),
            epsilon_sweep: DEFAULT_SWEEP.to_vec(),
            horizon_factor: 1.0,
            integrator: IntegratorConfig::default(),
            reduced_dt: DEFAULT_REDUCED_DT,
            output_dir: PathBuf::from("out").join(experiment.name()),
            formats: vec![Format::Csv],
        }
    }

    pub fn reduced_integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.reduced_dt,
            ..self.integrator
        }
    }

    /// Parameter value, falling back to the registry default.
    pub fn param(&self, key: &str) -> Option<ParamValue> {
        if let Some(v) = self.parameters.get(key) {
            return Some(v.clone());
        }
        self.experiment
            .info()
            .parameters
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, d, _)| ParamValue::infer(d))
    }

    pub fn number(&self, key: &str) -> f64 {
        match self.param(key) {
            Some(ParamValue::Number(x)) => x,
            other => panic!("parameter {key} is not a registered number: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        match self.param(key) {
            Some(ParamValue::List(v)) => v,
            Some(ParamValue::Number(x)) => vec![x],
            other => panic!("parameter {key} is not a registered list: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> String {
        match self.param(key) {
            Some(v) => v.to_string(),
            None => panic!("parameter {key} is not registered"),
        }
    }

    /// Canonical text form; `parse_config(&cfg.serialize())` reproduces `cfg`.
    pub fn serialize(&self) -> String {
        let i = &self.integrator;
        let formats: Vec<_> = self.formats.iter().map(|f| f.name()).collect();
        let mut out = String::new();
        out.push_str(&format!("experiment = {}\n", self.experiment));
        out.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        out.push_str(&format!("formats = {}\n", formats.join(", ")));
        out.push_str(&format!(
            "epsilon_sweep = {}\n",
            join_floats(&self.epsilon_sweep)
        ));
        out.push_str(&format!("horizon_factor = {:?}\n", self.horizon_factor));
        out.push_str("\n[parameters]\n");
        for (k, v) in &self.parameters {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[integrator]\n");
        out.push_str(&format!("method = {}\n", method_name(i.method)));
        out.push_str(&format!("dt = {:?}\n", i.dt));
        out.push_str(&format!("reduced_dt = {:?}\n", self.reduced_dt));
        out.push_str(&format!("newton_tol = {:?}\n", i.newton_tol));
        out.push_str(&format!("newton_max_iter = {}\n", i.newton_max_iter));
        out.push_str(&format!("output_stride = {}\n", i.output_stride));
        out
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::ImplicitMidpoint => "midpoint",
        Method::Rk4 => "rk4",
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One violation; `line` is `None` for problems not tied to a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violation found in a config text, in line order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        write!(f, "invalid config:\n  {}", lines.join("\n  "))
    }
}

fn parse_number(raw: &str) -> Result<f64, String> {
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(x) => Err(format!("expected a finite number, got {x}")),
        Err(_) => Err(format!("expected a number, got {raw:?}")),
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    if raw.trim().is_empty() {
        return Err("expected a comma-separated list of numbers, got an empty value".into());
    }
    raw.split(',').map(|s| parse_number(s.trim())).collect()
}

fn parse_count(raw: &str) -> Result<usize, String> {
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {raw:?}")),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Parameters,
    Integrator,
}

struct Parser {
    issues: Vec<ConfigIssue>,
    seen: BTreeMap<(u8, String), usize>,
}

impl Parser {
    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    /// Record `res` as an issue on `line` and return the value if it parsed.
    fn check<T>(&mut self, line: usize, key: &str, res: Result<T, String>) -> Option<T> {
        res.map_err(|m| self.issue(Some(line), format!("{key}: {m}")))
            .ok()
    }

    fn first_use(&mut self, section: Section, key: &str, line: usize) -> bool {
        match self.seen.insert((section as u8, key.to_string()), line) {
            Some(prev) => {
                self.issue(
                    Some(line),
                    format!("duplicate key {key} (first set on line {prev})"),
                );
                false
            }
            None => true,
        }
    }
}

/// Parse and validate a config, reporting every violation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut p = Parser {
        issues: Vec::new(),
        seen: BTreeMap::new(),
    };
    let mut section = Section::Top;
    let mut experiment: Option<Experiment> = None;
    let mut params: Vec<(usize, String, String)> = Vec::new();
    let mut cfg = ExperimentConfig::new(Experiment::Pendulum);
    let mut output_dir = None;

    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim) {
                Some("parameters") => section = Section::Parameters,
                Some("integrator") => section = Section::Integrator,
                Some(other) => p.issue(Some(n), format!("unknown section [{other}]")),
                None => p.issue(Some(n), format!("malformed section header {line:?}")),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            p.issue(Some(n), format!("expected `key = value`, got {line:?}"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            p.issue(Some(n), "missing key before '='");
            continue;
        }
        if !p.first_use(section, key, n) {
            continue;
        }
        match (section, key) {
            (Section::Top, "experiment") => experiment = p.check(n, key, value.parse()),
            (Section::Top, "output_dir") => {
                if value.is_empty() {
                    p.issue(Some(n), "output_dir: expected a path, got an empty value");
                } else {
                    output_dir = Some(PathBuf::from(value));
                }
            }
            (Section::Top, "formats") => {
                let mut fs = Vec::new();
                for f in value.split(',').map(str::trim) {
                    match f {
                        "csv" => fs.push(Format::Csv),
                        "json" => fs.push(Format::Json),
                        "" => {}
                        other => p.issue(
                            Some(n),
                            format!("formats: unknown format {other:?} (expected csv or json)"),
                        ),
                    }
                }
                fs.sort();
                fs.dedup();
                if fs.is_empty() {
                    p.issue(Some(n), "formats: at least one output format is required");
                }
                cfg.formats = fs;
            }
            (Section::Top, "epsilon_sweep") => {
                if let Some(v) = p.check(n, key, parse_list(value)) {
                    if v.iter().any(|e| *e <= 0.0) {
                        p.issue(Some(n), "epsilon_sweep entries must be positive");
                    }
                    if v.windows(2).any(|w| w[1] >= w[0]) {
                        p.issue(Some(n), "epsilon_sweep must be strictly decreasing");
                    }
                    cfg.epsilon_sweep = v;
                }
            }
            (Section::Top, "horizon_factor") => {
                if let Some(h) = p.check(n, key, parse_number(value)) {
                    if !(h > 0.0 && h <= MAX_HORIZON_FACTOR) {
                        p.issue(
                            Some(n),
                            format!(
                                "horizon_factor must lie in (0, {MAX_HORIZON_FACTOR}], got {h}"
                            ),
                        );
                    }
                    cfg.horizon_factor = h;
                }
            }
            (Section::Parameters, _) => params.push((n, key.to_string(), value.to_string())),
            (Section::Integrator, "method") => match value {
                "midpoint" | "implicit_midpoint" => {
                    cfg.integrator.method = Method::ImplicitMidpoint
                }
                "rk4" => cfg.integrator.method = Method::Rk4,
                other => p.issue(
                    Some(n),
                    format!("method: unknown method {other:?} (expected midpoint or rk4)"),
                ),
            },
            (Section::Integrator, "dt" | "reduced_dt") => {
                if let Some(dt) = p.check(n, key, parse_number(value)) {
                    if dt <= 0.0 {
                        p.issue(Some(n), format!("{key} must be positive, got {dt}"));
                    }
                    if key == "dt" {
                        cfg.integrator.dt = dt;
                    } else {
                        cfg.reduced_dt = dt;
                    }
                }
            }
            (Section::Integrator, "newton_tol") => {
                if let Some(tol) = p.check(n, key, parse_number(value)) {
                    if !(tol > 0.0 && tol <= 1e-6) {
                        p.issue(
                            Some(n),
                            format!("newton_tol must lie in (0, 1e-6], got {tol}"),
                        );
                    }
                    cfg.integrator.newton_tol = tol;
                }
            }
            (Section::Integrator, "newton_max_iter") => {
                if let Some(k) = p.check(n, key, parse_count(value)) {
                    cfg.integrator.newton_max_iter = k;
                }
            }
            (Section::Integrator, "output_stride") => {
                if let Some(k) = p.check(n, key, parse_count(value)) {
                    cfg.integrator.output_stride = k;
                }
            }
            (Section::Top, _) => p.issue(Some(n), format!("unknown key {key}")),
            (Section::Integrator, _) => {
                p.issue(Some(n), format!("unknown key {key} in [integrator]"))
            }
        }
    }

    match experiment {
        Some(e) => {
            cfg.experiment = e;
            let schema = e.info().parameters;
            for (n, key, raw) in params {
                match schema.iter().find(|(k, _, _)| *k == key) {
                    Some((_, default, _)) => {
                        let template = ParamValue::infer(default);
                        match template.parse_as(&raw) {
                            Ok(v) => {
                                cfg.parameters.insert(key, v);
                            }
                            Err(m) => p.issue(
                                Some(n),
                                format!(
                                    "type mismatch for {key}: expected {}; {m}",
                                    template.kind()
                                ),
                            ),
                        }
                    }
                    None => {
                        let known: Vec<_> = schema.iter().map(|(k, _, _)| *k).collect();
                        p.issue(
                            Some(n),
                            format!(
                                "unknown parameter {key} for {e} (known: {})",
                                known.join(", ")
                            ),
                        );
                    }
                }
            }
            cfg.output_dir = output_dir.unwrap_or_else(|| PathBuf::from("out").join(e.name()));
        }
        None if !p
            .seen
            .contains_key(&(Section::Top as u8, "experiment".to_string())) =>
        {
            p.issue(None, "missing required key experiment");
        }
        None => {}
    }

    if p.issues.is_empty() {
        Ok(cfg)
    } else {
        p.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        Err(ConfigError { issues: p.issues })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn messages(err: &ConfigError) -> Vec<String> {
        err.issues.iter().map(|i| i.to_string()).collect()
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config("experiment = pendulum\n").unwrap();
        assert_eq!(cfg.epsilon_sweep, DEFAULT_SWEEP.to_vec());
        assert_eq!(cfg.horizon_factor, 1.0);
        assert_eq!(cfg.formats, vec![Format::Csv]);
        assert_eq!(cfg.output_dir, PathBuf::from("out/pendulum"));
        assert_eq!(cfg.number("mu"), 3.0);
        assert_eq!(cfg.integrator, IntegratorConfig::default());
    }

    #[test]
    fn increasing_sweep_is_rejected() {
        let err = parse_config("experiment = pendulum\nepsilon_sweep = 1e-2, 2e-2\n").unwrap_err();
        assert_eq!(
            messages(&err),
            vec!["line 2: epsilon_sweep must be strictly decreasing"]
        );
    }

    #[test]
    fn every_violation_is_listed_with_its_line() {
        let text = "experiment = pendulum\n\
                    colour = red\n\
                    formats = \n\
                    [parameters]\n\
                    mu = fast\n\
                    nope = 1\n\
                    [integrator]\n\
                    dt = -1\n\
                    newton_max_iter = 2.5\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.issues.iter().map(|i| i.line).collect();
        assert_eq!(
            lines,
            vec![Some(2), Some(3), Some(5), Some(6), Some(8), Some(9)]
        );
        assert!(err.issues[2].message.starts_with("type mismatch for mu"));
        assert!(err.issues[3].message.starts_with("unknown parameter nope"));
    }

    #[test]
    fn missing_experiment_is_reported() {
        let err = parse_config("horizon_factor = 2\n").unwrap_err();
        assert_eq!(messages(&err), vec!["missing required key experiment"]);
    }

    #[test]
    fn horizon_factor_is_capped() {
        let err = parse_config("experiment = custom\nhorizon_factor = 10.5\n").unwrap_err();
        assert_eq!(err.issues[0].line, Some(2));
        assert!(parse_config("experiment = custom\nhorizon_factor = 10\n").is_ok());
    }

    #[test]
    fn duplicate_keys_are_reported() {
        let err = parse_config("experiment = disk\n[parameters]\nm = 1\nm = 2\n").unwrap_err();
        assert_eq!(err.issues[0].line, Some(4));
    }

    #[test]
    fn list_and_text_parameters() {
        let cfg = parse_config(
            "experiment = euler\n[parameters]\nalgebra = heisenberg\ninertia = 1, 1, 2\n",
        )
        .unwrap();
        assert_eq!(cfg.text("algebra"), "heisenberg");
        assert_eq!(cfg.list("inertia"), vec![1.0, 1.0, 2.0]);
        assert_eq!(cfg.list("shift"), vec![0.0; 3]);
        let err = parse_config("experiment = euler\n[parameters]\ninertia = 1, x\n").unwrap_err();
        assert!(err.issues[0].message.contains("list of numbers"));
    }
}
