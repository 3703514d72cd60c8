//! Experiment runner for the `fastslow` command: config parsing, ε-sweeps,
//! trajectory output and verification reports.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig, Format, ParamValue};
pub use output::emit_csv;
pub use report::{CheckRecord, Threshold, VerificationReport};
pub use run::{run_experiment, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: fastslow_core::Error,
    },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("no shipped config for {0:?}")]
    UnknownExperiment(String),
}

/// Config shipped for each experiment; `fastslow verify <name>` runs it.
pub fn shipped_config(name: &str) -> Option<&'static str> {
    match name {
        "pendulum" => Some(include_str!("../configs/pendulum.cfg")),
        "disk" => Some(include_str!("../configs/disk.cfg")),
        "particle" => Some(include_str!("../configs/particle.cfg")),
        "euler" => Some(include_str!("../configs/euler.cfg")),
        "custom" => Some(include_str!("../configs/custom.cfg")),
        _ => None,
    }
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_config(&text)?)
}
