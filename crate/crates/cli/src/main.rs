use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fastslow_cli::{
    load_config, parse_config, run_experiment, shipped_config, CliError, Experiment,
    ExperimentConfig,
};
use fastslow_core::parallel::THREADS_ENV;

/// Averaging experiments for fast-slow Hamiltonian systems.
#[derive(Parser)]
#[command(name = "fastslow", version, after_help = format!("{THREADS_ENV} caps the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the shipped config of an experiment.
    Verify {
        experiment: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List experiments and their parameters.
    List,
}

fn list(mut out: impl Write) -> std::io::Result<()> {
    for e in Experiment::ALL {
        let info = e.info();
        writeln!(out, "{}: {}", info.name, info.summary)?;
        for (key, default, meaning) in info.parameters {
            writeln!(out, "    {key} = {default}    # {meaning}")?;
        }
    }
    Ok(())
}

fn execute(mut cfg: ExperimentConfig, output_dir: Option<PathBuf>) -> Result<bool, CliError> {
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let outcome = run_experiment(&cfg)?;
    println!("{}", outcome.report);
    println!("outputs in {}", cfg.output_dir.display());
    Ok(outcome.report.overall_pass())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = list(std::io::stdout().lock());
            return ExitCode::SUCCESS;
        }
        Command::Run { config, output_dir } => {
            load_config(&config).and_then(|cfg| execute(cfg, output_dir))
        }
        Command::Verify {
            experiment,
            output_dir,
        } => shipped_config(&experiment)
            .ok_or_else(|| CliError::UnknownExperiment(experiment.clone()))
            .and_then(|text| Ok(parse_config(text)?))
            .and_then(|cfg| execute(cfg, output_dir)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
