//! `focksim`: batch driver for the focksim experiments.

mod config;
mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig, Kind};
use experiments::RunError;

#[derive(Parser)]
#[command(
    name = "focksim",
    version,
    about = "Few-photon linear-optics experiments with CSV output"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// `key=value` overrides applied after the file.
        overrides: Vec<String>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List experiments and their parameters.
    List,
}

fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(ExperimentConfig::parse(&text, overrides)?)
}

fn list() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    for e in Experiment::ALL {
        writeln!(out, "{e}: {}", e.summary())?;
        for p in e.params() {
            let kind = match p.kind {
                Kind::Real => "real",
                Kind::Count => "integer",
                Kind::Text => "text",
            };
            writeln!(
                out,
                "  {:<10} {:<8} default {:<20} {}",
                p.name, kind, p.default, p.help
            )?;
        }
        if e.sampled() {
            writeln!(
                out,
                "  {:<10} {:<8} {:<28} generator seed for sampled draws",
                "seed", "integer", ""
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::List => {
            let _ = list();
            Ok(())
        }
        Command::Validate { config } => load(&config, &[]).map(|_| println!("ok")),
        Command::Run { config, overrides } => load(&config, &overrides)
            .and_then(|c| experiments::run(&c))
            .map(|path| println!("{}", path.display())),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
