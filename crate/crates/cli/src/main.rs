//! `coordstat` — config-driven regional coupling analysis.
//!
//! Exit codes: 0 success, 2 input validation failure, 3 config error,
//! 4 I/O error, 1 any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coordstat::config::RunConfig;
use coordstat::panel;
use coordstat::pipeline;
use coordstat::Error;

#[derive(Parser)]
#[command(name = "coordstat", version, about = "Entropy-weighted coupling-coordination analysis with spatial statistics and directional ellipses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a TOML config file.
    Run {
        /// Path to the run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Load and validate the inputs, then stop without computing.
        #[arg(long)]
        validate_only: bool,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ValidationFailed { .. } => 2,
        Error::Config(_) => 3,
        Error::Io { .. } => 4,
        // malformed input files count as validation failures
        Error::Parse { .. }
        | Error::DuplicateIndicatorId { .. }
        | Error::DuplicateRegionId { .. }
        | Error::DuplicateRow { .. }
        | Error::UnknownRegionId { .. }
        | Error::UnknownIndicatorId { .. }
        | Error::NonFiniteValue { .. }
        | Error::MissingCell { .. } => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            output_dir,
            validate_only,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output.dir = dir;
            }
            if validate_only {
                let ds = panel::load_panel(&cfg.inputs.indicators, &cfg.inputs.regions, &cfg.inputs.values)?;
                let report = panel::validate(&ds);
                for finding in &report.warnings {
                    eprintln!("warning: {:?} at {}: {}", finding.code, finding.location, finding.message);
                }
                if !report.is_accepted() {
                    return Err(Error::ValidationFailed { report });
                }
                println!(
                    "ok: {} years x {} regions x {} indicators",
                    ds.year_count(),
                    ds.region_count(),
                    ds.indicator_count()
                );
                return Ok(());
            }
            let manifest = pipeline::run_pipeline(&cfg)?;
            for warning in &manifest.warnings {
                eprintln!("warning: {warning}");
            }
            println!("wrote {} report files to {}", manifest.row_counts.len() + 1, cfg.output.dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::ValidationFailed { report } = &err {
                for finding in &report.errors {
                    eprintln!("  {:?} at {}: {}", finding.code, finding.location, finding.message);
                }
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
