use std::path::PathBuf;
use std::process::ExitCode;

use afsmc_cli::{execute, Mode, RunSpec, OUT_DIR_ENV};
use clap::{Parser, Subcommand};

/// Adaptive fuzzy sliding mode control simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Output directory for traces and metrics.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (file path or preset name).
    Run { scenario: String },
    /// Run the scenario with adaptation and with `gamma = 0`, and compare.
    Compare { scenario: String },
    /// Run the scenario once per value of a dotted parameter key.
    Sweep {
        scenario: String,
        /// Dotted key, e.g. `controller.phi`.
        #[arg(long)]
        param: String,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        values: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, mode) = match cli.command {
        Command::Run { scenario } => (scenario, Mode::Single),
        Command::Compare { scenario } => (scenario, Mode::Compare),
        Command::Sweep {
            scenario,
            param,
            values,
        } => (scenario, Mode::Sweep { param, values }),
    };
    let spec = RunSpec {
        scenario,
        out_dir: cli.out,
        mode,
    };
    match execute(&spec) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
