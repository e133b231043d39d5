//! `risbrt`: densities, sweeps and Monte Carlo checks of battery recharging time.

mod commands;
mod config;
mod error;
mod output;
mod presets;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Axis, Curve, Target, Variant};
use config::ConfigArgs;
use error::CliError;
use presets::Preset;

#[derive(Debug, Parser)]
#[command(name = "risbrt", version, about = "Battery recharging time of RIS-assisted wireless power transfer")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct CurveArgs {
    #[arg(long, value_enum, default_value = "brt")]
    target: Target,
    /// Comma-separated columns.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact")]
    variants: Vec<Variant>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density on a grid as CSV.
    Pdf(CurveArgs),
    /// Distribution function on a grid as CSV.
    Cdf(CurveArgs),
    /// Summary statistics along one parameter axis as CSV.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// `a,b,c` or `start:stop:step` (inclusive).
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Compare analytic laws with simulation; writes a JSON report.
    McValidate,
    /// Regenerate figure data; `--out` names a directory.
    Fig {
        #[arg(value_enum)]
        preset: Preset,
    },
    /// Print the resolved configuration.
    Config,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.config.resolve()?;
    match cli.command {
        Command::Pdf(a) => commands::run_curve(&cfg, a.target, &a.variants, Curve::Pdf),
        Command::Cdf(a) => commands::run_curve(&cfg, a.target, &a.variants, Curve::Cdf),
        Command::Sweep { axis, values } => commands::run_sweep(&cfg, axis, &commands::parse_values(&values)?),
        Command::McValidate => commands::run_validate(&cfg),
        Command::Fig { preset } => presets::run(preset, &cfg),
        Command::Config => {
            print!("{}", cfg.serialize());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
