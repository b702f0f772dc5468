//! `damposc` command line: config parsing, dispatch and file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use damposc_core::verify::VerifyOptions;
use damposc_core::Execution;

pub use config::{parse_config, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "damposc", version, about = "Damped quantum oscillator runs from a JSON config")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run the data-parallel helpers sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory; falls back to `output.dir` in the config, then `.`.
    #[arg(long, env = "DAMPOSC_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form trajectory against direct integration -> classical.csv
    Classical(Common),
    /// Invariant suite -> report on stdout and verify_report.txt
    Verify {
        #[command(flatten)]
        common: Common,
        /// Added to the q''^2 coefficient of H (negative control).
        #[arg(long, hide = true, default_value_t = 0.0)]
        tamper_h: f64,
    },
    /// Grid evolution -> density.csv, observables.csv, fig1.svg
    Evolve(Common),
    /// Sliced kernel convergence -> kernel_convergence.csv
    Pathint(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::ReadConfig {
        path: common.config.clone(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn written(out: &Path, names: &[&str]) -> String {
    names
        .iter()
        .map(|n| out.join(n).display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Classical(common) => {
            let (cfg, out) = load(common)?;
            let s = commands::cmd_classical(&cfg, &out)?;
            println!(
                "wrote {} ({} rows, max |x_closed - x_oracle| = {:.3e})",
                written(&out, &["classical.csv"]),
                s.rows,
                s.max_abs_err
            );
        }
        Command::Verify { common, tamper_h } => {
            let (cfg, out) = load(common)?;
            let options = VerifyOptions {
                hamiltonian_tamper: *tamper_h,
                execution: exec,
            };
            let outcome = commands::cmd_verify(&cfg, &out, &options)?;
            print!("{}", outcome.text);
            if outcome.failed > 0 {
                return Err(CliError::ChecksFailed {
                    failed: outcome.failed,
                });
            }
        }
        Command::Evolve(common) => {
            let (cfg, out) = load(common)?;
            let s = commands::cmd_evolve(&cfg, &out)?;
            println!(
                "wrote {} ({} snapshots, final norm {:.6})",
                written(&out, &["density.csv", "observables.csv", "fig1.svg"]),
                s.snapshots.len(),
                s.final_norm
            );
        }
        Command::Pathint(common) => {
            let (cfg, out) = load(common)?;
            let rows = commands::cmd_pathint(&cfg, &out, exec)?;
            println!("wrote {}", written(&out, &["kernel_convergence.csv"]));
            for (n, e) in rows {
                println!("{n:>8} {e:.6e}");
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("damposc: {e}");
            e.exit_code()
        }
    }
}
