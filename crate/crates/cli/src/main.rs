//! caplab: batch front end for p-capacitary solves and symmetry diagnostics
//! on star-shaped domains.
//!
//! Exit codes are a stable contract: 0 success, 2 usage or configuration
//! error, 3 solver non-convergence.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{FormulasArgs, GeometryArgs, SolveArgs, SweepArgs};
use manifest::Scenario;

/// Errors surfaced to the user, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem: exit 2.
    Config(String),
    /// The solver did not converge: exit 3.
    Unconverged(String),
}

impl From<caplab_core::Error> for CliError {
    fn from(e: caplab_core::Error) -> Self {
        match e {
            caplab_core::Error::Unconverged(_) | caplab_core::Error::UnconvergedInput => {
                CliError::Unconverged(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Commands return the process exit code on success.
pub type CliResult = Result<i32, CliError>;

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected n_r,n_a (for example 128,64), got {s:?}"));
    }
    let n_r = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("bad n_r {:?}: {e}", parts[0]))?;
    let n_a = parts[1]
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("bad n_a {:?}: {e}", parts[1]))?;
    Ok((n_r, n_a))
}

fn parse_dim(s: &str) -> Result<usize, String> {
    match s {
        "2" => Ok(2),
        "3" => Ok(3),
        other => Err(format!("dimension must be 2 or 3, got {other:?}")),
    }
}

#[derive(Parser)]
#[command(
    name = "caplab",
    version,
    about = "p-capacitary solves and symmetry diagnostics on star-shaped domains",
    after_help = "Exit codes: 0 success, 2 usage/config error, 3 solver non-convergence.\n\
                  The default output directory is --out, then $CAPLAB_OUT, then ./caplab_out."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print geometric invariants of a domain config (volume, surface, H0,
    /// isoperimetric deficit, Minkowski residual, star support minimum).
    Geometry {
        /// Domain config JSON path.
        #[arg(long)]
        domain: PathBuf,
        /// Override the dimension recorded in the domain config (2 or 3).
        #[arg(long, value_parser = parse_dim)]
        dim: Option<usize>,
    },
    /// Solve one scenario, run the diagnostics, and write report + dumps.
    Solve {
        /// Replay a recorded manifest instead of passing flags.
        #[arg(long, conflicts_with_all = ["scenario", "domain", "p", "dim", "resolution", "rout_factor"])]
        manifest: Option<PathBuf>,
        /// Scenario to solve.
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        /// Domain config JSON path.
        #[arg(long)]
        domain: Option<PathBuf>,
        /// Exponent p (required for exterior and interior; fixed to 2 for
        /// conformal and torsion).
        #[arg(long)]
        p: Option<f64>,
        /// Override the dimension recorded in the domain config (2 or 3).
        #[arg(long, value_parser = parse_dim)]
        dim: Option<usize>,
        /// Output directory (default: $CAPLAB_OUT, then ./caplab_out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Mesh resolution as n_r,n_a (default 128,64).
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(usize, usize)>,
        /// Truncation radius as a multiple of the domain diameter
        /// (exterior scenarios; default 32).
        #[arg(long)]
        rout_factor: Option<f64>,
        /// Record that the run must be byte-reproducible. Solves always run
        /// serial deterministic reductions; the flag is stored in the
        /// manifest.
        #[arg(long)]
        deterministic: bool,
        /// Emit diagnostics even when the solve did not converge.
        #[arg(long)]
        force_diagnostics: bool,
    },
    /// Solve the same domain over a parameter list; one CSV row per value.
    Sweep {
        /// Scenario to solve.
        #[arg(long, value_enum)]
        scenario: Scenario,
        /// Domain config JSON path.
        #[arg(long)]
        domain: PathBuf,
        /// Base exponent p for resolution sweeps.
        #[arg(long)]
        p: Option<f64>,
        /// Override the dimension recorded in the domain config (2 or 3).
        #[arg(long, value_parser = parse_dim)]
        dim: Option<usize>,
        /// Comma-separated exponents, for example 1.3,1.5,1.7.
        #[arg(long)]
        p_list: Option<String>,
        /// Comma-separated radial resolutions, for example 64,128,256
        /// (n_a stays at the base resolution).
        #[arg(long)]
        resolution_list: Option<String>,
        /// Base mesh resolution as n_r,n_a (default 128,64).
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(usize, usize)>,
        /// Truncation radius as a multiple of the domain diameter.
        #[arg(long)]
        rout_factor: Option<f64>,
        /// Output directory for sweep.csv (default: $CAPLAB_OUT, then
        /// ./caplab_out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one closed-form scalar (run with an unknown name to list
    /// the available formulas).
    Formulas {
        /// Formula name, for example ball_capacity.
        name: String,
        /// Numeric arguments; the first is always the dimension.
        args: Vec<String>,
    },
}

fn dispatch(cmd: Cmd) -> CliResult {
    match cmd {
        Cmd::Geometry { domain, dim } => commands::cmd_geometry(&GeometryArgs { domain, dim }),
        Cmd::Solve {
            manifest,
            scenario,
            domain,
            p,
            dim,
            out,
            resolution,
            rout_factor,
            deterministic,
            force_diagnostics,
        } => commands::cmd_solve(&SolveArgs {
            manifest,
            scenario,
            domain,
            p,
            dim,
            out,
            resolution,
            rout_factor,
            deterministic,
            force_diagnostics,
        }),
        Cmd::Sweep {
            scenario,
            domain,
            p,
            dim,
            p_list,
            resolution_list,
            resolution,
            rout_factor,
            out,
        } => commands::cmd_sweep(&SweepArgs {
            scenario,
            domain,
            p,
            dim,
            p_list,
            resolution_list,
            resolution,
            rout_factor,
            out,
        }),
        Cmd::Formulas { name, args } => commands::cmd_formulas(&FormulasArgs { name, args }),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => std::process::exit(code),
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Unconverged(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}
