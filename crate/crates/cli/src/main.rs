//! `oqwalk`: command-line harness for linear open quantum walks.
//!
//! Exit codes: 0 on success, 2 for invalid parameters or settings, 3 for
//! I/O failures.

mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Report;
use crate::config::{Format, RunConfig, Settings};
use crate::error::{CliError, Result};
use crate::output::Table;

#[derive(Debug, Parser)]
#[command(
    name = "oqwalk",
    version,
    about = "Linear open quantum walk experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady-state distribution: `m,pi`.
    SteadyState(Settings),
    /// Equilibrium thermodynamics per omega: `omega,beta,T,Z,E,varE,S,F,Cv`.
    Equilibrium(Settings),
    /// Simulated trajectory from node 0: `n,S,E,T_est,S_gen`.
    Trajectory(Settings),
    /// Thermalization window: `N,omega,t_start,t_end,t_therm`.
    Window(Settings),
    /// Approximate versus simulated entropy: `t,S_a,S_G,S_B,w,S_exact`.
    ApproxEntropy(Settings),
    /// Error metrics of the approximate entropy: `metric,value`.
    Table(Settings),
    /// Step estimates for dissipative computation:
    /// `N,omega,n_start,n_steps,n_end,E_eq,dE_domega`.
    Dqc(Settings),
}

fn dist_path(out: &Path) -> PathBuf {
    let mut s: OsString = out.as_os_str().to_owned();
    s.push(".dist.csv");
    PathBuf::from(s)
}

fn write_file(path: &Path, table: &Table, format: Format) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    table
        .write(format, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_stdout(table: &Table, format: Format) -> Result<()> {
    let stdout = std::io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    table
        .write(format, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn emit(report: &Report, cfg: &RunConfig, echo: bool) -> Result<()> {
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    match &cfg.out {
        Some(path) => {
            write_file(path, &report.main, cfg.format)?;
            if let Some(d) = &report.distributions {
                write_file(&dist_path(path), d, Format::Csv)?;
            }
            if echo {
                write_stdout(&report.main, cfg.format)?;
            }
            Ok(())
        }
        None => write_stdout(&report.main, cfg.format),
    }
}

type Handler = fn(&RunConfig) -> Result<Report>;

fn run(cli: Cli) -> Result<()> {
    let (settings, handler, echo): (Settings, Handler, bool) = match cli.command {
        Command::SteadyState(s) => (s, commands::steady_state_cmd, false),
        Command::Equilibrium(s) => (s, commands::equilibrium_cmd, false),
        Command::Trajectory(s) => (s, commands::trajectory_cmd, false),
        Command::Window(s) => (s, commands::window_cmd, false),
        Command::ApproxEntropy(s) => (s, commands::approx_entropy_cmd, false),
        Command::Table(s) => (s, commands::table_cmd, true),
        Command::Dqc(s) => (s, commands::dqc_cmd, false),
    };
    let cfg = RunConfig::resolve(settings)?;
    let report = handler(&cfg)?;
    emit(&report, &cfg, echo)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
