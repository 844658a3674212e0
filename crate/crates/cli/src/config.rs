//! Run configuration: command-line flags layered over an optional
//! `key = value` file.
//!
//! File format, one setting per line:
//!
//! ```text
//! # comment
//! n-nodes = 100
//! omega = 0.55:0.95:0.05
//! epsilon = 1
//! steps = 3000
//! format = csv
//! out = results.csv
//! jobs = 4
//! dump-distributions = true
//! cutoff-sigmas = 4
//! ```
//!
//! Keys may use `-` or `_`. Flags given on the command line win.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Everything is optional so that a value
/// from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Number of nodes N.
    #[arg(long)]
    pub n_nodes: Option<usize>,
    /// Bias omega: a number, a fraction like 2/3, or start:stop:step.
    #[arg(long)]
    pub omega: Option<String>,
    /// Level spacing epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of walk steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for omega sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write every step's distribution to `<out>.dist.csv`.
    #[arg(long)]
    pub dump_distributions: bool,
    /// Cutoff N' = N - k sigma_ss of the approximate entropy, in units of
    /// sigma_ss.
    #[arg(long)]
    pub cutoff_sigmas: Option<f64>,
    /// `key = value` settings file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Settings {
    /// Fill unset fields from `other`.
    fn or(self, other: Settings) -> Settings {
        Settings {
            n_nodes: self.n_nodes.or(other.n_nodes),
            omega: self.omega.or(other.omega),
            epsilon: self.epsilon.or(other.epsilon),
            steps: self.steps.or(other.steps),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            jobs: self.jobs.or(other.jobs),
            dump_distributions: self.dump_distributions || other.dump_distributions,
            cutoff_sigmas: self.cutoff_sigmas.or(other.cutoff_sigmas),
            config: self.config,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(format!(
            "config key `{key}`: expected true or false, got `{value}`"
        ))),
    }
}

/// Parse the contents of a settings file.
pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut s = Settings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            invalid(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "n-nodes" => s.n_nodes = Some(parse_value(&key, value)?),
            "omega" => s.omega = Some(value.to_string()),
            "epsilon" => s.epsilon = Some(parse_number(value)?),
            "steps" => s.steps = Some(parse_value(&key, value)?),
            "format" => {
                s.format = Some(
                    Format::from_str(value, true)
                        .map_err(|_| invalid(format!("config key `format`: unknown `{value}`")))?,
                )
            }
            "out" => s.out = Some(PathBuf::from(value)),
            "jobs" => s.jobs = Some(parse_value(&key, value)?),
            "dump-distributions" => s.dump_distributions = parse_bool(&key, value)?,
            "cutoff-sigmas" => s.cutoff_sigmas = Some(parse_number(value)?),
            _ => {
                return Err(invalid(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(s)
}

fn load_settings(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_settings(&text)
}

/// A decimal number or a fraction `p/q`.
pub fn parse_number(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad number `{text}`")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad number `{text}`")))?;
            p / q
        }
        None => text
            .parse()
            .map_err(|_| invalid(format!("bad number `{text}`")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(format!("`{text}` is not a finite number")))
    }
}

/// `w` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_omegas(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [single] => vec![parse_number(single)?],
        [start, stop, step] => {
            let (start, stop, step) = (
                parse_number(start)?,
                parse_number(stop)?,
                parse_number(step)?,
            );
            if !(step > 0.0) || stop < start {
                return Err(invalid(format!(
                    "omega range `{text}` needs start <= stop and a positive step"
                )));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        _ => {
            return Err(invalid(format!(
                "omega `{text}` must be a number or start:stop:step"
            )))
        }
    };
    if let Some(bad) = values.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(invalid(format!("omega = {bad} is not a probability")));
    }
    Ok(values)
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_nodes: usize,
    pub omegas: Vec<f64>,
    pub epsilon: f64,
    pub steps: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub dump_distributions: bool,
    pub cutoff_sigmas: f64,
}

pub const DEFAULT_N_NODES: usize = 100;
pub const DEFAULT_OMEGA: &str = "2/3";
pub const DEFAULT_STEPS: usize = 3000;

impl RunConfig {
    pub fn resolve(flags: Settings) -> Result<Self> {
        let merged = match &flags.config {
            Some(path) => {
                let file = load_settings(path)?;
                flags.or(file)
            }
            None => flags,
        };
        let n_nodes = merged.n_nodes.unwrap_or(DEFAULT_N_NODES);
        if n_nodes < 2 {
            return Err(invalid(format!(
                "--n-nodes must be at least 2, got {n_nodes}"
            )));
        }
        let omegas = parse_omegas(merged.omega.as_deref().unwrap_or(DEFAULT_OMEGA))?;
        let epsilon = merged.epsilon.unwrap_or(1.0);
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!(
                "--epsilon must be positive, got {epsilon}"
            )));
        }
        if merged.jobs == Some(0) {
            return Err(invalid("--jobs must be at least 1"));
        }
        let cutoff_sigmas = merged
            .cutoff_sigmas
            .unwrap_or(oqwalk::ApproxEntropyParams::DEFAULT_CUTOFF_SIGMAS);
        if merged.dump_distributions && merged.out.is_none() {
            return Err(invalid("--dump-distributions needs --out"));
        }
        Ok(Self {
            n_nodes,
            omegas,
            epsilon,
            steps: merged.steps.unwrap_or(DEFAULT_STEPS),
            format: merged.format.unwrap_or(Format::Csv),
            out: merged.out,
            jobs: merged.jobs,
            dump_distributions: merged.dump_distributions,
            cutoff_sigmas,
        })
    }

    pub fn sweep(&self) -> bool {
        self.omegas.len() > 1
    }
}
