use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use netepi::{Bracket, ModelKind, SirStart};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "netepi", version, about = "SI, SIS and SIR epidemics on weighted digraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a network model and write the trajectory.
    Simulate(RunArgs),
    /// SIS endemic state by monotone fixed-point iteration.
    Endemic(RunArgs),
    /// SIR asymptotic state by fixed-point iteration.
    Asymptotic(RunArgs),
    /// Basic reproduction number, optional R(t) series and gamma sweeps.
    Threshold(RunArgs),
    /// Closed forms of the single-population models.
    Scalar(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Endemic(a)
            | Command::Asymptotic(a)
            | Command::Threshold(a)
            | Command::Scalar(a) => a,
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Simulate(_) | Command::Scalar(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketArg {
    Lower,
    Upper,
}

impl From<BracketArg> for Bracket {
    fn from(b: BracketArg) -> Self {
        match b {
            BracketArg::Lower => Bracket::Lower,
            BracketArg::Upper => Bracket::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartArg {
    Zero,
    Upper,
}

impl From<StartArg> for SirStart {
    fn from(s: StartArg) -> Self {
        match s {
            StartArg::Zero => SirStart::Zero,
            StartArg::Upper => SirStart::Upper,
        }
    }
}

/// Every option of every command. Fields left unset on the command line are
/// taken from `--config` when it supplies them.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunArgs {
    /// JSON file with default values for any of the options below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Contact graph: edge list ("i j w" lines) or JSON array of rows.
    #[arg(long, help_heading = "Model")]
    pub graph: Option<PathBuf>,
    /// SI, SIS or SIR.
    #[arg(long, help_heading = "Model")]
    pub model: Option<ModelKind>,
    #[arg(long, help_heading = "Model")]
    pub beta: Option<f64>,
    #[arg(long, help_heading = "Model")]
    pub gamma: Option<f64>,

    /// Same infected fraction at every node.
    #[arg(long, help_heading = "Initial state")]
    pub x0_uniform: Option<f64>,
    /// Fully infect this node (1-based), everyone else susceptible.
    #[arg(long, help_heading = "Initial state")]
    pub seed_node: Option<usize>,
    /// Per-node infected fractions (whitespace or comma separated, or JSON).
    #[arg(long, help_heading = "Initial state")]
    pub x0_file: Option<PathBuf>,
    /// Per-node recovered fractions for SIR.
    #[arg(long, help_heading = "Initial state")]
    pub r0_file: Option<PathBuf>,

    #[arg(long, help_heading = "Integration")]
    pub t_end: Option<f64>,
    /// Step size [default: 1e-3 / max(beta, gamma)].
    #[arg(long, help_heading = "Integration")]
    pub dt: Option<f64>,
    /// Keep every k-th step in the output.
    #[arg(long, help_heading = "Integration")]
    pub stride: Option<usize>,
    /// Stop once the derivative sup-norm drops below this value.
    #[arg(long, help_heading = "Integration")]
    pub steady_tol: Option<f64>,

    /// Fixed-point tolerance.
    #[arg(long, help_heading = "Fixed point")]
    pub tol: Option<f64>,
    #[arg(long, help_heading = "Fixed point")]
    pub max_iter: Option<usize>,
    /// Starting side for the endemic iteration.
    #[arg(long, value_enum, help_heading = "Fixed point")]
    pub bracket: Option<BracketArg>,
    /// Starting point for the SIR iteration.
    #[arg(long, value_enum, help_heading = "Fixed point")]
    pub start: Option<StartArg>,

    /// SIR trajectory CSV (as written by `simulate`) for the R(t) series.
    #[arg(long, help_heading = "Threshold")]
    pub trajectory: Option<PathBuf>,
    /// Where to write the R(t) series.
    #[arg(long, help_heading = "Threshold")]
    pub series_out: Option<PathBuf>,
    /// Recovery rates to sweep; one SIR run per value.
    #[arg(long, value_delimiter = ',', help_heading = "Threshold")]
    pub gamma_sweep: Option<Vec<f64>>,

    #[arg(long, help_heading = "Scalar")]
    pub x0: Option<f64>,
    #[arg(long, help_heading = "Scalar")]
    pub s0: Option<f64>,
    /// Initial recovered fraction.
    #[arg(long, help_heading = "Scalar")]
    pub r0: Option<f64>,

    /// Output file [default: standard output].
    #[arg(long, help_heading = "Output")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, help_heading = "Output")]
    pub format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long, help_heading = "Output")]
    pub jobs: Option<usize>,
}

impl RunArgs {
    /// Fills unset fields from the config file, if any.
    pub fn resolve(&self) -> Result<RunArgs, CliError> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let text = read_config(path)?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let Value::Object(file) = file else {
            return Err(CliError::config(format!("{}: expected a JSON object", path.display())));
        };
        let Value::Object(mut merged) = serde_json::to_value(self).expect("arguments serialize") else {
            unreachable!("RunArgs serializes to an object");
        };
        for (key, value) in file {
            match merged.get(&key) {
                Some(Value::Null) => {
                    merged.insert(key, value);
                }
                Some(_) => {}
                None => return Err(CliError::config(format!("{}: unknown option `{key}`", path.display()))),
            }
        }
        let mut resolved: RunArgs = serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        resolved.config = self.config.clone();
        Ok(resolved)
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Unwraps a required option or fails with a config error naming the flag.
pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::config(format!("missing required option --{flag}")))
}
