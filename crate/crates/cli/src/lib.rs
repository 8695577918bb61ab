//! Library surface of the `pathint` command-line tool; `main` is a thin
//! wrapper so integration tests can drive the same code paths.

pub mod config;
pub mod manifest;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind, OutputFormat};

/// Failure classes mapped to exit codes: config errors exit 2, violated
/// engine guards exit 3, a failed validation suite exits 4, anything else
/// (I/O and internal faults) exits 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
    SuiteFailed,
    Io(std::io::Error),
    Internal(String),
}

impl CliError {
    pub fn guard(err: pathint_core::Error) -> Self {
        Self::Guard(err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Guard(_) => 3,
            Self::SuiteFailed => 4,
            Self::Io(_) | Self::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "config error: {msg}"),
            Self::Guard(msg) => write!(f, "guard violation: {msg}"),
            Self::SuiteFailed => write!(f, "validation suite failed"),
            Self::Io(err) => write!(f, "i/o error: {err}"),
            Self::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::Io(err)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pathint",
    version,
    about = "Lattice path-integral propagation in one dimension"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial state with the kernel engine and/or the
    /// Crank-Nicolson solver.
    Propagate(RunArgs),
    /// Compute a double-slit screen pattern.
    Doubleslit(RunArgs),
    /// Run the full validation suite.
    Validate(RunArgs),
    /// Stationarity exponent and lattice-phase check at a classical path.
    ClassicalLimit(RunArgs),
    /// Maupertuis/Hamilton identity and Euler-Lagrange residual sweep.
    ActionCheck(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// JSON experiment configuration; built-in defaults are used when
    /// omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for data files and the run manifest.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config's output format (csv or json).
    #[arg(long)]
    pub format: Option<CliFormat>,
    /// Reserved; recorded in the manifest, nothing stochastic uses it yet.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum CliFormat {
    Csv,
    Json,
}

impl From<CliFormat> for OutputFormat {
    fn from(f: CliFormat) -> Self {
        match f {
            CliFormat::Csv => OutputFormat::Csv,
            CliFormat::Json => OutputFormat::Json,
        }
    }
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Propagate(_) => ExperimentKind::Propagate,
            Self::Doubleslit(_) => ExperimentKind::Doubleslit,
            Self::Validate(_) => ExperimentKind::Validate,
            Self::ClassicalLimit(_) => ExperimentKind::ClassicalLimit,
            Self::ActionCheck(_) => ExperimentKind::ActionCheck,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Self::Propagate(args)
            | Self::Doubleslit(args)
            | Self::Validate(args)
            | Self::ClassicalLimit(args)
            | Self::ActionCheck(args) => args,
        }
    }
}

/// Load the configuration for a subcommand, or build the documented
/// defaults when no file is given. The config's `experiment` field must
/// agree with the subcommand.
pub fn load_config(
    kind: ExperimentKind,
    path: Option<&std::path::Path>,
) -> Result<ExperimentConfig, CliError> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::defaults_for(kind));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    if config.experiment != kind {
        return Err(CliError::Config(format!(
            "config is for experiment '{}' but the subcommand is '{kind}'",
            config.experiment
        )));
    }
    Ok(config)
}

/// Parse-and-run entry used by `main` and by the CLI tests.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    let kind = cli.command.kind();
    let args = cli.command.args();
    let config = load_config(kind, args.config.as_deref())?;
    let outcome = run::run(&config, &args.out, args.format.map(Into::into), args.seed)?;
    if outcome.suite_failed {
        return Err(CliError::SuiteFailed);
    }
    Ok(())
}
