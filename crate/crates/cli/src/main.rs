//! `lzbec` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or parameter error,
//! 3 numerical failure.

mod commands;
mod figures;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use settings::{ConfigFile, CrossingArgs, ModelArgs, OutArgs, SolverArgs, SourceArg};

#[derive(Parser, Debug)]
#[command(name = "lzbec", version, about = "Landau-Zener sweeps of a two-mode Bose-Einstein condensate")]
pub struct Cli {
    /// Read defaults from a `key = value` file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for grid scans and figures
    #[arg(long, global = true, env = "LZBEC_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    Meanfield,
    Manybody,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Propagate one sweep and print the sampled populations
    Sim {
        #[arg(value_enum)]
        kind: SimKind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Many-particle eigenvalues on a grid of biases
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Single bias
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["eps_min", "eps_max"])]
        eps: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "eps_max")]
        eps_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "eps_min")]
        eps_max: Option<f64>,
        /// Grid points between --eps-min and --eps-max
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Avoided-crossing splittings of the initial level
    Splittings {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        crossing: CrossingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Independent crossing approximation
    Ica {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        crossing: CrossingArgs,
        /// Origin of the splittings
        #[arg(long, value_enum)]
        source: Option<SourceArg>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Macroscopic-limit closed form
    Formula {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        crossing: CrossingArgs,
    },
    /// Write the data series behind one of the figures
    Figure {
        /// Figure number, 1 to 7
        id: u32,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Override the particle number where it is not structural
        #[arg(long)]
        n: Option<usize>,
        /// Override the number of grid points
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        crossing: CrossingArgs,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Required setting absent; reported with usage text.
    Missing(String),
    Usage(String),
    Model(lzbec::Error),
    /// Some outputs were written but at least one computation failed.
    Numeric(String),
    Io(String),
}

impl From<lzbec::Error> for CliError {
    fn from(e: lzbec::Error) -> Self {
        Self::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            Self::Missing(flag) => {
                let err = Cli::command().error(
                    clap::error::ErrorKind::MissingRequiredArgument,
                    format!("missing required setting {flag}"),
                );
                let _ = err.print();
                ExitCode::from(2)
            }
            Self::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Self::Model(e) => {
                eprintln!("error: {e}");
                match e {
                    lzbec::Error::InvalidParameter(_) | lzbec::Error::IndexOutOfRange { .. } => {
                        ExitCode::from(2)
                    }
                    _ => ExitCode::from(3),
                }
            }
            Self::Numeric(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
            Self::Io(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Sim { kind, mut model, mut solver, mut out } => {
            model.merge(&config)?;
            solver.merge(&config)?;
            out.merge(&config)?;
            commands::sim(kind, &model, &solver, &out)
        }
        Command::Spectrum { mut model, eps, eps_min, eps_max, steps, mut out } => {
            model.merge(&config)?;
            out.merge(&config)?;
            let grid = match (eps, eps_min, eps_max) {
                (Some(e), _, _) => vec![e],
                (None, Some(lo), Some(hi)) => output::linspace(lo, hi, steps)?,
                _ => return Err(CliError::Missing("--eps or --eps-min/--eps-max".into())),
            };
            commands::spectrum(&model, &grid, &out)
        }
        Command::Splittings { mut model, mut crossing, mut out } => {
            model.merge(&config)?;
            crossing.merge(&config)?;
            out.merge(&config)?;
            commands::splittings(&model, &crossing, &out)
        }
        Command::Ica { mut model, mut crossing, source, mut out } => {
            model.merge(&config)?;
            crossing.merge(&config)?;
            out.merge(&config)?;
            let source = match source {
                Some(s) => s,
                None => config_source(&config)?,
            };
            commands::ica(&model, &crossing, source, &out)
        }
        Command::Formula { mut model, mut crossing } => {
            model.merge(&config)?;
            crossing.merge(&config)?;
            commands::formula(&model, &crossing)
        }
        Command::Figure { id, out, n, points, mut solver, mut crossing } => {
            solver.merge(&config)?;
            crossing.merge(&config)?;
            let request = figures::Request { id, n, points, solver, crossing };
            figures::write_figure(&request, &out)
        }
    }
}

fn config_source(config: &ConfigFile) -> Result<SourceArg, CliError> {
    let mut slot = None;
    config.fill_source(&mut slot)?;
    Ok(slot.unwrap_or(SourceArg::Exact))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
