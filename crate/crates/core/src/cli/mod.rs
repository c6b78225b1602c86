//! Command-line harness: `solve`, `verify`, `gen` and `deps` subcommands
//! over the instance file formats, with seeded, machine-readable outputs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 instance parse error (messages carry file and line), 4 solver runtime
//! error.

mod config;
mod deps;
mod gen;
mod output;
mod solve;
mod verify_cmd;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CoreError;

pub use output::OutputFormat;

#[derive(Parser)]
#[command(
    name = "tandem",
    version,
    about = "Metaheuristics for combinatorial problems with interdependent components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed; repetition r runs with seed + r.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for trajectory, summary and metadata files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for repeated runs (0 = auto).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file format for trajectories and summaries.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search strategy on an instance file, with repetitions.
    Solve(solve::SolveArgs),
    /// Run the desk-scale oracle and property suite.
    Verify(verify_cmd::VerifyArgs),
    /// Generate a random instance file.
    Gen(gen::GenArgs),
    /// Run the empirical dependency detector on a pair of components.
    Deps(deps::DepsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for OutputFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::Jsonl,
        }
    }
}

/// Everything that can go wrong behind an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, unreadable inputs: exit 2.
    Config(String),
    /// Unparseable instance content: exit 3.
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },
    /// A solver failed at runtime: exit 4.
    Runtime(String),
    /// The verification suite reported failures: exit 1.
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Config(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "configuration error: {message}"),
            CliError::Parse {
                file,
                line,
                message,
            } => write!(f, "parse error: {}:{line}: {message}", file.display()),
            CliError::Runtime(message) => write!(f, "solver error: {message}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidConfig(_)
            | CoreError::InvalidSchedule(_)
            | CoreError::UnboundedStop
            | CoreError::TooFewSamples { .. } => CliError::Config(err.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Parse the process arguments, dispatch, and return the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let globals = Globals {
        seed: cli.seed,
        out_dir: cli.out_dir,
        threads: cli.threads,
        format: cli.format.map(OutputFormat::from),
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve::run(args, &globals),
        Command::Verify(args) => verify_cmd::run(args, &globals),
        Command::Gen(args) => gen::run(args, &globals),
        Command::Deps(args) => deps::run(args, &globals),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            if !matches!(err, CliError::VerificationFailed) {
                eprintln!("{err}");
            }
            err.exit_code()
        }
    }
}

/// Values of the global flags, merged into each subcommand.
pub(crate) struct Globals {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Option<OutputFormat>,
}

pub(crate) fn read_instance(
    path: &PathBuf,
    kind: crate::driver::ProblemKind,
) -> Result<crate::driver::LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    crate::driver::LoadedProblem::parse(kind, &text).map_err(|failure| CliError::Parse {
        file: path.clone(),
        line: failure.line,
        message: failure.message,
    })
}
