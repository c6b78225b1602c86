//! The `gen` subcommand: write a seeded random instance file that parses
//! back to the identical instance.

use std::path::PathBuf;

use clap::Args;

use crate::cli::{CliError, Globals};
use crate::driver::{LoadedProblem, ProblemKind};
use crate::problems::{killersudoku, ttp};

#[derive(Args)]
pub struct GenArgs {
    /// Problem family to generate: ttp | killersudoku.
    #[arg(long)]
    kind: String,

    /// Output file path.
    #[arg(long)]
    out: PathBuf,

    /// Number of cities (ttp).
    #[arg(long)]
    cities: Option<usize>,

    /// Number of items (ttp).
    #[arg(long)]
    items: Option<usize>,

    /// Knapsack capacity as a fraction of total item weight (ttp).
    #[arg(long)]
    capacity_fraction: Option<f64>,

    /// Renting rate (ttp).
    #[arg(long)]
    renting_rate: Option<f64>,

    /// Box size b; the grid is b^2 x b^2 (killersudoku).
    #[arg(long)]
    box_size: Option<usize>,

    /// Largest cage, in cells (killersudoku).
    #[arg(long)]
    max_cage_size: Option<usize>,
}

pub fn run(args: GenArgs, globals: &Globals) -> Result<(), CliError> {
    let seed = globals.seed.unwrap_or(0);
    let kind: ProblemKind = args.kind.parse().map_err(CliError::Config)?;
    let text = match kind {
        ProblemKind::Ttp => {
            let mut config = ttp::TtpGenConfig::new(
                args.cities.unwrap_or(6),
                args.items.unwrap_or(4),
                seed,
            );
            if let Some(fraction) = args.capacity_fraction {
                config.capacity_fraction = fraction;
            }
            if let Some(rate) = args.renting_rate {
                config.renting_rate = rate;
            }
            let instance =
                ttp::generate(&config).map_err(|e| CliError::Config(e.to_string()))?;
            instance.to_file_string()
        }
        ProblemKind::KillerSudoku => {
            let box_size = args.box_size.unwrap_or(2);
            let max_cage_size = args.max_cage_size.unwrap_or(3);
            let (instance, _) = killersudoku::generate(box_size, seed, max_cage_size)
                .map_err(|e| CliError::Config(e.to_string()))?;
            instance.to_file_string()
        }
    };
    // The generated file must parse back to the identical instance.
    let reparsed = LoadedProblem::parse(kind, &text).map_err(|failure| {
        CliError::Runtime(format!("generated instance does not re-parse: {failure}"))
    })?;
    if reparsed.serialize() != text {
        return Err(CliError::Runtime(
            "generated instance does not round-trip".into(),
        ));
    }
    std::fs::write(&args.out, &text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", args.out.display())))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
