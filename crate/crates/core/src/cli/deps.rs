//! The `deps` subcommand: run the empirical dependency detector on one
//! ordered component pair and print the verdict with its witness.

use std::path::PathBuf;

use clap::Args;

use crate::cli::{read_instance, CliError, Globals};
use crate::detect::{detect_dependency_with, DependenceCriterion, DetectorConfig};

#[derive(Args)]
pub struct DepsArgs {
    /// Instance file.
    #[arg(long)]
    problem: PathBuf,

    /// Problem family of the instance file.
    #[arg(long)]
    kind: String,

    /// Component id whose solution is varied.
    #[arg(long)]
    dependee: String,

    /// Component id whose conditional optima are inspected.
    #[arg(long)]
    dependent: String,

    /// Distinct dependee solutions to sample.
    #[arg(long, default_value_t = 4)]
    samples: usize,

    /// Disagreement criterion: set (optimizer sets) | value (optimal values).
    #[arg(long, default_value = "set")]
    criterion: String,

    /// Enumeration cap per space.
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
}

pub fn run(args: DepsArgs, globals: &Globals) -> Result<(), CliError> {
    let kind = args.kind.parse().map_err(CliError::Config)?;
    let loaded = read_instance(&args.problem, kind)?;
    let problem = loaded.to_composite();
    let dependee = problem
        .component_index(&args.dependee)
        .ok_or_else(|| CliError::Config(format!("unknown component {:?}", args.dependee)))?;
    let dependent = problem
        .component_index(&args.dependent)
        .ok_or_else(|| CliError::Config(format!("unknown component {:?}", args.dependent)))?;
    let criterion = match args.criterion.as_str() {
        "set" => DependenceCriterion::OptimizerSet,
        "value" => DependenceCriterion::OptimalValue,
        other => {
            return Err(CliError::Config(format!(
                "unknown criterion {other:?} (set | value)"
            )))
        }
    };
    let config = DetectorConfig {
        sample_count: args.samples,
        seed: globals.seed.unwrap_or(0),
        enumeration_cap: args.cap,
        criterion,
        tie_tolerance: 0.0,
    };
    let verdict = detect_dependency_with(&problem, dependee, dependent, &config)?;
    println!(
        "{} <- {}: {}",
        args.dependent,
        args.dependee,
        if verdict.dependent {
            "DEPENDENT"
        } else {
            "independent"
        }
    );
    println!("samples used: {}", verdict.samples_used);
    if let Some(witness) = &verdict.witness {
        println!("witness:");
        println!("  dependee A: {:?}", witness.dependee_a);
        println!("  dependee B: {:?}", witness.dependee_b);
        println!(
            "  conditional optima: {} part(s) at value {} vs {} part(s) at value {}",
            witness.optima_a.len(),
            witness.value_a,
            witness.optima_b.len(),
            witness.value_b
        );
    }
    Ok(())
}
