//! The `verify` subcommand: run the desk-scale oracle and property suite
//! and print one PASS/FAIL/SKIP line per property.

use clap::Args;

use crate::cli::{CliError, Globals};
use crate::verify::{run_verification, PropertyOutcome, VerifyConfig, VerifyKind};

#[derive(Args)]
pub struct VerifyArgs {
    /// Limit the suite to one problem family: ttp | killersudoku | all.
    #[arg(long, default_value = "all")]
    kind: String,

    /// Enumeration budget; properties needing more are skipped.
    #[arg(long, default_value_t = 1_000_000)]
    scale_cap: u64,
}

pub fn run(args: VerifyArgs, globals: &Globals) -> Result<(), CliError> {
    let kind = match args.kind.as_str() {
        "ttp" => VerifyKind::Ttp,
        "killersudoku" => VerifyKind::KillerSudoku,
        "all" => VerifyKind::All,
        other => {
            return Err(CliError::Config(format!(
                "unknown kind {other:?} (ttp | killersudoku | all)"
            )))
        }
    };
    let seed = globals.seed.unwrap_or(0);
    let config = VerifyConfig {
        kind,
        scale_cap: args.scale_cap,
        seed,
    };
    let reports = run_verification(&config);
    let mut passed = 0;
    let mut failed = 0;
    let mut skipped = 0;
    for report in &reports {
        match &report.outcome {
            PropertyOutcome::Passed => {
                passed += 1;
                println!("PASS {}", report.name);
            }
            PropertyOutcome::Failed(detail) => {
                failed += 1;
                println!("FAIL {}: {detail} (replay with --seed {seed})", report.name);
            }
            PropertyOutcome::Skipped(reason) => {
                skipped += 1;
                println!("SKIP {}: {reason}", report.name);
            }
        }
    }
    println!("{passed} passed, {failed} failed, {skipped} skipped");
    if failed > 0 {
        return Err(CliError::VerificationFailed);
    }
    Ok(())
}
