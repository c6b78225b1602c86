//! The `solve` subcommand: repetitions of one seeded algorithm on one
//! instance, written out as trajectories plus a summary.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;

use crate::cli::config::{self, AlgorithmInputs, FileConfig};
use crate::cli::{output, CliError, Globals};
use crate::driver::{run_algorithm, AlgorithmSpec};
use crate::error::CoreError;
use crate::problem::CompositeProblem;
use crate::result::RunResult;
use crate::stop::StopCondition;

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file.
    #[arg(long)]
    problem: Option<PathBuf>,

    /// Problem family of the instance file.
    #[arg(long)]
    kind: Option<String>,

    /// Search strategy: jls | ils | sa | cosolver | ea.
    #[arg(long)]
    algo: Option<String>,

    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of repetitions, seeded seed, seed+1, ...
    #[arg(long)]
    reps: Option<u32>,

    /// Stop: objective evaluation budget.
    #[arg(long)]
    max_evals: Option<u64>,

    /// Stop: wall-clock limit in seconds.
    #[arg(long)]
    max_seconds: Option<f64>,

    /// Stop: passes without improvement.
    #[arg(long)]
    max_stale: Option<u64>,

    /// Stop: objective value to reach.
    #[arg(long)]
    target: Option<f64>,

    /// Local search acceptance policy (jls, ils).
    #[arg(long)]
    policy: Option<String>,

    /// Perturbation strength: comma-separated per-component move counts (ils).
    #[arg(long)]
    strength: Option<String>,

    /// Initial temperature (sa).
    #[arg(long)]
    temp0: Option<f64>,

    /// Cooling factor per step (sa).
    #[arg(long)]
    cooling: Option<f64>,

    /// Proposals per cooling step (sa).
    #[arg(long)]
    step_length: Option<u32>,

    /// Sub-solver mode: descent | exact (cosolver).
    #[arg(long)]
    mode: Option<String>,

    /// Apply genetic operators when the sub-solver loop reaches a fixed
    /// point, instead of stopping there (cosolver).
    #[arg(long)]
    genetic_perturbation: Option<bool>,

    /// Population size (ea).
    #[arg(long)]
    population: Option<usize>,

    /// Tournament size (ea).
    #[arg(long)]
    tournament: Option<usize>,

    /// Crossover rate in [0, 1] (ea).
    #[arg(long)]
    crossover_rate: Option<f64>,

    /// Mutation rate in [0, 1] (ea).
    #[arg(long)]
    mutation_rate: Option<f64>,

    /// Elites copied per generation (ea).
    #[arg(long)]
    elitism: Option<usize>,

    /// Memetic hook: none | jls | cosolver (ea).
    #[arg(long)]
    memetic: Option<String>,

    /// Evaluation budget per memetic application (ea).
    #[arg(long)]
    memetic_budget: Option<u64>,

    /// Probability of applying the memetic hook to an offspring (ea).
    #[arg(long)]
    memetic_probability: Option<f64>,

    /// Generation cap (ea).
    #[arg(long)]
    generations: Option<u64>,
}

pub fn run(args: SolveArgs, globals: &Globals) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => config::load_file(path)?,
        None => FileConfig::default(),
    };

    let problem_path = args
        .problem
        .or(file.problem)
        .ok_or_else(|| CliError::Config("missing --problem".into()))?;
    let kind_name = args
        .kind
        .or(file.kind)
        .ok_or_else(|| CliError::Config("missing --kind".into()))?;
    let algo_name = args
        .algo
        .or(file.algorithm)
        .ok_or_else(|| CliError::Config("missing --algo".into()))?;
    let kind = config::parse_kind(&kind_name)?;

    let seed = globals.seed.or(file.seed).unwrap_or(0);
    let reps = args.reps.or(file.repetitions).unwrap_or(1);
    if reps == 0 {
        return Err(CliError::Config("repetitions must be at least 1".into()));
    }
    let out_dir = globals
        .out_dir
        .clone()
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("tandem-out"));
    let threads = globals.threads.or(file.threads).unwrap_or(0);
    let format = match (globals.format, file.format.as_deref()) {
        (Some(format), _) => format,
        (None, Some("csv")) => output::OutputFormat::Csv,
        (None, Some("jsonl")) => output::OutputFormat::Jsonl,
        (None, Some(other)) => {
            return Err(CliError::Config(format!(
                "unknown format {other:?} (csv | jsonl)"
            )))
        }
        (None, None) => output::OutputFormat::Csv,
    };

    let stop = config::build_stop(
        args.max_evals.or(file.stop.max_evaluations),
        args.max_seconds.or(file.stop.max_seconds),
        args.max_stale.or(file.stop.max_stale_passes),
        args.target.or(file.stop.target_value),
    )?;

    let strength = match &args.strength {
        Some(value) => Some(config::parse_strength(value)?),
        None => file.ils.strength.clone(),
    };
    let inputs = AlgorithmInputs {
        policy: args.policy.or(file.jls.policy).or(file.ils.policy),
        strength,
        initial_temperature: args.temp0.or(file.sa.initial_temperature),
        cooling_factor: args.cooling.or(file.sa.cooling_factor),
        step_length: args.step_length.or(file.sa.step_length),
        mode: args.mode.or(file.cosolver.mode),
        genetic_perturbation: args
            .genetic_perturbation
            .or(file.cosolver.genetic_perturbation),
        population_size: args.population.or(file.ea.population_size),
        tournament_size: args.tournament.or(file.ea.tournament_size),
        crossover_rate: args.crossover_rate.or(file.ea.crossover_rate),
        mutation_rate: args.mutation_rate.or(file.ea.mutation_rate),
        elitism_count: args.elitism.or(file.ea.elitism_count),
        memetic: args.memetic.or(file.ea.memetic),
        memetic_budget: args.memetic_budget.or(file.ea.memetic_budget),
        memetic_probability: args.memetic_probability.or(file.ea.memetic_probability),
        generations: args.generations.or(file.ea.generations),
    };
    let spec = config::build_algorithm(&algo_name, &inputs)?;

    let loaded = crate::cli::read_instance(&problem_path, kind)?;
    let problem = loaded.to_composite();

    let runs = run_many(&problem, &spec, &stop, seed, reps, threads)?;
    let summary_path =
        output::write_run_artifacts(&out_dir, format, &runs, problem.orientation(), "solve")?;
    output::print_summary_table(&runs, problem.orientation());
    println!("wrote {}", summary_path.display());
    Ok(())
}

/// Execute `reps` independent seeded runs, optionally on worker threads.
/// Results come back in run order regardless of scheduling.
fn run_many(
    problem: &CompositeProblem,
    spec: &AlgorithmSpec,
    stop: &StopCondition,
    seed: u64,
    reps: u32,
    threads: usize,
) -> Result<Vec<RunResult>, CliError> {
    let workers = if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    };
    let workers = workers.clamp(1, reps as usize);
    if workers == 1 {
        return (0..reps)
            .map(|index| {
                run_algorithm(problem, spec, stop, seed + u64::from(index))
                    .map_err(CliError::from)
            })
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunResult, CoreError>>>> =
        (0..reps).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= reps as usize {
                    break;
                }
                let result = run_algorithm(problem, spec, stop, seed + index as u64);
                *slots[index].lock().expect("slot lock") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("slot lock")
                .expect("every slot was filled")
                .map_err(CliError::from)
        })
        .collect()
}
