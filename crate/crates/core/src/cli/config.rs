//! Solve-run configuration: strict TOML config files merged under
//! command-line flags (flags win). Unknown keys anywhere are errors.

use std::path::PathBuf;
use std::time::Duration;

use serde::Deserialize;

use crate::cli::CliError;
use crate::cosolver::SubSolverMode;
use crate::driver::{AlgorithmSpec, EaParams, ProblemKind};
use crate::evolution::MemeticHook;
use crate::search::{AnnealingSchedule, LocalSearchPolicy};
use crate::stop::StopCondition;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<PathBuf>,
    pub kind: Option<String>,
    pub algorithm: Option<String>,
    pub seed: Option<u64>,
    pub repetitions: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Option<String>,
    #[serde(default)]
    pub stop: FileStop,
    #[serde(default)]
    pub jls: FileJls,
    #[serde(default)]
    pub ils: FileIls,
    #[serde(default)]
    pub sa: FileSa,
    #[serde(default)]
    pub cosolver: FileCosolver,
    #[serde(default)]
    pub ea: FileEa,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileStop {
    pub max_evaluations: Option<u64>,
    pub max_seconds: Option<f64>,
    pub max_stale_passes: Option<u64>,
    pub target_value: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileJls {
    pub policy: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileIls {
    pub strength: Option<Vec<usize>>,
    pub policy: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSa {
    pub initial_temperature: Option<f64>,
    pub cooling_factor: Option<f64>,
    pub step_length: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCosolver {
    pub mode: Option<String>,
    pub genetic_perturbation: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEa {
    pub population_size: Option<usize>,
    pub tournament_size: Option<usize>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub elitism_count: Option<usize>,
    pub memetic: Option<String>,
    pub memetic_budget: Option<u64>,
    pub memetic_probability: Option<f64>,
    pub generations: Option<u64>,
}

pub fn load_file(path: &PathBuf) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

pub fn parse_kind(value: &str) -> Result<ProblemKind, CliError> {
    value.parse().map_err(CliError::Config)
}

pub fn parse_policy(value: &str) -> Result<LocalSearchPolicy, CliError> {
    match value {
        "first-improvement-restart" => Ok(LocalSearchPolicy::FirstImprovementRestart),
        "best-improvement-pass" => Ok(LocalSearchPolicy::BestImprovementPass),
        "paper-literal" => Ok(LocalSearchPolicy::PaperLiteral),
        other => Err(CliError::Config(format!(
            "unknown policy {other:?} (first-improvement-restart | best-improvement-pass | paper-literal)"
        ))),
    }
}

pub fn parse_mode(value: &str) -> Result<SubSolverMode, CliError> {
    match value {
        "descent" => Ok(SubSolverMode::Descent),
        "exact" => Ok(SubSolverMode::Exact),
        other => Err(CliError::Config(format!(
            "unknown sub-solver mode {other:?} (descent | exact)"
        ))),
    }
}

/// Comma-separated per-component move counts; one value broadcasts.
pub fn parse_strength(value: &str) -> Result<Vec<usize>, CliError> {
    let parsed: Result<Vec<usize>, _> = value.split(',').map(|v| v.trim().parse()).collect();
    let counts =
        parsed.map_err(|_| CliError::Config(format!("bad perturbation strength {value:?}")))?;
    if counts.is_empty() {
        return Err(CliError::Config("empty perturbation strength".into()));
    }
    Ok(counts)
}

/// Assemble the stop condition from merged fields; defaults to one stale
/// pass plus the million-evaluation safety cap when nothing is given.
pub fn build_stop(
    max_evaluations: Option<u64>,
    max_seconds: Option<f64>,
    max_stale_passes: Option<u64>,
    target_value: Option<f64>,
) -> Result<StopCondition, CliError> {
    if max_evaluations.is_none()
        && max_seconds.is_none()
        && max_stale_passes.is_none()
        && target_value.is_none()
    {
        return Ok(StopCondition::default());
    }
    let mut stop = StopCondition::none();
    stop.max_evaluations = max_evaluations;
    stop.max_stale_passes = max_stale_passes;
    stop.target_value = target_value;
    if let Some(seconds) = max_seconds {
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err(CliError::Config(format!(
                "max seconds must be positive, got {seconds}"
            )));
        }
        stop.max_wall_time = Some(Duration::from_secs_f64(seconds));
    }
    Ok(stop)
}

pub struct AlgorithmInputs {
    pub policy: Option<String>,
    pub strength: Option<Vec<usize>>,
    pub initial_temperature: Option<f64>,
    pub cooling_factor: Option<f64>,
    pub step_length: Option<u32>,
    pub mode: Option<String>,
    pub genetic_perturbation: Option<bool>,
    pub population_size: Option<usize>,
    pub tournament_size: Option<usize>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub elitism_count: Option<usize>,
    pub memetic: Option<String>,
    pub memetic_budget: Option<u64>,
    pub memetic_probability: Option<f64>,
    pub generations: Option<u64>,
}

/// Build the algorithm spec for `name` from the merged parameters, filling
/// gaps with the library defaults.
pub fn build_algorithm(name: &str, inputs: &AlgorithmInputs) -> Result<AlgorithmSpec, CliError> {
    match name {
        "jls" => {
            let policy = match &inputs.policy {
                Some(value) => parse_policy(value)?,
                None => LocalSearchPolicy::FirstImprovementRestart,
            };
            Ok(AlgorithmSpec::JointLocalSearch { policy })
        }
        "ils" => {
            let policy = match &inputs.policy {
                Some(value) => parse_policy(value)?,
                None => LocalSearchPolicy::FirstImprovementRestart,
            };
            let strength = inputs.strength.clone().unwrap_or_else(|| vec![1]);
            Ok(AlgorithmSpec::IteratedLocalSearch { strength, policy })
        }
        "sa" => {
            let schedule = AnnealingSchedule::new(
                inputs.initial_temperature.unwrap_or(10.0),
                inputs.cooling_factor.unwrap_or(0.95),
                inputs.step_length.unwrap_or(100),
            );
            schedule.validate().map_err(CliError::from)?;
            Ok(AlgorithmSpec::SimulatedAnnealing { schedule })
        }
        "cosolver" => {
            let mode = match &inputs.mode {
                Some(value) => parse_mode(value)?,
                None => SubSolverMode::Descent,
            };
            Ok(AlgorithmSpec::Cosolver {
                mode,
                genetic_perturbation: inputs.genetic_perturbation.unwrap_or(false),
            })
        }
        "ea" => {
            let defaults = EaParams::default();
            let memetic = match inputs.memetic.as_deref() {
                None | Some("none") => MemeticHook::None,
                Some("jls") => MemeticHook::JointLocalSearch {
                    budget: inputs.memetic_budget.unwrap_or(200),
                    probability: inputs.memetic_probability.unwrap_or(0.25),
                },
                Some("cosolver") => MemeticHook::Cosolver {
                    budget: inputs.memetic_budget.unwrap_or(200),
                    probability: inputs.memetic_probability.unwrap_or(0.25),
                },
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "unknown memetic hook {other:?} (none | jls | cosolver)"
                    )))
                }
            };
            Ok(AlgorithmSpec::Evolutionary(EaParams {
                population_size: inputs.population_size.unwrap_or(defaults.population_size),
                tournament_size: inputs.tournament_size.unwrap_or(defaults.tournament_size),
                crossover_rate: inputs.crossover_rate.unwrap_or(defaults.crossover_rate),
                mutation_rate: inputs.mutation_rate.unwrap_or(defaults.mutation_rate),
                elitism_count: inputs.elitism_count.unwrap_or(defaults.elitism_count),
                memetic,
                generations: inputs.generations,
            }))
        }
        other => Err(CliError::Config(format!(
            "unknown algorithm {other:?} (jls | ils | sa | cosolver | ea)"
        ))),
    }
}
