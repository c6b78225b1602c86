//! Problem loading and algorithm dispatch shared by the command-line
//! harness and the C API.

use std::str::FromStr;

use crate::cosolver::{cosolver_with, CosolverConfig, SubSolver, SubSolverMode};
use crate::error::CoreError;
use crate::evolution::{evolve, EaConfig, MemeticHook};
use crate::problem::{initial_solution, CompositeProblem};
use crate::problems::{killersudoku, ttp};
use crate::result::RunResult;
use crate::search::{
    iterated_local_search, joint_local_search, simulated_annealing, AnnealingSchedule,
    LocalSearchPolicy, PerturbationStrength,
};
use crate::stop::StopCondition;

/// The problem families the harness can load.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Ttp,
    KillerSudoku,
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ttp" => Ok(ProblemKind::Ttp),
            "killersudoku" => Ok(ProblemKind::KillerSudoku),
            other => Err(format!("unknown problem kind {other:?} (ttp | killersudoku)")),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::Ttp => write!(f, "ttp"),
            ProblemKind::KillerSudoku => write!(f, "killersudoku"),
        }
    }
}

/// Instance-file parse failure with its 1-based line number.
#[derive(Debug)]
pub struct ParseFailure {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseFailure {}

/// A parsed instance of either family.
#[derive(Clone, Debug)]
pub enum LoadedProblem {
    Ttp(ttp::TtpInstance),
    KillerSudoku(killersudoku::KillerSudokuInstance),
}

impl LoadedProblem {
    pub fn parse(kind: ProblemKind, text: &str) -> Result<Self, ParseFailure> {
        match kind {
            ProblemKind::Ttp => ttp::TtpInstance::parse(text)
                .map(LoadedProblem::Ttp)
                .map_err(|e| match e {
                    ttp::TtpError::Parse { line, message } => ParseFailure { line, message },
                    other => ParseFailure {
                        line: 0,
                        message: other.to_string(),
                    },
                }),
            ProblemKind::KillerSudoku => killersudoku::KillerSudokuInstance::parse(text)
                .map(LoadedProblem::KillerSudoku)
                .map_err(|e| match e {
                    killersudoku::KsError::Parse { line, message } => {
                        ParseFailure { line, message }
                    }
                    other => ParseFailure {
                        line: 0,
                        message: other.to_string(),
                    },
                }),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            LoadedProblem::Ttp(_) => ProblemKind::Ttp,
            LoadedProblem::KillerSudoku(_) => ProblemKind::KillerSudoku,
        }
    }

    pub fn to_composite(&self) -> CompositeProblem {
        match self {
            LoadedProblem::Ttp(instance) => instance.to_composite(),
            LoadedProblem::KillerSudoku(instance) => instance.to_composite(),
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            LoadedProblem::Ttp(instance) => instance.to_file_string(),
            LoadedProblem::KillerSudoku(instance) => instance.to_file_string(),
        }
    }
}

/// Evolutionary parameters without the stop condition (which the caller
/// supplies per run).
#[derive(Clone, Debug)]
pub struct EaParams {
    pub population_size: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub memetic: MemeticHook,
    pub generations: Option<u64>,
}

impl Default for EaParams {
    fn default() -> Self {
        let defaults = EaConfig::default();
        EaParams {
            population_size: defaults.population_size,
            tournament_size: defaults.tournament_size,
            crossover_rate: defaults.crossover_rate,
            mutation_rate: defaults.mutation_rate,
            elitism_count: defaults.elitism_count,
            memetic: defaults.memetic,
            generations: None,
        }
    }
}

/// One of the five search strategies with its parameters.
#[derive(Clone, Debug)]
pub enum AlgorithmSpec {
    JointLocalSearch {
        policy: LocalSearchPolicy,
    },
    IteratedLocalSearch {
        /// Per-component move counts; a single entry broadcasts to all
        /// components.
        strength: Vec<usize>,
        policy: LocalSearchPolicy,
    },
    SimulatedAnnealing {
        schedule: AnnealingSchedule,
    },
    Cosolver {
        mode: SubSolverMode,
        genetic_perturbation: bool,
    },
    Evolutionary(EaParams),
}

impl AlgorithmSpec {
    /// Library defaults for each strategy name, as used by the harness when
    /// no parameters are given.
    pub fn default_for(name: &str) -> Result<Self, CoreError> {
        match name {
            "jls" => Ok(AlgorithmSpec::JointLocalSearch {
                policy: LocalSearchPolicy::FirstImprovementRestart,
            }),
            "ils" => Ok(AlgorithmSpec::IteratedLocalSearch {
                strength: vec![1],
                policy: LocalSearchPolicy::FirstImprovementRestart,
            }),
            "sa" => Ok(AlgorithmSpec::SimulatedAnnealing {
                schedule: AnnealingSchedule::new(10.0, 0.95, 100),
            }),
            "cosolver" => Ok(AlgorithmSpec::Cosolver {
                mode: SubSolverMode::Descent,
                genetic_perturbation: false,
            }),
            "ea" => Ok(AlgorithmSpec::Evolutionary(EaParams::default())),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown algorithm {other:?} (jls | ils | sa | cosolver | ea)"
            ))),
        }
    }
}

/// Run one seeded search: the initial solution is derived from the seed, the
/// strategy from the spec.
pub fn run_algorithm(
    problem: &CompositeProblem,
    spec: &AlgorithmSpec,
    stop: &StopCondition,
    seed: u64,
) -> Result<RunResult, CoreError> {
    let init = initial_solution(problem, seed);
    match spec {
        AlgorithmSpec::JointLocalSearch { policy } => {
            joint_local_search(problem, init, stop, *policy, seed)
        }
        AlgorithmSpec::IteratedLocalSearch { strength, policy } => {
            let strength = if strength.len() == 1 {
                PerturbationStrength::uniform(problem.component_count(), strength[0])
            } else {
                PerturbationStrength::per_component(strength.clone())
            };
            iterated_local_search(problem, init, stop, &strength, *policy, seed)
        }
        AlgorithmSpec::SimulatedAnnealing { schedule } => {
            simulated_annealing(problem, init, stop, schedule, seed)
        }
        AlgorithmSpec::Cosolver {
            mode,
            genetic_perturbation,
        } => {
            let subsolvers: Vec<SubSolver> = (0..problem.component_count())
                .map(|index| {
                    let name = problem.component(index).id().to_lowercase();
                    match mode {
                        SubSolverMode::Descent => {
                            SubSolver::improving_descent(index, format!("{name}-descent"))
                        }
                        SubSolverMode::Exact => {
                            SubSolver::exhaustive(index, format!("{name}-exact"))
                        }
                    }
                })
                .collect();
            let config = CosolverConfig {
                genetic_perturbation: *genetic_perturbation,
                ..CosolverConfig::default()
            };
            cosolver_with(problem, init, &subsolvers, stop, &config, seed)
        }
        AlgorithmSpec::Evolutionary(params) => {
            let config = EaConfig {
                population_size: params.population_size,
                tournament_size: params.tournament_size,
                crossover_rate: params.crossover_rate,
                mutation_rate: params.mutation_rate,
                elitism_count: params.elitism_count,
                memetic: params.memetic.clone(),
                generations: params.generations,
                stop: stop.clone(),
            };
            evolve(problem, &config, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ttp::fixtures::TTP_N4_M3;

    #[test]
    fn every_default_algorithm_runs_on_the_fixture() {
        let loaded = LoadedProblem::parse(ProblemKind::Ttp, TTP_N4_M3).unwrap();
        let problem = loaded.to_composite();
        let stop = StopCondition::none()
            .with_max_evaluations(2_000)
            .with_max_stale_passes(5);
        for name in ["jls", "ils", "sa", "cosolver", "ea"] {
            let spec = AlgorithmSpec::default_for(name).unwrap();
            let result = run_algorithm(&problem, &spec, &stop, 7).unwrap();
            assert!(result.best_value.is_finite(), "{name}");
        }
    }

    #[test]
    fn unknown_algorithms_are_rejected() {
        assert!(AlgorithmSpec::default_for("tabu").is_err());
    }

    #[test]
    fn parse_failures_carry_line_numbers() {
        let err = LoadedProblem::parse(ProblemKind::KillerSudoku, "bogus\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
