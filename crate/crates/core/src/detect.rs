//! Empirical dependency detection.
//!
//! Component B depends on component A when (1) A can produce a solution
//! without any data from B, and (2) changing A's solution can change which
//! solutions of B are best in the global context. Condition (1) holds for
//! every [`crate::Component`] by construction (initializers are isolated),
//! so the detector certifies condition (2) empirically: it samples distinct
//! solutions of the dependee, computes the exact set of conditionally
//! optimal dependent solutions for each by exhaustive enumeration, and
//! reports dependence as soon as two samples disagree.
//!
//! Comparing optimizer *sets* (tie-aware) rather than single argmax picks
//! avoids false positives from arbitrary tie-breaking; comparing optimal
//! *values* instead is available as a non-default criterion. All components
//! other than the tested pair stay frozen at the seeded initial solution.
//! The detector is exact within its enumeration cap and errors rather than
//! degrade to sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::part::Part;
use crate::problem::{evaluate, initial_solution, CompositeProblem, CompositeSolution};

/// What "the best solutions changed" means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DependenceCriterion {
    /// The sets of conditionally optimal dependent solutions differ.
    #[default]
    OptimizerSet,
    /// The conditionally optimal objective values differ.
    OptimalValue,
}

/// Detector options beyond the sample count and seed.
#[derive(Clone, Debug)]
pub struct DetectorConfig {
    /// Distinct dependee solutions to sample (at least 2).
    pub sample_count: usize,
    /// Seed for the frozen context and the dependee sampling.
    pub seed: u64,
    /// Hard cap on enumerated candidates, per space. Exceeding it is an
    /// error; the detector never silently samples instead.
    pub enumeration_cap: u64,
    pub criterion: DependenceCriterion,
    /// Scores within this distance of the best count as ties (0 = exact).
    pub tie_tolerance: f64,
}

impl DetectorConfig {
    pub fn new(sample_count: usize, seed: u64) -> Self {
        DetectorConfig {
            sample_count,
            seed,
            enumeration_cap: 1_000_000,
            criterion: DependenceCriterion::OptimizerSet,
            tie_tolerance: 0.0,
        }
    }
}

/// A replayable disagreement: two dependee solutions whose conditional
/// optima for the dependent component differ. Re-running
/// [`conditional_optima`] on the two contexts reproduces it.
#[derive(Clone, Debug)]
pub struct DependencyWitness {
    pub dependee_a: Part,
    pub dependee_b: Part,
    pub optima_a: Vec<Part>,
    pub optima_b: Vec<Part>,
    pub value_a: f64,
    pub value_b: f64,
}

/// Outcome of a detector run.
#[derive(Clone, Debug)]
pub struct DependencyVerdict {
    pub dependent: bool,
    pub witness: Option<DependencyWitness>,
    pub samples_used: usize,
}

/// The conditionally optimal parts of `component`, with every other part
/// frozen at `context`: the exact best objective value over the component's
/// enumerable space and all parts attaining it (ties by exact equality, or
/// within the given tolerance).
pub fn conditional_optima(
    problem: &CompositeProblem,
    context: &CompositeSolution,
    component: usize,
    cap: u64,
    tie_tolerance: f64,
) -> Result<(f64, Vec<Part>), CoreError> {
    let space = |problem: &CompositeProblem| {
        problem
            .component(component)
            .space(context.part(component))
            .ok_or_else(|| {
                CoreError::InvalidConfig(format!(
                    "component {} has no enumerable solution space",
                    problem.component(component).id()
                ))
            })
    };
    // With exact ties a single pass suffices; a positive tolerance needs the
    // exact optimum first.
    let mut count: u64 = 0;
    let mut best: Option<f64> = None;
    let mut optima: Vec<Part> = Vec::new();
    for candidate in space(problem)? {
        count += 1;
        if count > cap {
            return Err(CoreError::SpaceTooLarge { cap });
        }
        let sol = problem.replace(context, &[(component, candidate.clone())]);
        let objective = evaluate(problem, &sol)?;
        match best {
            Some(b) if objective.score() > b => {
                best = Some(objective.score());
                if tie_tolerance == 0.0 {
                    optima.clear();
                    optima.push(candidate);
                }
            }
            Some(b) if tie_tolerance == 0.0 && objective.score() == b => {
                optima.push(candidate);
            }
            Some(_) => {}
            None => {
                best = Some(objective.score());
                if tie_tolerance == 0.0 {
                    optima.push(candidate);
                }
            }
        }
    }
    let best_score = best.ok_or_else(|| {
        CoreError::InvalidConfig("conditional optimum over an empty space".into())
    })?;
    if tie_tolerance > 0.0 {
        for candidate in space(problem)? {
            let sol = problem.replace(context, &[(component, candidate.clone())]);
            let objective = evaluate(problem, &sol)?;
            if (best_score - objective.score()).abs() <= tie_tolerance {
                optima.push(candidate);
            }
        }
    }
    let orientation_sign = match problem.orientation() {
        crate::problem::Orientation::Maximize => 1.0,
        crate::problem::Orientation::Minimize => -1.0,
    };
    Ok((best_score * orientation_sign, optima))
}

fn set_equal(a: &[Part], b: &[Part]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.contains(x))
        && b.iter().all(|x| a.contains(x))
}

/// Detect whether `dependent` depends on `dependee` with the default
/// configuration (optimizer-set criterion, cap 10^6, exact ties).
pub fn detect_dependency(
    problem: &CompositeProblem,
    dependee: usize,
    dependent: usize,
    sample_count: usize,
    seed: u64,
) -> Result<DependencyVerdict, CoreError> {
    detect_dependency_with(problem, dependee, dependent, &DetectorConfig::new(sample_count, seed))
}

/// [`detect_dependency`] with explicit options.
pub fn detect_dependency_with(
    problem: &CompositeProblem,
    dependee: usize,
    dependent: usize,
    config: &DetectorConfig,
) -> Result<DependencyVerdict, CoreError> {
    if config.sample_count < 2 {
        return Err(CoreError::TooFewSamples {
            got: config.sample_count,
        });
    }
    let k = problem.component_count();
    if dependee >= k || dependent >= k || dependee == dependent {
        return Err(CoreError::InvalidConfig(format!(
            "dependency pair ({dependee}, {dependent}) is not a pair of distinct components"
        )));
    }
    // All components other than the tested pair stay pinned to this tuple.
    let base = initial_solution(problem, config.seed);
    let dependee_space = problem
        .component(dependee)
        .space(base.part(dependee))
        .ok_or_else(|| {
            CoreError::InvalidConfig(format!(
                "component {} has no enumerable solution space",
                problem.component(dependee).id()
            ))
        })?;
    // Reservoir-sample distinct dependee solutions in one pass; space
    // enumerations yield distinct candidates by contract.
    let take = config.sample_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut total: u64 = 0;
    let mut samples: Vec<Part> = Vec::with_capacity(take);
    for candidate in dependee_space {
        total += 1;
        if total > config.enumeration_cap {
            return Err(CoreError::SpaceTooLarge {
                cap: config.enumeration_cap,
            });
        }
        if samples.len() < take {
            samples.push(candidate);
        } else {
            let slot = rng.gen_range(0..total as usize);
            if slot < take {
                samples[slot] = candidate;
            }
        }
    }
    if total < 2 {
        return Err(CoreError::TooFewSamples { got: total as usize });
    }
    let take = samples.len();

    let optima_for = |sample: &Part| -> Result<(f64, Vec<Part>), CoreError> {
        let context = problem.replace(&base, &[(dependee, sample.clone())]);
        conditional_optima(
            problem,
            &context,
            dependent,
            config.enumeration_cap,
            config.tie_tolerance,
        )
    };

    let (value_first, optima_first) = optima_for(&samples[0])?;
    for sample in &samples[1..] {
        let (value, optima) = optima_for(sample)?;
        let differs = match config.criterion {
            DependenceCriterion::OptimizerSet => !set_equal(&optima_first, &optima),
            DependenceCriterion::OptimalValue => {
                (value_first - value).abs() > config.tie_tolerance
            }
        };
        if differs {
            return Ok(DependencyVerdict {
                dependent: true,
                witness: Some(DependencyWitness {
                    dependee_a: samples[0].clone(),
                    dependee_b: sample.clone(),
                    optima_a: optima_first,
                    optima_b: optima,
                    value_a: value_first,
                    value_b: value,
                }),
                samples_used: take,
            });
        }
    }
    Ok(DependencyVerdict {
        dependent: false,
        witness: None,
        samples_used: take,
    })
}
