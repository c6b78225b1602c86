//! Desk-scale verification suite: brute-force optima, local-optimality
//! certificates, dependency verdicts and monotonicity checks, each reported
//! as a named pass/fail property. The `verify` subcommand drives this
//! module; the same properties guard regressions in the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cosolver::{cosolver_round, CosolverState, SubSolverMode};
use crate::detect::{conditional_optima, detect_dependency};
use crate::evolution::{best_individual, evolve_observed, EaConfig};
use crate::neighborhood::{joint_neighborhood, Neighborhood};
use crate::part::Part;
use crate::problem::{
    evaluate, initial_solution, CompositeProblem, CompositeSolution, Evaluator,
};
use crate::problems::additive::additive_problem;
use crate::problems::{killersudoku, ttp};
use crate::search::{
    accept_move, iterated_local_search, joint_local_search, LocalSearchPolicy,
    PerturbationStrength,
};
use crate::stop::StopCondition;

/// Which problem family a property exercises; `None` means family-agnostic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyKind {
    Ttp,
    KillerSudoku,
    All,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub kind: VerifyKind,
    /// Enumeration budget; properties needing more report SKIPPED.
    pub scale_cap: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            kind: VerifyKind::All,
            scale_cap: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PropertyOutcome {
    Passed,
    Failed(String),
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub name: &'static str,
    pub outcome: PropertyOutcome,
}

struct Property {
    name: &'static str,
    kind: Option<VerifyKind>,
    /// Roughly how many candidates the property enumerates; used for the
    /// scale-cap skip decision.
    needs_cap: u64,
    run: fn(u64) -> Result<(), String>,
}

/// Exhaustively certify that no joint neighbor of `sol` is strictly better.
pub fn certify_joint_local_optimum(
    problem: &CompositeProblem,
    sol: &CompositeSolution,
) -> Result<(), String> {
    let value = evaluate(problem, sol).map_err(|e| e.to_string())?;
    let factors: Vec<Neighborhood> = problem
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| c.neighborhood(sol.part(i)).with_identity())
        .collect();
    let joint = joint_neighborhood(factors).map_err(|e| e.to_string())?;
    for tuple in joint.iter() {
        let replacements: Vec<(usize, Part)> = tuple.into_iter().enumerate().collect();
        let candidate = problem.replace(sol, &replacements);
        let objective = evaluate(problem, &candidate).map_err(|e| e.to_string())?;
        if objective.improves_on(&value) {
            return Err(format!(
                "a joint neighbor improves {} to {}",
                value.value, objective.value
            ));
        }
    }
    Ok(())
}

fn product_law(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..200 {
        let factor_count = rng.gen_range(1..=4);
        let sizes: Vec<usize> = (0..factor_count).map(|_| rng.gen_range(0..=8)).collect();
        let factors: Vec<Neighborhood> = sizes
            .iter()
            .map(|&size| {
                Neighborhood::new(Part::new(-1i64), move || {
                    Box::new((0..size as i64).map(Part::new))
                        as Box<dyn Iterator<Item = Part>>
                })
            })
            .collect();
        let joint = joint_neighborhood(factors).map_err(|e| e.to_string())?;
        let expected: usize = sizes.iter().product();
        let counted = joint.iter().count();
        if counted != expected || joint.cardinality() != expected {
            return Err(format!(
                "case {case}: sizes {sizes:?} enumerated {counted}, expected {expected}"
            ));
        }
    }
    Ok(())
}

fn additive_independence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..10 {
        let tables: Vec<Vec<f64>> = (0..rng.gen_range(2..=3))
            .map(|_| {
                (0..rng.gen_range(2..=5))
                    .map(|_| f64::from(rng.gen_range(-20..=20)))
                    .collect()
            })
            .collect();
        let problem = additive_problem(tables.clone()).map_err(|e| e.to_string())?;
        let k = problem.component_count();
        for dependee in 0..k {
            for dependent in 0..k {
                if dependee == dependent {
                    continue;
                }
                let verdict =
                    detect_dependency(&problem, dependee, dependent, 4, seed + case as u64)
                        .map_err(|e| e.to_string())?;
                if verdict.dependent {
                    return Err(format!(
                        "case {case} tables {tables:?}: pair ({dependee}, {dependent}) reported dependent"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn sa_acceptance_statistics(seed: u64) -> Result<(), String> {
    let temperature = 2.0f64;
    let delta = -temperature * std::f64::consts::LN_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accepted = (0..10_000)
        .filter(|_| accept_move(delta, temperature, &mut rng))
        .count();
    let rate = accepted as f64 / 10_000.0;
    if (rate - 0.5).abs() > 0.02 {
        return Err(format!(
            "worsening acceptance rate {rate} not within 0.5 +/- 0.02"
        ));
    }
    let frozen = (0..10_000)
        .filter(|_| accept_move(delta, 0.0, &mut rng))
        .count();
    if frozen != 0 {
        return Err(format!("{frozen} worsening moves accepted at T = 0"));
    }
    Ok(())
}

fn ttp_local_optimum_certificates(seed: u64) -> Result<(), String> {
    let problem = ttp::fixtures::ttp_n4_m3().to_composite();
    for offset in 0..10 {
        let run_seed = seed + offset;
        let result = joint_local_search(
            &problem,
            initial_solution(&problem, run_seed),
            &StopCondition::default(),
            LocalSearchPolicy::FirstImprovementRestart,
            run_seed,
        )
        .map_err(|e| e.to_string())?;
        certify_joint_local_optimum(&problem, &result.best)
            .map_err(|e| format!("seed {run_seed}: {e}"))?;
    }
    Ok(())
}

fn ttp_reaches_the_oracle_optimum(seed: u64) -> Result<(), String> {
    let instance = ttp::fixtures::ttp_n4_m3();
    let problem = instance.to_composite();
    let optimum = instance.brute_force().map_err(|e| e.to_string())?.value;
    let mut best = f64::NEG_INFINITY;
    for offset in 0..30 {
        let run_seed = seed + offset;
        let result = joint_local_search(
            &problem,
            initial_solution(&problem, run_seed),
            &StopCondition::default(),
            LocalSearchPolicy::FirstImprovementRestart,
            run_seed,
        )
        .map_err(|e| e.to_string())?;
        best = best.max(result.best_value);
    }
    if best < optimum - 0.05 * optimum.abs() {
        return Err(format!(
            "best of 30 runs {best} misses the oracle optimum {optimum} by more than 5%"
        ));
    }
    Ok(())
}

fn ttp_iterated_search_is_no_worse(seed: u64) -> Result<(), String> {
    let problem = ttp::fixtures::ttp_n4_m3().to_composite();
    let budget = 600;
    let mut ls_total = 0.0;
    let mut ils_total = 0.0;
    for offset in 0..20 {
        let run_seed = seed + offset;
        let init = initial_solution(&problem, run_seed);
        let ls = joint_local_search(
            &problem,
            init.clone(),
            &StopCondition::none()
                .with_max_evaluations(budget)
                .with_max_stale_passes(1),
            LocalSearchPolicy::FirstImprovementRestart,
            run_seed,
        )
        .map_err(|e| e.to_string())?;
        let ils = iterated_local_search(
            &problem,
            init,
            &StopCondition::none().with_max_evaluations(budget),
            &PerturbationStrength::uniform(2, 2),
            LocalSearchPolicy::FirstImprovementRestart,
            run_seed,
        )
        .map_err(|e| e.to_string())?;
        ls_total += ls.best_value;
        ils_total += ils.best_value;
    }
    if ils_total < ls_total {
        return Err(format!(
            "mean over 20 seeds: iterated {} below plain {}",
            ils_total / 20.0,
            ls_total / 20.0
        ));
    }
    Ok(())
}

fn ttp_cosolver_monotone_fixed_point(seed: u64) -> Result<(), String> {
    let instance = ttp::fixtures::ttp_n4_m3();
    let problem = instance.to_composite();
    let subsolvers = vec![
        instance.subsolver_tour(SubSolverMode::Exact),
        instance.subsolver_plan(SubSolverMode::Exact),
    ];
    for offset in 0..10 {
        let run_seed = seed + offset;
        let evaluator = Evaluator::new(&problem);
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let mut state = CosolverState::new(initial_solution(&problem, run_seed));
        let mut last = evaluate(&problem, &state.incumbent).map_err(|e| e.to_string())?;
        let mut rounds = 0;
        while state.round == 0 || state.last_round_changed {
            let (next, objective) = cosolver_round(
                &problem,
                &evaluator,
                &state,
                &subsolvers,
                u64::MAX,
                &mut rng,
            )
            .map_err(|e| e.to_string())?;
            if last.improves_on(&objective) {
                return Err(format!("seed {run_seed}: round {} degraded", next.round));
            }
            last = objective;
            state = next;
            rounds += 1;
            if rounds > 10 {
                return Err(format!("seed {run_seed}: no fixed point within 10 rounds"));
            }
        }
        for component in 0..problem.component_count() {
            let (best_value, _) =
                conditional_optima(&problem, &state.incumbent, component, 1_000_000, 0.0)
                    .map_err(|e| e.to_string())?;
            if best_value > last.value {
                return Err(format!(
                    "seed {run_seed}: fixed point not coordinate-wise optimal on component {component}"
                ));
            }
        }
    }
    Ok(())
}

fn ttp_two_component_trace_fidelity(seed: u64) -> Result<(), String> {
    let instance = ttp::fixtures::ttp_n4_m3();
    let problem = instance.to_composite();
    let subsolvers = vec![
        instance.subsolver_tour(SubSolverMode::Exact),
        instance.subsolver_plan(SubSolverMode::Exact),
    ];
    for offset in 0..5 {
        let run_seed = seed + offset;
        let init = initial_solution(&problem, run_seed);

        let hand_evaluator = Evaluator::new(&problem);
        let mut hand_rng = ChaCha8Rng::seed_from_u64(run_seed);
        let mut hand = init.clone();
        let mut hand_trace = Vec::new();
        for _ in 0..5 {
            let tour = subsolvers[0]
                .solve(&problem, &hand_evaluator, &hand, u64::MAX, &mut hand_rng)
                .map_err(|e| e.to_string())?;
            let with_tour = problem.replace(&hand, &[(0, tour)]);
            let plan = subsolvers[1]
                .solve(&problem, &hand_evaluator, &with_tour, u64::MAX, &mut hand_rng)
                .map_err(|e| e.to_string())?;
            hand = problem.replace(&with_tour, &[(1, plan)]);
            hand_trace.push(hand.clone());
        }

        let loop_evaluator = Evaluator::new(&problem);
        let mut loop_rng = ChaCha8Rng::seed_from_u64(run_seed);
        let mut state = CosolverState::new(init);
        for step in 0..5 {
            let (next, _) = cosolver_round(
                &problem,
                &loop_evaluator,
                &state,
                &subsolvers,
                u64::MAX,
                &mut loop_rng,
            )
            .map_err(|e| e.to_string())?;
            state = next;
            if state.incumbent != hand_trace[step] {
                return Err(format!(
                    "seed {run_seed}: traces diverge at round {}",
                    step + 1
                ));
            }
        }
    }
    Ok(())
}

fn ttp_dependency_verdicts(seed: u64) -> Result<(), String> {
    let instance = ttp::fixtures::ttp_n4_m3();
    let problem = instance.to_composite();
    let verdict = detect_dependency(&problem, 0, 1, 6, seed).map_err(|e| e.to_string())?;
    if !verdict.dependent {
        return Err("packing not reported dependent on the tour with rent > 0".into());
    }
    let decoupled = instance.with_renting_rate(0.0).to_composite();
    let verdict = detect_dependency(&decoupled, 0, 1, 6, seed).map_err(|e| e.to_string())?;
    if verdict.dependent {
        return Err("packing reported dependent on the tour at rent 0".into());
    }
    Ok(())
}

fn ttp_ea_elitism_monotone(seed: u64) -> Result<(), String> {
    let problem = ttp::fixtures::ttp_n4_m3().to_composite();
    let config = EaConfig {
        population_size: 12,
        elitism_count: 1,
        generations: Some(15),
        ..EaConfig::default()
    };
    let mut bests: Vec<f64> = Vec::new();
    evolve_observed(&problem, &config, seed, |_, population| {
        bests.push(best_individual(population).fitness.value);
    })
    .map_err(|e| e.to_string())?;
    for window in bests.windows(2) {
        if window[1] < window[0] {
            return Err(format!(
                "best-of-generation degraded from {} to {}",
                window[0], window[1]
            ));
        }
    }
    Ok(())
}

fn ks_generator_is_solvable(seed: u64) -> Result<(), String> {
    for offset in 0..10 {
        let gen_seed = seed + offset;
        let (instance, reference) =
            killersudoku::generate(2, gen_seed, 3).map_err(|e| e.to_string())?;
        let solutions = instance.brute_force_solve().map_err(|e| e.to_string())?;
        if solutions.is_empty() {
            return Err(format!("seed {gen_seed}: no solutions"));
        }
        if !solutions.contains(&reference) {
            return Err(format!("seed {gen_seed}: reference solution missing"));
        }
    }
    Ok(())
}

fn ks_local_optimum_certificates(seed: u64) -> Result<(), String> {
    let (instance, _) = killersudoku::generate(2, seed, 3).map_err(|e| e.to_string())?;
    let problem = instance.to_composite();
    for offset in 0..5 {
        let run_seed = seed + offset;
        let result = joint_local_search(
            &problem,
            initial_solution(&problem, run_seed),
            &StopCondition::default(),
            LocalSearchPolicy::FirstImprovementRestart,
            run_seed,
        )
        .map_err(|e| e.to_string())?;
        certify_joint_local_optimum(&problem, &result.best)
            .map_err(|e| format!("seed {run_seed}: {e}"))?;
    }
    Ok(())
}

fn ks_iterated_search_solves(seed: u64) -> Result<(), String> {
    for offset in 0..5 {
        let gen_seed = seed + offset;
        let (instance, _) = killersudoku::generate(2, gen_seed, 3).map_err(|e| e.to_string())?;
        let problem = instance.to_composite();
        let result = iterated_local_search(
            &problem,
            initial_solution(&problem, gen_seed),
            &StopCondition::none()
                .with_max_evaluations(200_000)
                .with_target_value(0.0),
            &PerturbationStrength::uniform(2, 2),
            LocalSearchPolicy::FirstImprovementRestart,
            gen_seed,
        )
        .map_err(|e| e.to_string())?;
        if result.best_value != 0.0 {
            return Err(format!(
                "seed {gen_seed}: stuck at {} violations",
                result.best_value
            ));
        }
        let grid = instance.grid_from_composite(&result.best);
        let solutions = instance.brute_force_solve().map_err(|e| e.to_string())?;
        if !solutions.contains(&grid) {
            return Err(format!(
                "seed {gen_seed}: found grid is not in the oracle solution set"
            ));
        }
    }
    Ok(())
}

fn ks_dependency_verdicts(seed: u64) -> Result<(), String> {
    let (instance, _) = killersudoku::generate(2, seed, 3).map_err(|e| e.to_string())?;
    let problem = instance.to_composite();
    let sud = problem.component_index(killersudoku::SUD).expect("SUD");
    let kak = problem.component_index(killersudoku::KAK).expect("KAK");
    let verdict = detect_dependency(&problem, sud, kak, 3, seed).map_err(|e| e.to_string())?;
    if !verdict.dependent {
        return Err("cage component not reported dependent on the row component".into());
    }
    let verdict = detect_dependency(&problem, kak, sud, 2, seed).map_err(|e| e.to_string())?;
    if !verdict.dependent {
        return Err("row component not reported dependent on the cage component".into());
    }
    Ok(())
}

fn ks_move_closure(seed: u64) -> Result<(), String> {
    let (instance, _) = killersudoku::generate(2, seed, 3).map_err(|e| e.to_string())?;
    let problem = instance.to_composite();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sol = initial_solution(&problem, seed);
    for step in 0..2_000 {
        let component = rng.gen_range(0..2);
        if let Some(part) = problem
            .component(component)
            .random_move(sol.part(component), &mut rng)
        {
            sol = problem.replace(&sol, &[(component, part)]);
        }
        if let Err(e) = evaluate(&problem, &sol) {
            return Err(format!("step {step}: {e}"));
        }
    }
    Ok(())
}

const PROPERTIES: &[Property] = &[
    Property {
        name: "product_law",
        kind: None,
        needs_cap: 8 * 8 * 8 * 8,
        run: product_law,
    },
    Property {
        name: "additive_detector_independence",
        kind: None,
        needs_cap: 125,
        run: additive_independence,
    },
    Property {
        name: "sa_acceptance_statistics",
        kind: None,
        needs_cap: 0,
        run: sa_acceptance_statistics,
    },
    Property {
        name: "ttp_local_optimum_certificates",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_local_optimum_certificates,
    },
    Property {
        name: "ttp_reaches_oracle_optimum",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_reaches_the_oracle_optimum,
    },
    Property {
        name: "ttp_iterated_search_no_worse_than_plain",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_iterated_search_is_no_worse,
    },
    Property {
        name: "ttp_cosolver_monotone_fixed_point",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_cosolver_monotone_fixed_point,
    },
    Property {
        name: "ttp_two_component_trace_fidelity",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_two_component_trace_fidelity,
    },
    Property {
        name: "ttp_dependency_verdicts",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_dependency_verdicts,
    },
    Property {
        name: "ttp_ea_elitism_monotone",
        kind: Some(VerifyKind::Ttp),
        needs_cap: 1_000,
        run: ttp_ea_elitism_monotone,
    },
    Property {
        name: "ks_generator_solvable",
        kind: Some(VerifyKind::KillerSudoku),
        needs_cap: 331_776,
        run: ks_generator_is_solvable,
    },
    Property {
        name: "ks_local_optimum_certificates",
        kind: Some(VerifyKind::KillerSudoku),
        needs_cap: 1_000,
        run: ks_local_optimum_certificates,
    },
    Property {
        name: "ks_iterated_search_solves",
        kind: Some(VerifyKind::KillerSudoku),
        needs_cap: 331_776,
        run: ks_iterated_search_solves,
    },
    Property {
        name: "ks_dependency_verdicts",
        kind: Some(VerifyKind::KillerSudoku),
        needs_cap: 331_776,
        run: ks_dependency_verdicts,
    },
    Property {
        name: "ks_move_closure",
        kind: Some(VerifyKind::KillerSudoku),
        needs_cap: 1_000,
        run: ks_move_closure,
    },
];

/// Run the suite and collect one report per property.
pub fn run_verification(config: &VerifyConfig) -> Vec<PropertyReport> {
    PROPERTIES
        .iter()
        .filter(|property| match (config.kind, property.kind) {
            (VerifyKind::All, _) | (_, None) => true,
            (kind, Some(k)) => kind == k,
        })
        .map(|property| {
            if property.needs_cap > config.scale_cap {
                return PropertyReport {
                    name: property.name,
                    outcome: PropertyOutcome::Skipped(format!(
                        "needs a scale cap of at least {}",
                        property.needs_cap
                    )),
                };
            }
            let outcome = match (property.run)(config.seed) {
                Ok(()) => PropertyOutcome::Passed,
                Err(detail) => PropertyOutcome::Failed(detail),
            };
            PropertyReport {
                name: property.name,
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_full_suite_passes() {
        let reports = run_verification(&VerifyConfig::default());
        let failures: Vec<String> = reports
            .iter()
            .filter_map(|r| match &r.outcome {
                PropertyOutcome::Failed(detail) => Some(format!("{}: {detail}", r.name)),
                _ => None,
            })
            .collect();
        assert!(failures.is_empty(), "{failures:?}");
        assert!(reports
            .iter()
            .all(|r| matches!(r.outcome, PropertyOutcome::Passed)));
    }

    #[test]
    fn low_scale_caps_skip_instead_of_fail() {
        let config = VerifyConfig {
            scale_cap: 10,
            ..VerifyConfig::default()
        };
        let reports = run_verification(&config);
        assert!(reports
            .iter()
            .any(|r| matches!(r.outcome, PropertyOutcome::Skipped(_))));
        assert!(!reports
            .iter()
            .any(|r| matches!(r.outcome, PropertyOutcome::Failed(_))));
    }

    #[test]
    fn kind_filter_limits_the_suite() {
        let config = VerifyConfig {
            kind: VerifyKind::Ttp,
            ..VerifyConfig::default()
        };
        let reports = run_verification(&config);
        assert!(reports.iter().any(|r| r.name.starts_with("ttp_")));
        assert!(!reports.iter().any(|r| r.name.starts_with("ks_")));
    }
}
