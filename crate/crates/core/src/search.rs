//! Trajectory searches over the joint neighborhood: plain local search,
//! iterated local search and simulated annealing.
//!
//! All three work on the Cartesian product of the per-component
//! neighborhoods, with the identity candidate included in every factor so a
//! joint candidate may change any subset of the components. All are
//! deterministic in their seed; runs with different seeds are independent
//! and safe to execute in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::neighborhood::{joint_neighborhood, Neighborhood};
use crate::part::Part;
use crate::problem::{CompositeProblem, CompositeSolution, Evaluator, Objective};
use crate::result::{RunRecorder, RunResult};
use crate::stop::StopCondition;

/// Acceptance policy of the joint local search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LocalSearchPolicy {
    /// Accept the first strictly improving joint candidate and restart the
    /// scan from the new incumbent. On a staleness stop the incumbent is a
    /// certified joint local optimum.
    #[default]
    FirstImprovementRestart,
    /// Scan the whole joint neighborhood, then accept the best strictly
    /// improving candidate, if any.
    BestImprovementPass,
    /// Accept improvements mid-scan but keep enumerating the neighborhoods
    /// of the incumbent the pass started from. Kept selectable for fidelity
    /// comparisons with naively nested loops; not a sensible default.
    PaperLiteral,
}

/// Number of random moves applied per component when an iterated local
/// search perturbs its incumbent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationStrength(Vec<usize>);

impl PerturbationStrength {
    pub fn uniform(components: usize, moves_per_component: usize) -> Self {
        PerturbationStrength(vec![moves_per_component; components])
    }

    pub fn per_component(moves: Vec<usize>) -> Self {
        PerturbationStrength(moves)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Geometric cooling: after every `step_length` proposals the temperature is
/// multiplied by `cooling_factor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealingSchedule {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub step_length: u32,
}

impl AnnealingSchedule {
    pub fn new(initial_temperature: f64, cooling_factor: f64, step_length: u32) -> Self {
        AnnealingSchedule {
            initial_temperature,
            cooling_factor,
            step_length,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.initial_temperature.is_finite() && self.initial_temperature >= 0.0) {
            return Err(CoreError::InvalidSchedule(format!(
                "initial temperature must be >= 0, got {}",
                self.initial_temperature
            )));
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor <= 1.0) {
            return Err(CoreError::InvalidSchedule(format!(
                "cooling factor must be in (0, 1], got {}",
                self.cooling_factor
            )));
        }
        if self.step_length == 0 {
            return Err(CoreError::InvalidSchedule("step length must be positive".into()));
        }
        Ok(())
    }
}

/// Why an inner search loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum StopHit {
    /// Evaluation or wall-time budget exhausted.
    Budget,
    /// The configured number of stale passes elapsed.
    Stale,
    /// The target value was reached.
    Target,
}

/// Per-component neighborhoods of `sol`, identity included.
fn joint_factors(problem: &CompositeProblem, sol: &CompositeSolution) -> Vec<Neighborhood> {
    problem
        .components()
        .iter()
        .enumerate()
        .map(|(index, component)| component.neighborhood(sol.part(index)).with_identity())
        .collect()
}

fn tuple_replacements(tuple: Vec<Part>) -> Vec<(usize, Part)> {
    tuple.into_iter().enumerate().collect()
}

/// Shared descent loop; also driven by the iterated local search and the
/// memetic hook of the evolutionary layer.
pub(crate) fn local_search_core(
    problem: &CompositeProblem,
    evaluator: &Evaluator<'_>,
    recorder: &mut RunRecorder,
    mut incumbent: CompositeSolution,
    mut incumbent_obj: Objective,
    stop: &StopCondition,
    policy: LocalSearchPolicy,
) -> Result<(CompositeSolution, Objective, u64, StopHit), CoreError> {
    let mut passes = 0u64;
    let mut stale = 0u64;
    let hit;
    'run: loop {
        if stop.evaluations_exhausted(evaluator.evaluations())
            || stop.time_exhausted(recorder.elapsed())
        {
            hit = StopHit::Budget;
            break 'run;
        }
        if stop.target_reached(&recorder.best_objective()) {
            hit = StopHit::Target;
            break 'run;
        }
        if stop.staleness_exhausted(stale) {
            hit = StopHit::Stale;
            break 'run;
        }
        passes += 1;
        let joint = joint_neighborhood(joint_factors(problem, &incumbent))
            .expect("problems have at least one component");
        let mut improved = false;
        match policy {
            LocalSearchPolicy::FirstImprovementRestart => {
                for tuple in joint.iter() {
                    if stop.evaluations_exhausted(evaluator.evaluations())
                        || stop.time_exhausted(recorder.elapsed())
                    {
                        hit = StopHit::Budget;
                        break 'run;
                    }
                    let candidate = problem.replace(&incumbent, &tuple_replacements(tuple));
                    let objective = evaluator.evaluate(&candidate)?;
                    if objective.improves_on(&incumbent_obj) {
                        incumbent = candidate;
                        incumbent_obj = objective;
                        recorder.observe(&incumbent, incumbent_obj, evaluator);
                        improved = true;
                        if stop.target_reached(&incumbent_obj) {
                            hit = StopHit::Target;
                            break 'run;
                        }
                        break;
                    }
                }
            }
            LocalSearchPolicy::BestImprovementPass => {
                let mut best: Option<(CompositeSolution, Objective)> = None;
                for tuple in joint.iter() {
                    if stop.evaluations_exhausted(evaluator.evaluations())
                        || stop.time_exhausted(recorder.elapsed())
                    {
                        hit = StopHit::Budget;
                        break 'run;
                    }
                    let candidate = problem.replace(&incumbent, &tuple_replacements(tuple));
                    let objective = evaluator.evaluate(&candidate)?;
                    let beats_pass_best = best
                        .as_ref()
                        .map_or(objective.improves_on(&incumbent_obj), |(_, b)| {
                            objective.improves_on(b)
                        });
                    if beats_pass_best {
                        best = Some((candidate, objective));
                    }
                }
                if let Some((candidate, objective)) = best {
                    incumbent = candidate;
                    incumbent_obj = objective;
                    recorder.observe(&incumbent, incumbent_obj, evaluator);
                    improved = true;
                    if stop.target_reached(&incumbent_obj) {
                        hit = StopHit::Target;
                        break 'run;
                    }
                }
            }
            LocalSearchPolicy::PaperLiteral => {
                // Candidates stay relative to the incumbent the pass started
                // from, even after an acceptance; only the next pass rebuilds
                // the neighborhoods.
                let entry = incumbent.clone();
                for tuple in joint.iter() {
                    if stop.evaluations_exhausted(evaluator.evaluations())
                        || stop.time_exhausted(recorder.elapsed())
                    {
                        hit = StopHit::Budget;
                        break 'run;
                    }
                    let candidate = problem.replace(&entry, &tuple_replacements(tuple));
                    let objective = evaluator.evaluate(&candidate)?;
                    if objective.improves_on(&incumbent_obj) {
                        incumbent = candidate;
                        incumbent_obj = objective;
                        recorder.observe(&incumbent, incumbent_obj, evaluator);
                        improved = true;
                        if stop.target_reached(&incumbent_obj) {
                            hit = StopHit::Target;
                            break 'run;
                        }
                    }
                }
            }
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok((incumbent, incumbent_obj, passes, hit))
}

/// Local search over the joint neighborhood.
///
/// The result is never worse than `init`; its trajectory is monotone. Under
/// [`LocalSearchPolicy::FirstImprovementRestart`] a run that stops on
/// staleness (not on a budget bound) ends in a joint local optimum: no
/// candidate tuple in the incumbent's joint neighborhood is strictly better.
/// `iterations` counts neighborhood scans. The seed is recorded in the
/// result; the enumeration policies themselves are deterministic and draw
/// nothing from it.
pub fn joint_local_search(
    problem: &CompositeProblem,
    init: CompositeSolution,
    stop: &StopCondition,
    policy: LocalSearchPolicy,
    seed: u64,
) -> Result<RunResult, CoreError> {
    stop.validate()?;
    let evaluator = Evaluator::new(problem);
    let init_obj = evaluator.evaluate(&init)?;
    let mut recorder = RunRecorder::new(init.clone(), init_obj, &evaluator, seed);
    let (_, _, passes, _) = local_search_core(
        problem,
        &evaluator,
        &mut recorder,
        init,
        init_obj,
        stop,
        policy,
    )?;
    Ok(recorder.finish(&evaluator, passes))
}

/// Iterated local search: descend, then repeatedly perturb the incumbent
/// with random component moves and descend again, keeping the better of
/// incumbent and candidate.
///
/// `stale passes` counts perturbation cycles that fail to improve the
/// incumbent. `iterations` counts descents.
pub fn iterated_local_search(
    problem: &CompositeProblem,
    init: CompositeSolution,
    stop: &StopCondition,
    strength: &PerturbationStrength,
    inner_policy: LocalSearchPolicy,
    seed: u64,
) -> Result<RunResult, CoreError> {
    stop.validate()?;
    if strength.as_slice().len() != problem.component_count() {
        return Err(CoreError::InvalidConfig(format!(
            "perturbation strength covers {} components, problem has {}",
            strength.as_slice().len(),
            problem.component_count()
        )));
    }
    let evaluator = Evaluator::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init_obj = evaluator.evaluate(&init)?;
    let mut recorder = RunRecorder::new(init.clone(), init_obj, &evaluator, seed);
    // Inner descents run to their own staleness; the outer bounds carry over.
    let inner_stop = StopCondition {
        max_stale_passes: Some(1),
        ..stop.clone()
    };
    let (mut incumbent, mut incumbent_obj, _, mut hit) = local_search_core(
        problem,
        &evaluator,
        &mut recorder,
        init,
        init_obj,
        &inner_stop,
        inner_policy,
    )?;
    let mut descents = 1u64;
    let mut stale_cycles = 0u64;
    loop {
        if hit == StopHit::Budget
            || hit == StopHit::Target
            || stop.evaluations_exhausted(evaluator.evaluations())
            || stop.time_exhausted(recorder.elapsed())
            || stop.target_reached(&recorder.best_objective())
            || stop.staleness_exhausted(stale_cycles)
        {
            break;
        }
        let mut candidate = incumbent.clone();
        for (component, &moves) in strength.as_slice().iter().enumerate() {
            for _ in 0..moves {
                if let Some(part) = problem
                    .component(component)
                    .random_move(candidate.part(component), &mut rng)
                {
                    candidate = problem.replace(&candidate, &[(component, part)]);
                }
            }
        }
        let candidate_obj = evaluator.evaluate(&candidate)?;
        recorder.observe(&candidate, candidate_obj, &evaluator);
        let (descended, descended_obj, _, inner_hit) = local_search_core(
            problem,
            &evaluator,
            &mut recorder,
            candidate,
            candidate_obj,
            &inner_stop,
            inner_policy,
        )?;
        descents += 1;
        if descended_obj.improves_on(&incumbent_obj) {
            incumbent = descended;
            incumbent_obj = descended_obj;
            stale_cycles = 0;
        } else {
            stale_cycles += 1;
        }
        hit = inner_hit;
    }
    Ok(recorder.finish(&evaluator, descents))
}

/// Probability that a move with the given oriented score delta is accepted
/// at the given temperature: 1 for non-worsening moves, `exp(-|delta| / T)`
/// for worsening moves, exactly 0 at `T = 0`.
pub fn acceptance_probability(delta_score: f64, temperature: f64) -> f64 {
    if delta_score >= 0.0 {
        1.0
    } else if temperature <= 0.0 {
        0.0
    } else {
        (delta_score / temperature).exp()
    }
}

/// Seeded acceptance decision; draws from the rng only for worsening moves
/// at positive temperature.
pub fn accept_move(delta_score: f64, temperature: f64, rng: &mut ChaCha8Rng) -> bool {
    if delta_score >= 0.0 {
        return true;
    }
    if temperature <= 0.0 {
        return false;
    }
    rng.gen::<f64>() < (delta_score / temperature).exp()
}

/// Simulated annealing over the joint neighborhood.
///
/// Each proposal picks one candidate uniformly in every factor (identity
/// included) and accepts per [`accept_move`]. Returns the best solution ever
/// visited, not the final incumbent. `stale passes` counts cooling steps
/// without a best-ever improvement; `iterations` counts proposals.
pub fn simulated_annealing(
    problem: &CompositeProblem,
    init: CompositeSolution,
    stop: &StopCondition,
    schedule: &AnnealingSchedule,
    seed: u64,
) -> Result<RunResult, CoreError> {
    schedule.validate()?;
    stop.validate()?;
    let evaluator = Evaluator::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init_obj = evaluator.evaluate(&init)?;
    let mut recorder = RunRecorder::new(init.clone(), init_obj, &evaluator, seed);
    let mut incumbent = init;
    let mut incumbent_obj = init_obj;
    let mut temperature = schedule.initial_temperature;
    let mut proposals = 0u64;
    let mut stale_steps = 0u64;
    'run: loop {
        if stop.evaluations_exhausted(evaluator.evaluations())
            || stop.time_exhausted(recorder.elapsed())
            || stop.target_reached(&recorder.best_objective())
            || stop.staleness_exhausted(stale_steps)
        {
            break 'run;
        }
        let best_before = recorder.best_objective();
        for _ in 0..schedule.step_length {
            if stop.evaluations_exhausted(evaluator.evaluations())
                || stop.time_exhausted(recorder.elapsed())
            {
                break 'run;
            }
            let mut replacements = Vec::with_capacity(problem.component_count());
            for (index, component) in problem.components().iter().enumerate() {
                let factor = component.neighborhood(incumbent.part(index)).with_identity();
                let pick = factor
                    .choose(&mut rng)
                    .expect("identity keeps every factor non-empty");
                replacements.push((index, pick));
            }
            let candidate = problem.replace(&incumbent, &replacements);
            let objective = evaluator.evaluate(&candidate)?;
            proposals += 1;
            let delta = objective.score() - incumbent_obj.score();
            if accept_move(delta, temperature, &mut rng) {
                incumbent = candidate;
                incumbent_obj = objective;
                recorder.observe(&incumbent, incumbent_obj, &evaluator);
            }
            if stop.target_reached(&recorder.best_objective()) {
                break 'run;
            }
        }
        temperature *= schedule.cooling_factor;
        if recorder.best_objective().improves_on(&best_before) {
            stale_steps = 0;
        } else {
            stale_steps += 1;
        }
    }
    Ok(recorder.finish(&evaluator, proposals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ttp::fixtures::ttp_n4_m3;
    use crate::problems::ttp::TtpSolution;
    use crate::{evaluate, initial_solution};

    fn fixture() -> (crate::problems::ttp::TtpInstance, CompositeProblem) {
        let instance = ttp_n4_m3();
        let problem = instance.to_composite();
        (instance, problem)
    }

    /// Exhaustive certificate: no tuple in the identity-included joint
    /// neighborhood of `sol` is strictly better.
    fn is_joint_local_optimum(problem: &CompositeProblem, sol: &CompositeSolution) -> bool {
        let value = evaluate(problem, sol).unwrap();
        let factors: Vec<Neighborhood> = problem
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| c.neighborhood(sol.part(i)).with_identity())
            .collect();
        let joint = joint_neighborhood(factors).unwrap();
        for tuple in joint.iter() {
            let replacements: Vec<(usize, Part)> = tuple.into_iter().enumerate().collect();
            let candidate = problem.replace(sol, &replacements);
            if evaluate(problem, &candidate).unwrap().improves_on(&value) {
                return false;
            }
        }
        true
    }

    #[test]
    fn local_search_from_an_optimum_returns_it_unchanged() {
        let (instance, problem) = fixture();
        // The known global optimum of the fixture.
        let opt = instance.composite_solution(&TtpSolution {
            tour: vec![0, 2, 3, 1],
            plan: vec![true, false, false],
        });
        let result = joint_local_search(
            &problem,
            opt.clone(),
            &StopCondition::default(),
            LocalSearchPolicy::FirstImprovementRestart,
            0,
        )
        .unwrap();
        assert_eq!(result.best, opt);
        assert_eq!(result.trajectory.len(), 1, "zero accepted moves");
    }

    #[test]
    fn local_search_never_ends_below_its_start() {
        let (_, problem) = fixture();
        for policy in [
            LocalSearchPolicy::FirstImprovementRestart,
            LocalSearchPolicy::BestImprovementPass,
            LocalSearchPolicy::PaperLiteral,
        ] {
            for seed in 0..10 {
                let init = initial_solution(&problem, seed);
                let init_value = evaluate(&problem, &init).unwrap().value;
                let result =
                    joint_local_search(&problem, init, &StopCondition::default(), policy, seed)
                        .unwrap();
                assert!(
                    result.best_value >= init_value,
                    "{policy:?} seed {seed}: {} < {init_value}",
                    result.best_value
                );
            }
        }
    }

    #[test]
    fn staleness_stops_at_certified_joint_local_optima() {
        let (_, problem) = fixture();
        for seed in 0..20 {
            let init = initial_solution(&problem, seed);
            let result = joint_local_search(
                &problem,
                init,
                &StopCondition::default(),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap();
            assert!(
                is_joint_local_optimum(&problem, &result.best),
                "seed {seed} ended off a local optimum"
            );
        }
    }

    #[test]
    fn trajectories_are_monotone() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 3);
        let result = joint_local_search(
            &problem,
            init,
            &StopCondition::default(),
            LocalSearchPolicy::FirstImprovementRestart,
            3,
        )
        .unwrap();
        for window in result.trajectory.windows(2) {
            assert!(window[1].value >= window[0].value);
            assert!(window[1].evaluation >= window[0].evaluation);
        }
        assert_eq!(result.best_value, evaluate(&problem, &result.best).unwrap().value);
    }

    #[test]
    fn identical_seeds_reproduce_runs_exactly() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 9);
        let stop = StopCondition::default();
        let run = |seed| {
            iterated_local_search(
                &problem,
                init.clone(),
                &stop,
                &PerturbationStrength::uniform(2, 2),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap()
        };
        let a = run(5);
        let b = run(5);
        assert_eq!(a.best, b.best);
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.seed, b.seed);
    }

    #[test]
    fn zero_perturbation_reduces_to_plain_local_search() {
        let (_, problem) = fixture();
        for seed in 0..10 {
            let init = initial_solution(&problem, seed);
            let plain = joint_local_search(
                &problem,
                init.clone(),
                &StopCondition::default(),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap();
            let ils = iterated_local_search(
                &problem,
                init,
                &StopCondition::default().with_max_stale_passes(3),
                &PerturbationStrength::uniform(2, 0),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap();
            assert_eq!(plain.best, ils.best, "seed {seed}");
            assert_eq!(plain.best_value, ils.best_value);
        }
    }

    #[test]
    fn iterated_search_is_never_worse_than_its_first_descent() {
        let (_, problem) = fixture();
        for seed in 0..10 {
            let init = initial_solution(&problem, seed);
            let first = joint_local_search(
                &problem,
                init.clone(),
                &StopCondition::default(),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap();
            let ils = iterated_local_search(
                &problem,
                init,
                &StopCondition::none()
                    .with_max_evaluations(2_000)
                    .with_max_stale_passes(50),
                &PerturbationStrength::uniform(2, 2),
                LocalSearchPolicy::FirstImprovementRestart,
                seed,
            )
            .unwrap();
            assert!(ils.best_value >= first.best_value, "seed {seed}");
        }
    }

    #[test]
    fn evaluation_budgets_overshoot_at_most_one_pass() {
        let (_, problem) = fixture();
        let budget = 100;
        let init = initial_solution(&problem, 2);
        let joint_pass: usize = problem
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| c.neighborhood(init.part(i)).len() + 1)
            .product();
        let result = iterated_local_search(
            &problem,
            init,
            &StopCondition::none().with_max_evaluations(budget),
            &PerturbationStrength::uniform(2, 1),
            LocalSearchPolicy::FirstImprovementRestart,
            2,
        )
        .unwrap();
        assert!(
            result.evaluations <= budget + joint_pass as u64,
            "evaluations {} exceed budget {budget} plus one pass {joint_pass}",
            result.evaluations
        );
    }

    #[test]
    fn mismatched_perturbation_strength_is_rejected() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 0);
        assert!(matches!(
            iterated_local_search(
                &problem,
                init,
                &StopCondition::default(),
                &PerturbationStrength::uniform(5, 1),
                LocalSearchPolicy::FirstImprovementRestart,
                0,
            ),
            Err(CoreError::InvalidConfig(_))
        ));
    }

    #[test]
    fn acceptance_probability_matches_the_closed_form() {
        assert_eq!(acceptance_probability(0.5, 1.0), 1.0);
        assert_eq!(acceptance_probability(0.0, 1.0), 1.0);
        assert_eq!(acceptance_probability(-1.0, 0.0), 0.0);
        let temperature = 2.0f64;
        let delta = -temperature * std::f64::consts::LN_2;
        assert!((acceptance_probability(delta, temperature) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn worsening_acceptance_rate_is_one_half_at_delta_t_ln_two() {
        let temperature = 2.0f64;
        let delta = -temperature * std::f64::consts::LN_2;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let accepted = (0..10_000)
            .filter(|_| accept_move(delta, temperature, &mut rng))
            .count();
        let rate = accepted as f64 / 10_000.0;
        assert!((rate - 0.5).abs() <= 0.02, "rate {rate}");
        // At zero temperature no worsening move is ever accepted.
        let frozen = (0..10_000).filter(|_| accept_move(delta, 0.0, &mut rng)).count();
        assert_eq!(frozen, 0);
    }

    #[test]
    fn annealing_at_zero_temperature_cannot_leave_a_strict_optimum() {
        let (instance, problem) = fixture();
        let opt = instance.composite_solution(&TtpSolution {
            tour: vec![0, 2, 3, 1],
            plan: vec![true, false, false],
        });
        let opt_value = evaluate(&problem, &opt).unwrap().value;
        let result = simulated_annealing(
            &problem,
            opt,
            &StopCondition::none().with_max_evaluations(2_000),
            &AnnealingSchedule::new(0.0, 1.0, 50),
            13,
        )
        .unwrap();
        assert_eq!(result.best_value, opt_value);
    }

    #[test]
    fn annealing_returns_the_best_ever_solution() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 4);
        let result = simulated_annealing(
            &problem,
            init,
            &StopCondition::none().with_max_evaluations(3_000),
            &AnnealingSchedule::new(5.0, 0.95, 50),
            4,
        )
        .unwrap();
        assert_eq!(result.best_value, evaluate(&problem, &result.best).unwrap().value);
        for window in result.trajectory.windows(2) {
            assert!(window[1].value >= window[0].value);
        }
    }

    #[test]
    fn annealing_is_seed_deterministic() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 6);
        let stop = StopCondition::none().with_max_evaluations(1_500);
        let schedule = AnnealingSchedule::new(3.0, 0.9, 25);
        let a = simulated_annealing(&problem, init.clone(), &stop, &schedule, 77).unwrap();
        let b = simulated_annealing(&problem, init, &stop, &schedule, 77).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn invalid_schedules_are_rejected() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 0);
        for schedule in [
            AnnealingSchedule::new(-1.0, 0.9, 10),
            AnnealingSchedule::new(1.0, 0.0, 10),
            AnnealingSchedule::new(1.0, 1.5, 10),
            AnnealingSchedule::new(1.0, 0.9, 0),
        ] {
            assert!(matches!(
                simulated_annealing(
                    &problem,
                    init.clone(),
                    &StopCondition::default(),
                    &schedule,
                    0
                ),
                Err(CoreError::InvalidSchedule(_))
            ));
        }
    }

    #[test]
    fn unbounded_stops_are_rejected() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 0);
        assert!(matches!(
            joint_local_search(
                &problem,
                init,
                &StopCondition::none(),
                LocalSearchPolicy::FirstImprovementRestart,
                0,
            ),
            Err(CoreError::UnboundedStop)
        ));
    }

    #[test]
    fn target_value_stops_early() {
        let (_, problem) = fixture();
        let init = initial_solution(&problem, 1);
        let result = joint_local_search(
            &problem,
            init,
            &StopCondition::none()
                .with_max_evaluations(100_000)
                .with_target_value(-100.0),
            LocalSearchPolicy::FirstImprovementRestart,
            1,
        )
        .unwrap();
        // Any value reaches a -100 target under maximization.
        assert!(result.evaluations <= 2);
    }
}
