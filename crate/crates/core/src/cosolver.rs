//! Coordinated sub-solvers: each component is improved in isolation with the
//! other parts frozen, and fresh solutions are handed to the next sub-solver
//! in the same round.
//!
//! A round applies one sub-solver per component, in a fixed order. Sub-solver
//! `i` sees the solutions of components already updated this round and the
//! previous-round solutions of the rest. With two components the round is
//! exactly the alternating loop `a' = solveA(a, b); b' = solveB(a', b)`.
//!
//! Sub-solvers declaring an [`Guarantee::Improving`] contract are checked,
//! not trusted: a round fails with `SubSolverContractViolation` the moment an
//! "improving" solver returns a worse-in-context solution. With improving
//! sub-solvers the round-end objective sequence never degrades, and the loop
//! reaches a fixed point once no sub-solver can change its part.
//!
//! The sequential loop here is the semantics of record and the only
//! deterministic mode. Runs with different seeds are independent and may
//! execute in parallel; problems and solutions are immutable.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::evolution::{crossover_composite, mutate_composite};
use crate::part::Part;
use crate::problem::{CompositeProblem, CompositeSolution, Evaluator, Objective};
use crate::result::{RunRecorder, RunResult};
use crate::stop::StopCondition;

/// What a sub-solver promises about its output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guarantee {
    /// Never returns a solution that scores worse than its input in the
    /// frozen context. Checked after every call.
    Improving,
    /// May return anything valid; round monotonicity claims are suspended
    /// and only best-ever bookkeeping holds.
    Arbitrary,
}

/// Built-in sub-solver flavors for problems that expose move neighborhoods
/// (descent) or enumerable spaces (exact).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubSolverMode {
    /// First-improvement descent over the component's own moves.
    Descent,
    /// Exhaustive conditional optimum over the component's space.
    Exact,
}

type SubSolveFn = dyn Fn(
        &CompositeProblem,
        &Evaluator<'_>,
        &CompositeSolution,
        u64,
        &mut ChaCha8Rng,
    ) -> Result<Part, CoreError>
    + Send
    + Sync;

/// A component-isolated solver: given the current composite solution, it
/// returns a new part for its component, reading all other parts as frozen
/// context.
#[derive(Clone)]
pub struct SubSolver {
    component: usize,
    name: String,
    guarantee: Guarantee,
    solve: Arc<SubSolveFn>,
}

impl SubSolver {
    pub fn new<F>(component: usize, name: impl Into<String>, guarantee: Guarantee, solve: F) -> Self
    where
        F: Fn(
                &CompositeProblem,
                &Evaluator<'_>,
                &CompositeSolution,
                u64,
                &mut ChaCha8Rng,
            ) -> Result<Part, CoreError>
            + Send
            + Sync
            + 'static,
    {
        SubSolver {
            component,
            name: name.into(),
            guarantee,
            solve: Arc::new(solve),
        }
    }

    /// First-improvement descent over the component's move neighborhood,
    /// with the rest of the tuple frozen. Spends at most `budget`
    /// evaluations per call. Improving by construction.
    pub fn improving_descent(component: usize, name: impl Into<String>) -> Self {
        SubSolver::new(
            component,
            name,
            Guarantee::Improving,
            move |problem, evaluator, current, budget, _rng| {
                let start = evaluator.evaluations();
                let mut context = current.clone();
                let mut part = current.part(component).clone();
                let mut best = evaluator.evaluate(&context)?;
                'descend: loop {
                    let neighborhood = problem.component(component).neighborhood(&part);
                    for candidate in neighborhood.iter() {
                        if evaluator.evaluations().saturating_sub(start) >= budget {
                            return Ok(part);
                        }
                        let with_candidate =
                            problem.replace(&context, &[(component, candidate.clone())]);
                        let objective = evaluator.evaluate(&with_candidate)?;
                        if objective.improves_on(&best) {
                            best = objective;
                            part = candidate;
                            context = with_candidate;
                            continue 'descend;
                        }
                    }
                    return Ok(part);
                }
            },
        )
    }

    /// Exhaustive conditional optimum over the component's enumerable space.
    /// Ties keep the incumbent part, so fixed points are stable. Ignores the
    /// per-call budget; intended for desk-scale instances.
    pub fn exhaustive(component: usize, name: impl Into<String>) -> Self {
        SubSolver::new(
            component,
            name,
            Guarantee::Improving,
            move |problem, evaluator, current, _budget, _rng| {
                let from = current.part(component);
                let space = problem.component(component).space(from).ok_or_else(|| {
                    CoreError::InvalidConfig(format!(
                        "component {} has no enumerable space; exact mode unavailable",
                        problem.component(component).id()
                    ))
                })?;
                let current_objective = evaluator.evaluate(current)?;
                let mut best: Option<(Objective, Part)> = None;
                for candidate in space {
                    let with_candidate =
                        problem.replace(current, &[(component, candidate.clone())]);
                    let objective = evaluator.evaluate(&with_candidate)?;
                    if best
                        .as_ref()
                        .is_none_or(|(incumbent, _)| objective.improves_on(incumbent))
                    {
                        best = Some((objective, candidate));
                    }
                }
                match best {
                    Some((objective, part)) if objective.improves_on(&current_objective) => {
                        Ok(part)
                    }
                    _ => Ok(from.clone()),
                }
            },
        )
    }

    pub fn component(&self) -> usize {
        self.component
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn guarantee(&self) -> Guarantee {
        self.guarantee
    }

    pub fn solve(
        &self,
        problem: &CompositeProblem,
        evaluator: &Evaluator<'_>,
        current: &CompositeSolution,
        budget: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Part, CoreError> {
        (self.solve)(problem, evaluator, current, budget, rng)
    }
}

impl std::fmt::Debug for SubSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubSolver")
            .field("component", &self.component)
            .field("name", &self.name)
            .field("guarantee", &self.guarantee)
            .finish_non_exhaustive()
    }
}

/// Loop state between rounds.
#[derive(Clone, Debug)]
pub struct CosolverState {
    pub incumbent: CompositeSolution,
    pub round: u64,
    pub last_round_changed: bool,
}

impl CosolverState {
    pub fn new(incumbent: CompositeSolution) -> Self {
        CosolverState {
            incumbent,
            round: 0,
            last_round_changed: true,
        }
    }
}

/// Options for the coordinated loop.
#[derive(Clone, Debug)]
pub struct CosolverConfig {
    /// Evaluation budget per sub-solver call. Defaults to
    /// `total budget / (2 * component count)` when the stop condition caps
    /// evaluations, unbounded otherwise.
    pub budget_per_call: Option<u64>,
    /// Apply genetic operators (crossover with the best-ever solution, then
    /// mutation) as a perturbation stage whenever a round reaches a fixed
    /// point, instead of stopping there. Exploration continues until a stop
    /// bound trips; best-ever bookkeeping still holds.
    pub genetic_perturbation: bool,
    /// Per-component mutation probability used by the perturbation stage.
    pub perturbation_mutation_rate: f64,
}

impl Default for CosolverConfig {
    fn default() -> Self {
        CosolverConfig {
            budget_per_call: None,
            genetic_perturbation: false,
            perturbation_mutation_rate: 0.5,
        }
    }
}

fn check_cover(problem: &CompositeProblem, subsolvers: &[SubSolver]) -> Result<(), CoreError> {
    let k = problem.component_count();
    if subsolvers.len() != k {
        return Err(CoreError::InvalidConfig(format!(
            "need exactly one sub-solver per component: got {} for {k} components",
            subsolvers.len()
        )));
    }
    let mut seen = vec![false; k];
    for ss in subsolvers {
        if ss.component() >= k || seen[ss.component()] {
            return Err(CoreError::InvalidConfig(format!(
                "sub-solver {} does not cover a fresh component",
                ss.name()
            )));
        }
        seen[ss.component()] = true;
    }
    Ok(())
}

/// One round: apply the sub-solvers in order, each seeing the freshest parts
/// of components already updated this round. Returns the advanced state and
/// the round-end objective.
pub fn cosolver_round(
    problem: &CompositeProblem,
    evaluator: &Evaluator<'_>,
    state: &CosolverState,
    subsolvers: &[SubSolver],
    budget_per_call: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(CosolverState, Objective), CoreError> {
    check_cover(problem, subsolvers)?;
    let round = state.round + 1;
    let mut current = state.incumbent.clone();
    let mut current_objective = evaluator.evaluate(&current)?;
    let mut changed = false;
    for ss in subsolvers {
        let part = ss.solve(problem, evaluator, &current, budget_per_call, rng)?;
        let candidate = problem.replace(&current, &[(ss.component(), part)]);
        let objective = evaluator.evaluate(&candidate)?;
        if ss.guarantee() == Guarantee::Improving && current_objective.improves_on(&objective) {
            return Err(CoreError::SubSolverContractViolation {
                name: ss.name().to_string(),
                round,
                before: current_objective.value,
                after: objective.value,
            });
        }
        if candidate != current {
            changed = true;
        }
        current = candidate;
        current_objective = objective;
    }
    Ok((
        CosolverState {
            incumbent: current,
            round,
            last_round_changed: changed,
        },
        current_objective,
    ))
}

/// Iterate rounds until a stop bound trips or a fixed point is reached.
/// Returns the best-ever incumbent.
pub fn cosolver(
    problem: &CompositeProblem,
    init: CompositeSolution,
    subsolvers: &[SubSolver],
    stop: &StopCondition,
    seed: u64,
) -> Result<RunResult, CoreError> {
    cosolver_with(problem, init, subsolvers, stop, &CosolverConfig::default(), seed)
}

/// [`cosolver`] with explicit options.
pub fn cosolver_with(
    problem: &CompositeProblem,
    init: CompositeSolution,
    subsolvers: &[SubSolver],
    stop: &StopCondition,
    config: &CosolverConfig,
    seed: u64,
) -> Result<RunResult, CoreError> {
    stop.validate()?;
    check_cover(problem, subsolvers)?;
    let evaluator = Evaluator::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_objective = evaluator.evaluate(&init)?;
    let mut recorder = RunRecorder::new(init.clone(), initial_objective, &evaluator, seed);
    let per_call_default = stop
        .max_evaluations
        .map(|budget| (budget / (2 * problem.component_count() as u64)).max(1))
        .unwrap_or(u64::MAX);
    let budget_per_call = config.budget_per_call.unwrap_or(per_call_default);
    let mut state = CosolverState::new(init);
    let mut stale_rounds = 0u64;
    loop {
        if stop.evaluations_exhausted(evaluator.evaluations())
            || stop.time_exhausted(recorder.elapsed())
            || stop.target_reached(&recorder.best_objective())
            || stop.staleness_exhausted(stale_rounds)
        {
            break;
        }
        if state.round > 0 && !state.last_round_changed {
            if !config.genetic_perturbation {
                break;
            }
            // Fixed point: restart the loop from a recombined and mutated
            // tuple instead of stopping.
            let crossed =
                crossover_composite(problem, &state.incumbent, recorder.best(), &mut rng)?;
            let perturbed = mutate_composite(
                problem,
                &crossed,
                config.perturbation_mutation_rate,
                &mut rng,
            );
            state.incumbent = perturbed;
            state.last_round_changed = true;
            continue;
        }
        let best_before = recorder.best_objective();
        let (next, objective) =
            cosolver_round(problem, &evaluator, &state, subsolvers, budget_per_call, &mut rng)?;
        recorder.observe(&next.incumbent, objective, &evaluator);
        state = next;
        if recorder.best_objective().improves_on(&best_before) {
            stale_rounds = 0;
        } else {
            stale_rounds += 1;
        }
    }
    Ok(recorder.finish(&evaluator, state.round))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::conditional_optima;
    use crate::problems::ttp::fixtures::ttp_n4_m3;
    use crate::problems::ttp::TtpSolution;
    use crate::{evaluate, initial_solution};

    fn fixture() -> (crate::problems::ttp::TtpInstance, CompositeProblem) {
        let instance = ttp_n4_m3();
        let problem = instance.to_composite();
        (instance, problem)
    }

    fn exact_subsolvers(instance: &crate::problems::ttp::TtpInstance) -> Vec<SubSolver> {
        vec![
            instance.subsolver_tour(SubSolverMode::Exact),
            instance.subsolver_plan(SubSolverMode::Exact),
        ]
    }

    #[test]
    fn identity_subsolvers_reach_a_fixed_point_immediately() {
        let (_, problem) = fixture();
        let identity = |component: usize| {
            SubSolver::new(component, format!("id-{component}"), Guarantee::Improving, 
                move |_, _, current: &CompositeSolution, _, _| Ok(current.part(component).clone()))
        };
        let evaluator = Evaluator::new(&problem);
        let init = initial_solution(&problem, 3);
        let state = CosolverState::new(init.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (next, _) = cosolver_round(
            &problem,
            &evaluator,
            &state,
            &[identity(0), identity(1)],
            u64::MAX,
            &mut rng,
        )
        .unwrap();
        assert_eq!(next.incumbent, init);
        assert_eq!(next.round, 1);
        assert!(!next.last_round_changed);
    }

    #[test]
    fn exact_rounds_never_degrade_and_reach_a_fixed_point() {
        let (instance, problem) = fixture();
        let subsolvers = exact_subsolvers(&instance);
        for seed in 0..20 {
            let evaluator = Evaluator::new(&problem);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = CosolverState::new(initial_solution(&problem, seed));
            let mut last = evaluate(&problem, &state.incumbent).unwrap();
            let mut rounds = 0;
            while state.round == 0 || state.last_round_changed {
                let (next, objective) =
                    cosolver_round(&problem, &evaluator, &state, &subsolvers, u64::MAX, &mut rng)
                        .unwrap();
                assert!(
                    !last.improves_on(&objective),
                    "seed {seed}: round {} degraded",
                    next.round
                );
                last = objective;
                state = next;
                rounds += 1;
                assert!(rounds <= 10, "seed {seed}: no fixed point within 10 rounds");
            }
            // Idempotence: one more round changes nothing.
            let (again, _) =
                cosolver_round(&problem, &evaluator, &state, &subsolvers, u64::MAX, &mut rng)
                    .unwrap();
            assert_eq!(again.incumbent, state.incumbent);
            assert!(!again.last_round_changed);
        }
    }

    #[test]
    fn fixed_points_of_exact_subsolvers_are_coordinate_wise_optimal() {
        let (instance, problem) = fixture();
        let subsolvers = exact_subsolvers(&instance);
        let stop = StopCondition::none().with_max_evaluations(100_000);
        for seed in 0..10 {
            let init = initial_solution(&problem, seed);
            let result = cosolver(&problem, init, &subsolvers, &stop, seed).unwrap();
            // No single-component replacement of any kind improves the result.
            let value = evaluate(&problem, &result.best).unwrap();
            for component in 0..problem.component_count() {
                let (best_value, _) =
                    conditional_optima(&problem, &result.best, component, 1_000_000, 0.0).unwrap();
                assert!(
                    best_value <= value.value,
                    "seed {seed}: component {component} can still improve"
                );
            }
        }
    }

    #[test]
    fn second_subsolver_sees_first_subsolvers_fresh_part() {
        let (instance, problem) = fixture();
        let observed = std::sync::Arc::new(std::sync::Mutex::new(Vec::<Part>::new()));
        let log = std::sync::Arc::clone(&observed);
        let spy = SubSolver::new(1, "spy-plan", Guarantee::Improving, move |_, _, current: &CompositeSolution, _, _| {
            log.lock().unwrap().push(current.part(0).clone());
            Ok(current.part(1).clone())
        });
        let subsolvers = vec![instance.subsolver_tour(SubSolverMode::Exact), spy];
        let evaluator = Evaluator::new(&problem);
        // Start from the identity tour with an empty plan; the exact tour
        // solver will change the tour in round 1.
        let init = instance.composite_solution(&TtpSolution::identity_empty(&instance));
        let state = CosolverState::new(init.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (next, _) =
            cosolver_round(&problem, &evaluator, &state, &subsolvers, u64::MAX, &mut rng).unwrap();
        let seen = observed.lock().unwrap();
        assert_eq!(seen.len(), 1);
        assert_ne!(seen[0], *init.part(0), "spy saw the stale tour");
        assert_eq!(seen[0], *next.incumbent.part(0));
    }

    #[test]
    fn degrading_subsolver_labeled_improving_is_caught() {
        let (instance, problem) = fixture();
        // Claims to improve the plan but deliberately empties or fills it to
        // whatever scores worse in context.
        let liar = SubSolver::new(1, "liar-plan", Guarantee::Improving, move |problem: &CompositeProblem,
                   evaluator: &Evaluator<'_>,
                   current: &CompositeSolution,
                   _,
                   _| {
            let m = current.part(1).expect_ref::<Vec<bool>>().len();
            let mut worst: Option<(f64, Part)> = None;
            for plan in [vec![false; m], {
                let mut p = vec![false; m];
                p[0] = true;
                p
            }] {
                let part = Part::new(plan);
                let candidate = problem.replace(current, &[(1, part.clone())]);
                let value = evaluator.evaluate(&candidate).unwrap().score();
                if worst.as_ref().is_none_or(|(w, _)| value < *w) {
                    worst = Some((value, part));
                }
            }
            Ok(worst.unwrap().1)
        });
        let subsolvers = vec![instance.subsolver_tour(SubSolverMode::Exact), liar];
        let opt = instance.composite_solution(&TtpSolution {
            tour: vec![0, 2, 3, 1],
            plan: vec![true, false, false],
        });
        let err = cosolver(
            &problem,
            opt,
            &subsolvers,
            &StopCondition::none().with_max_evaluations(10_000),
            0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CoreError::SubSolverContractViolation { round: 1, .. }
        ));
    }

    #[test]
    fn generalized_loop_matches_a_hand_written_two_component_loop() {
        let (instance, problem) = fixture();
        let subsolvers = exact_subsolvers(&instance);
        for seed in 0..10 {
            let init = initial_solution(&problem, seed);

            // Hand-written alternation: a' = solveA(a, b); b' = solveB(a', b).
            let hand_evaluator = Evaluator::new(&problem);
            let mut hand_rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hand = init.clone();
            let mut hand_trace = Vec::new();
            for _ in 0..6 {
                let tour_part = subsolvers[0]
                    .solve(&problem, &hand_evaluator, &hand, u64::MAX, &mut hand_rng)
                    .unwrap();
                let with_tour = problem.replace(&hand, &[(0, tour_part)]);
                let plan_part = subsolvers[1]
                    .solve(&problem, &hand_evaluator, &with_tour, u64::MAX, &mut hand_rng)
                    .unwrap();
                hand = problem.replace(&with_tour, &[(1, plan_part)]);
                hand_trace.push(hand.clone());
            }

            // The generalized round loop at k = 2.
            let loop_evaluator = Evaluator::new(&problem);
            let mut loop_rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = CosolverState::new(init);
            let mut loop_trace = Vec::new();
            for _ in 0..6 {
                let (next, _) = cosolver_round(
                    &problem,
                    &loop_evaluator,
                    &state,
                    &subsolvers,
                    u64::MAX,
                    &mut loop_rng,
                )
                .unwrap();
                state = next;
                loop_trace.push(state.incumbent.clone());
            }

            assert_eq!(hand_trace, loop_trace, "seed {seed}");
        }
    }

    #[test]
    fn improving_descent_rounds_are_monotone() {
        let (_, problem) = fixture();
        let subsolvers = vec![
            SubSolver::improving_descent(0, "tour-descent"),
            SubSolver::improving_descent(1, "plan-descent"),
        ];
        for seed in 0..10 {
            let evaluator = Evaluator::new(&problem);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = CosolverState::new(initial_solution(&problem, seed));
            let mut last = evaluate(&problem, &state.incumbent).unwrap();
            for _ in 0..5 {
                let budget = 1 + (seed % 7) * 3;
                let (next, objective) =
                    cosolver_round(&problem, &evaluator, &state, &subsolvers, budget, &mut rng)
                        .unwrap();
                assert!(!last.improves_on(&objective), "seed {seed} degraded");
                last = objective;
                state = next;
            }
        }
    }

    #[test]
    fn subsolver_cover_is_checked() {
        let (instance, problem) = fixture();
        let stop = StopCondition::default();
        let init = initial_solution(&problem, 0);
        // Too few.
        assert!(matches!(
            cosolver(
                &problem,
                init.clone(),
                &[instance.subsolver_tour(SubSolverMode::Descent)],
                &stop,
                0
            ),
            Err(CoreError::InvalidConfig(_))
        ));
        // Duplicate component.
        assert!(matches!(
            cosolver(
                &problem,
                init,
                &[
                    instance.subsolver_tour(SubSolverMode::Descent),
                    instance.subsolver_tour(SubSolverMode::Descent)
                ],
                &stop,
                0
            ),
            Err(CoreError::InvalidConfig(_))
        ));
    }

    #[test]
    fn best_ever_is_monotone_and_matches_its_solution() {
        let (instance, problem) = fixture();
        let subsolvers = exact_subsolvers(&instance);
        let stop = StopCondition::none().with_max_evaluations(5_000);
        let result = cosolver(&problem, initial_solution(&problem, 2), &subsolvers, &stop, 2)
            .unwrap();
        assert_eq!(
            result.best_value,
            evaluate(&problem, &result.best).unwrap().value
        );
        for window in result.trajectory.windows(2) {
            assert!(window[1].value >= window[0].value);
        }
    }

    #[test]
    fn genetic_perturbation_keeps_running_past_fixed_points() {
        let (instance, problem) = fixture();
        let subsolvers = exact_subsolvers(&instance);
        let stop = StopCondition::none().with_max_evaluations(3_000);
        let plain = cosolver(
            &problem,
            initial_solution(&problem, 6),
            &subsolvers,
            &stop,
            6,
        )
        .unwrap();
        let config = CosolverConfig {
            genetic_perturbation: true,
            ..CosolverConfig::default()
        };
        let perturbed = cosolver_with(
            &problem,
            initial_solution(&problem, 6),
            &subsolvers,
            &stop,
            &config,
            6,
        )
        .unwrap();
        // Perturbation mode spends the full budget exploring.
        assert!(perturbed.evaluations >= plain.evaluations);
        assert!(perturbed.best_value >= plain.best_value);
        assert!(evaluate(&problem, &perturbed.best).is_ok());
    }
}
