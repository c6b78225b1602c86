//! Generational evolutionary layer: per-component genetic operators over
//! composite solutions, tournament selection, elitism and an optional
//! memetic improvement hook.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cosolver::{cosolver_round, CosolverState, SubSolver};
use crate::error::CoreError;
use crate::problem::{
    initial_solution, CompositeProblem, CompositeSolution, Evaluator, Objective,
};
use crate::result::{RunRecorder, RunResult};
use crate::search::{local_search_core, LocalSearchPolicy};
use crate::stop::StopCondition;

/// Improvement procedure applied to offspring.
#[derive(Clone, Debug, PartialEq)]
pub enum MemeticHook {
    None,
    /// Truncated joint local search with the given evaluation budget,
    /// applied to each offspring with the given probability.
    JointLocalSearch { budget: u64, probability: f64 },
    /// A budgeted coordinated sub-solver loop (first-improvement descent per
    /// component), applied with the given probability.
    Cosolver { budget: u64, probability: f64 },
}

/// Configuration of the evolutionary loop.
#[derive(Clone, Debug)]
pub struct EaConfig {
    pub population_size: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub memetic: MemeticHook,
    /// Hard generation cap, in addition to the stop condition.
    pub generations: Option<u64>,
    pub stop: StopCondition,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population_size: 32,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.3,
            elitism_count: 1,
            memetic: MemeticHook::None,
            generations: None,
            stop: StopCondition::none()
                .with_max_evaluations(100_000)
                .with_max_stale_passes(50),
        }
    }
}

impl EaConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.population_size < 2 {
            return Err(CoreError::InvalidConfig(
                "population size must be at least 2".into(),
            ));
        }
        if self.tournament_size == 0 {
            return Err(CoreError::InvalidConfig(
                "tournament size must be at least 1".into(),
            ));
        }
        for (name, rate) in [
            ("crossover rate", self.crossover_rate),
            ("mutation rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(CoreError::InvalidConfig(format!(
                    "{name} must be within [0, 1], got {rate}"
                )));
            }
        }
        if self.elitism_count >= self.population_size {
            return Err(CoreError::InvalidConfig(format!(
                "elitism count {} must be smaller than the population size {}",
                self.elitism_count, self.population_size
            )));
        }
        match &self.memetic {
            MemeticHook::None => {}
            MemeticHook::JointLocalSearch { budget, probability }
            | MemeticHook::Cosolver { budget, probability } => {
                if *budget == 0 {
                    return Err(CoreError::InvalidConfig(
                        "memetic budget must be positive".into(),
                    ));
                }
                if !(0.0..=1.0).contains(probability) {
                    return Err(CoreError::InvalidConfig(format!(
                        "memetic probability must be within [0, 1], got {probability}"
                    )));
                }
            }
        }
        if self.generations.is_none() {
            self.stop.validate()?;
        }
        Ok(())
    }
}

/// A genome with its cached fitness and birth generation. Genomes are
/// immutable; variation always produces a fresh individual, so the cache is
/// never stale.
#[derive(Clone, Debug)]
pub struct Individual {
    pub genome: CompositeSolution,
    pub fitness: Objective,
    pub age: u64,
}

/// Per-component crossover of two parents. Every component must register an
/// operator; the recombined parts are merged through the problem's usual
/// replacement path, so shared-state problems stay coherent.
pub fn crossover_composite(
    problem: &CompositeProblem,
    parent1: &CompositeSolution,
    parent2: &CompositeSolution,
    rng: &mut ChaCha8Rng,
) -> Result<CompositeSolution, CoreError> {
    let mut replacements = Vec::with_capacity(problem.component_count());
    for (index, component) in problem.components().iter().enumerate() {
        let child = component
            .crossover(parent1.part(index), parent2.part(index), rng)
            .ok_or_else(|| CoreError::NoOperatorRegistered {
                component: component.id().to_string(),
            })?;
        replacements.push((index, child));
    }
    Ok(problem.replace(parent1, &replacements))
}

/// Per-component mutation: with probability `rate`, each component applies
/// one uniformly random neighborhood move. `rate` 0 returns the input
/// unchanged; `rate` 1 attempts exactly one move per component.
pub fn mutate_composite(
    problem: &CompositeProblem,
    sol: &CompositeSolution,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> CompositeSolution {
    let mut current = sol.clone();
    for index in 0..problem.component_count() {
        if rng.gen::<f64>() < rate {
            if let Some(part) = problem.component(index).random_move(current.part(index), rng) {
                current = problem.replace(&current, &[(index, part)]);
            }
        }
    }
    current
}

/// The best individual of a population (first among equals).
pub fn best_individual(population: &[Individual]) -> &Individual {
    let mut best = 0;
    for idx in 1..population.len() {
        if population[idx].fitness.improves_on(&population[best].fitness) {
            best = idx;
        }
    }
    &population[best]
}

fn tournament(population: &[Individual], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.gen_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..population.len());
        if population[challenger]
            .fitness
            .improves_on(&population[winner].fitness)
        {
            winner = challenger;
        }
    }
    winner
}

fn apply_memetic(
    problem: &CompositeProblem,
    evaluator: &Evaluator<'_>,
    recorder: &mut RunRecorder,
    config: &EaConfig,
    genome: CompositeSolution,
    rng: &mut ChaCha8Rng,
) -> Result<(CompositeSolution, Objective), CoreError> {
    let outer_cap = config.stop.max_evaluations.unwrap_or(u64::MAX);
    match &config.memetic {
        MemeticHook::None => {
            let fitness = evaluator.evaluate(&genome)?;
            Ok((genome, fitness))
        }
        MemeticHook::JointLocalSearch { budget, probability } => {
            let fitness = evaluator.evaluate(&genome)?;
            if rng.gen::<f64>() >= *probability {
                return Ok((genome, fitness));
            }
            let inner_stop = StopCondition {
                max_evaluations: Some(
                    evaluator.evaluations().saturating_add(*budget).min(outer_cap),
                ),
                max_wall_time: config.stop.max_wall_time,
                max_stale_passes: Some(1),
                target_value: None,
            };
            let (improved, improved_obj, _, _) = local_search_core(
                problem,
                evaluator,
                recorder,
                genome,
                fitness,
                &inner_stop,
                LocalSearchPolicy::FirstImprovementRestart,
            )?;
            Ok((improved, improved_obj))
        }
        MemeticHook::Cosolver { budget, probability } => {
            let fitness = evaluator.evaluate(&genome)?;
            if rng.gen::<f64>() >= *probability {
                return Ok((genome, fitness));
            }
            let subsolvers: Vec<SubSolver> = (0..problem.component_count())
                .map(|index| {
                    SubSolver::improving_descent(
                        index,
                        format!("memetic-{}", problem.component(index).id()),
                    )
                })
                .collect();
            let per_call = (*budget / (2 * problem.component_count() as u64)).max(1);
            let cap = evaluator.evaluations().saturating_add(*budget).min(outer_cap);
            let mut state = CosolverState::new(genome);
            let mut objective = fitness;
            while evaluator.evaluations() < cap {
                let (next, obj) =
                    cosolver_round(problem, evaluator, &state, &subsolvers, per_call, rng)?;
                objective = obj;
                let fixed_point = !next.last_round_changed;
                state = next;
                if fixed_point {
                    break;
                }
            }
            recorder.observe(&state.incumbent, objective, evaluator);
            Ok((state.incumbent, objective))
        }
    }
}

/// Run the generational loop and return the best individual ever evaluated.
pub fn evolve(
    problem: &CompositeProblem,
    config: &EaConfig,
    seed: u64,
) -> Result<RunResult, CoreError> {
    evolve_observed(problem, config, seed, |_, _| {})
}

/// [`evolve`] with a per-generation observer receiving the generation number
/// and the freshly formed population. Generation 0 is the initial population.
pub fn evolve_observed(
    problem: &CompositeProblem,
    config: &EaConfig,
    seed: u64,
    mut observer: impl FnMut(u64, &[Individual]),
) -> Result<RunResult, CoreError> {
    config.validate()?;
    let evaluator = Evaluator::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population: Vec<Individual> = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let genome = initial_solution(problem, rng.gen::<u64>());
        let fitness = evaluator.evaluate(&genome)?;
        population.push(Individual {
            genome,
            fitness,
            age: 0,
        });
    }
    let best0 = best_individual(&population);
    let mut recorder = RunRecorder::new(best0.genome.clone(), best0.fitness, &evaluator, seed);
    observer(0, &population);

    let mut generation = 0u64;
    let mut stale_generations = 0u64;
    loop {
        if config.generations.is_some_and(|cap| generation >= cap)
            || config.stop.evaluations_exhausted(evaluator.evaluations())
            || config.stop.time_exhausted(recorder.elapsed())
            || config.stop.target_reached(&recorder.best_objective())
            || config.stop.staleness_exhausted(stale_generations)
        {
            break;
        }
        generation += 1;
        let best_before = recorder.best_objective();

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| {
            population[b]
                .fitness
                .score()
                .partial_cmp(&population[a].fitness.score())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut next: Vec<Individual> = order
            .iter()
            .take(config.elitism_count)
            .map(|&idx| population[idx].clone())
            .collect();

        while next.len() < config.population_size {
            let p1 = tournament(&population, config.tournament_size, &mut rng);
            let p2 = tournament(&population, config.tournament_size, &mut rng);
            let mut genome = if rng.gen::<f64>() < config.crossover_rate {
                crossover_composite(
                    problem,
                    &population[p1].genome,
                    &population[p2].genome,
                    &mut rng,
                )?
            } else {
                population[p1].genome.clone()
            };
            genome = mutate_composite(problem, &genome, config.mutation_rate, &mut rng);
            let (genome, fitness) = apply_memetic(
                problem,
                &evaluator,
                &mut recorder,
                config,
                genome,
                &mut rng,
            )?;
            recorder.observe(&genome, fitness, &evaluator);
            next.push(Individual {
                genome,
                fitness,
                age: generation,
            });
        }
        population = next;
        observer(generation, &population);
        if recorder.best_objective().improves_on(&best_before) {
            stale_generations = 0;
        } else {
            stale_generations += 1;
        }
    }
    Ok(recorder.finish(&evaluator, generation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::{Component, PartIter};
    use crate::neighborhood::Neighborhood;
    use crate::part::Part;
    use crate::problems::killersudoku;
    use crate::problems::ttp::fixtures::ttp_n4_m3;
    use crate::evaluate;
    use std::sync::atomic::{AtomicU64, Ordering};
    use std::sync::Arc;

    fn fixture() -> CompositeProblem {
        ttp_n4_m3().to_composite()
    }

    #[test]
    fn crossover_of_identical_parents_is_the_parent() {
        let problem = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..20 {
            let parent = initial_solution(&problem, seed);
            let child = crossover_composite(&problem, &parent, &parent, &mut rng).unwrap();
            assert_eq!(child, parent);
        }
        let (instance, _) = killersudoku::generate(2, 5, 3).unwrap();
        let ks = instance.to_composite();
        for seed in 0..20 {
            let parent = initial_solution(&ks, seed);
            let child = crossover_composite(&ks, &parent, &parent, &mut rng).unwrap();
            assert_eq!(child, parent);
        }
    }

    #[test]
    fn crossover_children_stay_valid() {
        let problem = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..100 {
            let a = initial_solution(&problem, seed);
            let b = initial_solution(&problem, seed + 1_000);
            let child = crossover_composite(&problem, &a, &b, &mut rng).unwrap();
            assert!(evaluate(&problem, &child).is_ok());
        }
    }

    #[test]
    fn mutation_rate_zero_is_identity() {
        let problem = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = initial_solution(&problem, 3);
        let mutated = mutate_composite(&problem, &sol, 0.0, &mut rng);
        assert_eq!(mutated, sol);
    }

    /// Counts how often its moves are requested.
    struct CountingComponent {
        id: String,
        calls: Arc<AtomicU64>,
    }

    impl Component for CountingComponent {
        fn id(&self) -> &str {
            &self.id
        }

        fn validate(&self, part: &Part) -> Result<(), String> {
            part.downcast_ref::<i64>()
                .map(|_| ())
                .ok_or_else(|| "not an integer".into())
        }

        fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
            Part::new(rng.gen_range(0..10i64))
        }

        fn neighborhood(&self, part: &Part) -> Neighborhood {
            let current = *part.expect_ref::<i64>();
            Neighborhood::new(part.clone(), move || {
                Box::new((0..10i64).filter(move |v| *v != current).map(Part::new)) as PartIter
            })
        }

        fn random_move(&self, part: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.neighborhood(part).choose(rng)
        }
    }

    #[test]
    fn mutation_rate_one_attempts_one_move_per_component() {
        let counters: Vec<Arc<AtomicU64>> =
            (0..3).map(|_| Arc::new(AtomicU64::new(0))).collect();
        let mut builder = CompositeProblem::builder("counting");
        for (idx, counter) in counters.iter().enumerate() {
            builder = builder.component(Arc::new(CountingComponent {
                id: format!("C{idx}"),
                calls: Arc::clone(counter),
            }));
        }
        let problem = builder.maximize(|_| 0.0).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sol = initial_solution(&problem, 4);
        mutate_composite(&problem, &sol, 1.0, &mut rng);
        for counter in &counters {
            assert_eq!(counter.load(Ordering::Relaxed), 1);
        }
    }

    #[test]
    fn repeated_mutation_preserves_validity() {
        let ttp = fixture();
        let (instance, _) = killersudoku::generate(2, 11, 3).unwrap();
        let ks = instance.to_composite();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for problem in [&ttp, &ks] {
            let mut sol = initial_solution(problem, 5);
            for _ in 0..10_000 {
                sol = mutate_composite(problem, &sol, 0.7, &mut rng);
            }
            assert!(evaluate(problem, &sol).is_ok());
        }
    }

    #[test]
    fn elitism_keeps_best_of_generation_monotone() {
        let problem = fixture();
        let config = EaConfig {
            population_size: 12,
            generations: Some(30),
            ..EaConfig::default()
        };
        let mut bests: Vec<f64> = Vec::new();
        evolve_observed(&problem, &config, 7, |_, population| {
            bests.push(best_individual(population).fitness.value);
        })
        .unwrap();
        assert!(bests.len() > 1);
        for window in bests.windows(2) {
            assert!(window[1] >= window[0], "best-of-generation degraded");
        }
    }

    #[test]
    fn no_variation_operators_no_novel_genomes() {
        let problem = fixture();
        let config = EaConfig {
            population_size: 2,
            tournament_size: 2,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            elitism_count: 1,
            memetic: MemeticHook::None,
            generations: Some(15),
            ..EaConfig::default()
        };
        let mut initial_genomes: Vec<CompositeSolution> = Vec::new();
        evolve_observed(&problem, &config, 9, |generation, population| {
            if generation == 0 {
                initial_genomes = population.iter().map(|i| i.genome.clone()).collect();
            } else {
                for individual in population {
                    assert!(
                        initial_genomes.contains(&individual.genome),
                        "generation {generation} invented a genome with no variation active"
                    );
                }
            }
        })
        .unwrap();
    }

    #[test]
    fn evolve_is_seed_deterministic() {
        let problem = fixture();
        let config = EaConfig {
            population_size: 10,
            generations: Some(12),
            memetic: MemeticHook::JointLocalSearch {
                budget: 64,
                probability: 0.5,
            },
            ..EaConfig::default()
        };
        let a = evolve(&problem, &config, 21).unwrap();
        let b = evolve(&problem, &config, 21).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn budget_overshoot_is_bounded_by_one_generation() {
        let problem = fixture();
        let budget = 500;
        for memetic in [
            MemeticHook::None,
            MemeticHook::JointLocalSearch {
                budget: 40,
                probability: 1.0,
            },
            MemeticHook::Cosolver {
                budget: 40,
                probability: 1.0,
            },
        ] {
            let config = EaConfig {
                population_size: 8,
                memetic: memetic.clone(),
                stop: StopCondition::none().with_max_evaluations(budget),
                ..EaConfig::default()
            };
            let result = evolve(&problem, &config, 2).unwrap();
            // One generation may evaluate each fresh child once plus run its
            // memetic hook (re-evaluating its start), everything else is
            // clamped at the cap.
            let hook_budget = match &memetic {
                MemeticHook::None => 0,
                MemeticHook::JointLocalSearch { budget, .. }
                | MemeticHook::Cosolver { budget, .. } => *budget,
            };
            let generation_cost = 8 * (2 + hook_budget + 8);
            assert!(
                result.evaluations <= budget + generation_cost,
                "{memetic:?}: {} evaluations for a cap of {budget}",
                result.evaluations
            );
        }
    }

    #[test]
    fn memetic_hooks_never_hurt_the_child() {
        let problem = fixture();
        let config = EaConfig {
            population_size: 8,
            generations: Some(10),
            memetic: MemeticHook::Cosolver {
                budget: 100,
                probability: 1.0,
            },
            ..EaConfig::default()
        };
        let plain = EaConfig {
            memetic: MemeticHook::None,
            ..config.clone()
        };
        let with_hook = evolve(&problem, &config, 31).unwrap();
        let without = evolve(&problem, &plain, 31).unwrap();
        // Same generations; the memetic run spends more evaluations and must
        // not end below the plain run's start.
        assert!(with_hook.evaluations >= without.evaluations);
        assert!(evaluate(&problem, &with_hook.best).is_ok());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_configs = [
            EaConfig {
                population_size: 1,
                ..EaConfig::default()
            },
            EaConfig {
                tournament_size: 0,
                ..EaConfig::default()
            },
            EaConfig {
                crossover_rate: 1.5,
                ..EaConfig::default()
            },
            EaConfig {
                mutation_rate: -0.1,
                ..EaConfig::default()
            },
            EaConfig {
                elitism_count: 32,
                ..EaConfig::default()
            },
            EaConfig {
                memetic: MemeticHook::JointLocalSearch {
                    budget: 0,
                    probability: 0.5,
                },
                ..EaConfig::default()
            },
        ];
        for config in bad_configs {
            assert!(config.validate().is_err());
        }
    }

    #[test]
    fn missing_crossover_operator_is_reported() {
        let counter = Arc::new(AtomicU64::new(0));
        let problem = CompositeProblem::builder("no-crossover")
            .component(Arc::new(CountingComponent {
                id: "C0".into(),
                calls: counter,
            }))
            .maximize(|sol| *sol.part(0).expect_ref::<i64>() as f64)
            .build()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = initial_solution(&problem, 0);
        let b = initial_solution(&problem, 1);
        assert!(matches!(
            crossover_composite(&problem, &a, &b, &mut rng),
            Err(CoreError::NoOperatorRegistered { .. })
        ));
    }
}
