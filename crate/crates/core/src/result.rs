//! Run results and best-so-far bookkeeping shared by all strategies.

use std::time::{Duration, Instant};

use crate::problem::{CompositeSolution, Evaluator, Objective};

/// One point of a run's objective trajectory: the best-so-far value after
/// the given number of objective evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub evaluation: u64,
    pub value: f64,
}

/// Outcome of one search run.
///
/// The trajectory records every strict improvement of the best-so-far value
/// and is therefore monotone in the improving direction. `best_value` is the
/// evaluated objective of `best`, bit-identical to re-evaluating it.
/// `wall_time` is the only field that varies between identically seeded
/// runs.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub best: CompositeSolution,
    pub best_value: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub evaluations: u64,
    pub iterations: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

/// Tracks the best-ever solution and its improvement trajectory during a run.
pub(crate) struct RunRecorder {
    best: CompositeSolution,
    best_objective: Objective,
    trajectory: Vec<TrajectoryPoint>,
    seed: u64,
    started: Instant,
}

impl RunRecorder {
    pub fn new(
        init: CompositeSolution,
        objective: Objective,
        evaluator: &Evaluator<'_>,
        seed: u64,
    ) -> Self {
        let trajectory = vec![TrajectoryPoint {
            evaluation: evaluator.evaluations(),
            value: objective.value,
        }];
        RunRecorder {
            best: init,
            best_objective: objective,
            trajectory,
            seed,
            started: Instant::now(),
        }
    }

    /// Record a candidate; updates best and trajectory only on strict
    /// improvement.
    pub fn observe(&mut self, sol: &CompositeSolution, objective: Objective, evaluator: &Evaluator<'_>) {
        if objective.improves_on(&self.best_objective) {
            self.best = sol.clone();
            self.best_objective = objective;
            self.trajectory.push(TrajectoryPoint {
                evaluation: evaluator.evaluations(),
                value: objective.value,
            });
        }
    }

    pub fn best(&self) -> &CompositeSolution {
        &self.best
    }

    pub fn best_objective(&self) -> Objective {
        self.best_objective
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn finish(self, evaluator: &Evaluator<'_>, iterations: u64) -> RunResult {
        let wall_time = self.started.elapsed();
        RunResult {
            best: self.best,
            best_value: self.best_objective.value,
            trajectory: self.trajectory,
            evaluations: evaluator.evaluations(),
            iterations,
            seed: self.seed,
            wall_time,
        }
    }
}
