//! Stop conditions: a disjunction of budget bounds — a run halts as soon as
//! any bound trips.

use std::time::Duration;

use crate::error::CoreError;
use crate::problem::{Objective, Orientation};

/// Termination bounds for a search run. At least one bound must be set.
///
/// What counts as a "pass" for staleness depends on the strategy: a full
/// joint-neighborhood scan for local search, one perturb-and-descend cycle
/// for iterated local search, one cooling step for annealing, one round for
/// the coordinated sub-solver loop, one generation for the evolutionary loop.
#[derive(Clone, Debug, PartialEq)]
pub struct StopCondition {
    pub max_evaluations: Option<u64>,
    pub max_wall_time: Option<Duration>,
    pub max_stale_passes: Option<u64>,
    pub target_value: Option<f64>,
}

impl Default for StopCondition {
    /// One stale pass plus a million-evaluation safety cap.
    fn default() -> Self {
        StopCondition {
            max_evaluations: Some(1_000_000),
            max_wall_time: None,
            max_stale_passes: Some(1),
            target_value: None,
        }
    }
}

impl StopCondition {
    /// No bounds at all; combine with the `with_*` methods. A run refuses to
    /// start until at least one bound is set.
    pub fn none() -> Self {
        StopCondition {
            max_evaluations: None,
            max_wall_time: None,
            max_stale_passes: None,
            target_value: None,
        }
    }

    pub fn max_evaluations(bound: u64) -> Self {
        StopCondition::none().with_max_evaluations(bound)
    }

    pub fn max_stale_passes(bound: u64) -> Self {
        StopCondition::none().with_max_stale_passes(bound)
    }

    pub fn with_max_evaluations(mut self, bound: u64) -> Self {
        self.max_evaluations = Some(bound);
        self
    }

    pub fn with_max_wall_time(mut self, bound: Duration) -> Self {
        self.max_wall_time = Some(bound);
        self
    }

    pub fn with_max_stale_passes(mut self, bound: u64) -> Self {
        self.max_stale_passes = Some(bound);
        self
    }

    pub fn with_target_value(mut self, target: f64) -> Self {
        self.target_value = Some(target);
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.max_evaluations.is_none()
            && self.max_wall_time.is_none()
            && self.max_stale_passes.is_none()
            && self.target_value.is_none()
        {
            return Err(CoreError::UnboundedStop);
        }
        Ok(())
    }

    pub(crate) fn evaluations_exhausted(&self, evaluations: u64) -> bool {
        self.max_evaluations.is_some_and(|cap| evaluations >= cap)
    }

    pub(crate) fn time_exhausted(&self, elapsed: Duration) -> bool {
        self.max_wall_time.is_some_and(|cap| elapsed >= cap)
    }

    pub(crate) fn staleness_exhausted(&self, stale_passes: u64) -> bool {
        self.max_stale_passes.is_some_and(|cap| stale_passes >= cap)
    }

    pub(crate) fn target_reached(&self, best: &Objective) -> bool {
        self.target_value.is_some_and(|target| match best.orientation {
            Orientation::Maximize => best.value >= target,
            Orientation::Minimize => best.value <= target,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_staleness_and_a_safety_cap() {
        let stop = StopCondition::default();
        assert_eq!(stop.max_stale_passes, Some(1));
        assert_eq!(stop.max_evaluations, Some(1_000_000));
        stop.validate().unwrap();
    }

    #[test]
    fn all_none_is_invalid() {
        assert!(matches!(
            StopCondition::none().validate(),
            Err(CoreError::UnboundedStop)
        ));
    }

    #[test]
    fn target_respects_orientation() {
        let stop = StopCondition::none().with_target_value(0.0);
        let reached_min = Objective {
            orientation: Orientation::Minimize,
            value: 0.0,
        };
        let unreached_min = Objective {
            orientation: Orientation::Minimize,
            value: 2.0,
        };
        assert!(stop.target_reached(&reached_min));
        assert!(!stop.target_reached(&unreached_min));
        let reached_max = Objective {
            orientation: Orientation::Maximize,
            value: 1.0,
        };
        assert!(stop.target_reached(&reached_max));
    }
}
