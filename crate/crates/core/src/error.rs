//! Error types shared across the framework.

use thiserror::Error;

/// Errors raised by the composite-problem framework and its search strategies.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A part of a composite solution failed its component's validity check.
    #[error("invalid solution for component {component}: {reason}")]
    InvalidSolution { component: String, reason: String },

    /// A composite solution does not carry exactly one part per component.
    #[error("solution has {got} parts but the problem has {expected} components")]
    MissingPart { expected: usize, got: usize },

    /// The objective produced a non-finite score for a valid solution.
    #[error("objective returned a non-finite value: {value}")]
    NonFiniteObjective { value: f64 },

    /// `joint_neighborhood` was called with no factors.
    #[error("joint neighborhood requires at least one factor")]
    EmptyFactors,

    /// An exhaustive enumeration would exceed the configured candidate cap.
    #[error("enumeration exceeds the cap of {cap} candidates")]
    SpaceTooLarge { cap: u64 },

    /// The dependency detector needs at least two distinct dependee samples.
    #[error("dependency detection needs at least 2 samples, got {got}")]
    TooFewSamples { got: usize },

    /// An annealing schedule parameter is out of range.
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    /// A search or solver configuration parameter is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A stop condition with no bound set would never terminate a run.
    #[error("invalid stop condition: at least one bound must be set")]
    UnboundedStop,

    /// A sub-solver declared `improving` returned a strictly worse solution.
    #[error("sub-solver {name} violated its improving contract in round {round}: {before} -> {after}")]
    SubSolverContractViolation {
        name: String,
        round: u64,
        before: f64,
        after: f64,
    },

    /// A component taking part in crossover has no registered operator.
    #[error("component {component} has no crossover operator registered")]
    NoOperatorRegistered { component: String },
}
