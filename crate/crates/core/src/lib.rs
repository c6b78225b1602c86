//! tandem — metaheuristics for combinatorial problems built from several
//! interdependent NP-hard components.
//!
//! A problem is modeled as a set of *components*, each with its own solution
//! representation, initializer and move neighborhood, plus one global
//! objective over the whole solution tuple and a dependency graph recording
//! which components influence each other. On top of that model the crate
//! provides:
//!
//! - joint-neighborhood trajectory searches (local search over the Cartesian
//!   product of the component neighborhoods, iterated local search,
//!   simulated annealing);
//! - a coordinated sub-solver loop that alternates component-isolated
//!   solvers, passing fresh solutions between them each round;
//! - a generational evolutionary algorithm with per-component genetic
//!   operators and optional memetic improvement;
//! - an empirical dependency detector that certifies "B depends on A"
//!   verdicts by exhaustive conditional-optimum enumeration at desk scale;
//! - two ready-made testbeds: the travelling thief problem and killer
//!   sudoku, each with parsers, generators and brute-force oracles.
//!
//! The `tandem` binary exposes all of it behind `solve`, `verify`, `gen` and
//! `deps` subcommands.

pub mod cli;
pub mod component;
pub mod cosolver;
pub mod detect;
pub mod driver;
mod enumerate;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod neighborhood;
pub mod part;
pub mod problem;
pub mod problems;
pub mod result;
pub mod search;
pub mod stop;
pub mod verify;

pub use component::{Component, ComponentId, PartIter};
pub use cosolver::{cosolver, cosolver_round, CosolverState, Guarantee, SubSolver, SubSolverMode};
pub use detect::{detect_dependency, DependencyVerdict, DependencyWitness};
pub use error::CoreError;
pub use evolution::{crossover_composite, evolve, mutate_composite, EaConfig, MemeticHook};
pub use graph::DependencyGraph;
pub use neighborhood::{joint_neighborhood, JointNeighborhood, Neighborhood};
pub use part::{Part, PartValue};
pub use problem::{
    evaluate, initial_solution, CompositeProblem, CompositeProblemBuilder, CompositeSolution,
    Evaluator, Objective, Orientation,
};
pub use result::{RunResult, TrajectoryPoint};
pub use search::{
    iterated_local_search, joint_local_search, simulated_annealing, AnnealingSchedule,
    LocalSearchPolicy, PerturbationStrength,
};
pub use stop::StopCondition;
