//! The component abstraction: one sub-problem of a composite problem.

use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;

use crate::neighborhood::Neighborhood;
use crate::part::Part;

/// Boxed iterator over parts; all enumeration in the framework is lazy.
pub type PartIter = Box<dyn Iterator<Item = Part>>;

/// Identifier of a component within a problem: a short symbolic id plus the
/// dense ordinal the framework uses for indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComponentId {
    pub id: String,
    pub index: usize,
}

impl std::fmt::Display for ComponentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// One sub-problem: its solution representation, validity rules, seeded
/// initializer and move structure.
///
/// Initializers must not depend on any other component's solution; that is
/// what makes a sub-problem a component in the first place. Interaction with
/// the rest of the problem happens exclusively through the composite
/// objective.
pub trait Component: Send + Sync {
    /// Short symbolic identifier, unique within a problem.
    fn id(&self) -> &str;

    /// Structural validity of a part for this component.
    fn validate(&self, part: &Part) -> Result<(), String>;

    /// Seeded initial solution. Must always succeed and must be computed
    /// from this component's own data only.
    fn initial(&self, rng: &mut ChaCha8Rng) -> Part;

    /// The finite move neighborhood around `part`. Candidates exclude `part`
    /// itself; enumeration order must be deterministic.
    fn neighborhood(&self, part: &Part) -> Neighborhood;

    /// One uniformly random neighborhood move, or `None` if `part` has no
    /// moves.
    fn random_move(&self, part: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        self.neighborhood(part).iter().choose(rng)
    }

    /// Exhaustive enumeration of this component's solution space as reachable
    /// from `part`, when that is feasible at all. Used by the dependency
    /// detector and by exact sub-solvers; `None` means the space is not
    /// enumerable.
    ///
    /// For components with free-standing variables the enumeration is the
    /// whole space and ignores `part`. For components that share state with
    /// others it is the orbit of `part` under this component's moves.
    fn space(&self, part: &Part) -> Option<PartIter> {
        let _ = part;
        None
    }

    /// Recombine two parts, when this component registers a crossover
    /// operator. `None` means no operator is registered.
    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        let _ = (a, b, rng);
        None
    }
}
