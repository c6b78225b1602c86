//! Composite problems: components, a dependency graph and one global
//! objective over solution tuples.
//!
//! A composite solution carries exactly one part per component and is only
//! ever scored as a whole. Components with disjoint variables replace their
//! parts independently; problems whose components share state install a
//! reconcile hook that merges candidate parts back into one coherent tuple.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::component::{Component, ComponentId};
use crate::error::CoreError;
use crate::graph::DependencyGraph;
use crate::part::Part;

/// Whether larger or smaller objective values are better.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Minimize,
    Maximize,
}

/// A finite objective value together with its orientation.
///
/// Searches compare via [`Objective::score`], which negates minimization
/// values so that one maximizing convention applies everywhere; the raw
/// `value` stays in the problem's own units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub orientation: Orientation,
    pub value: f64,
}

impl Objective {
    /// Internal comparison score: always "larger is better".
    pub fn score(&self) -> f64 {
        match self.orientation {
            Orientation::Maximize => self.value,
            Orientation::Minimize => -self.value,
        }
    }

    /// Strictly better than `other`.
    pub fn improves_on(&self, other: &Objective) -> bool {
        self.score() > other.score()
    }
}

/// One solution per component, in component order.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeSolution {
    parts: Vec<Part>,
}

impl CompositeSolution {
    pub fn new(parts: Vec<Part>) -> Self {
        CompositeSolution { parts }
    }

    pub fn part(&self, component: usize) -> &Part {
        &self.parts[component]
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

type ObjectiveFn = dyn Fn(&CompositeSolution) -> f64 + Send + Sync;
type ReconcileFn = dyn Fn(&CompositeSolution, &[(usize, Part)]) -> CompositeSolution + Send + Sync;
type AlignFn = dyn Fn(Vec<Part>) -> Vec<Part> + Send + Sync;
type SolutionCheckFn = dyn Fn(&CompositeSolution) -> Result<(), String> + Send + Sync;

/// A problem composed of interdependent components.
#[derive(Clone)]
pub struct CompositeProblem {
    name: String,
    components: Vec<Arc<dyn Component>>,
    dependencies: DependencyGraph,
    orientation: Orientation,
    objective: Arc<ObjectiveFn>,
    reconcile: Option<Arc<ReconcileFn>>,
    align_initial: Option<Arc<AlignFn>>,
    solution_check: Option<Arc<SolutionCheckFn>>,
}

impl CompositeProblem {
    pub fn builder(name: impl Into<String>) -> CompositeProblemBuilder {
        CompositeProblemBuilder {
            name: name.into(),
            components: Vec::new(),
            edges: Vec::new(),
            orientation: None,
            objective: None,
            reconcile: None,
            align_initial: None,
            solution_check: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> &[Arc<dyn Component>] {
        &self.components
    }

    pub fn component(&self, index: usize) -> &dyn Component {
        self.components[index].as_ref()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_ids(&self) -> Vec<ComponentId> {
        self.components
            .iter()
            .enumerate()
            .map(|(index, c)| ComponentId {
                id: c.id().to_string(),
                index,
            })
            .collect()
    }

    pub fn component_index(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c.id() == id)
    }

    pub fn dependencies(&self) -> &DependencyGraph {
        &self.dependencies
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Build a new solution from `base` with the given parts replaced.
    ///
    /// For disjoint-variable problems this swaps the parts in place. When a
    /// reconcile hook is installed (shared-state problems), the hook merges
    /// the candidates into one coherent tuple; replacements are applied in
    /// the given order.
    pub fn replace(&self, base: &CompositeSolution, replacements: &[(usize, Part)]) -> CompositeSolution {
        match &self.reconcile {
            Some(reconcile) => reconcile(base, replacements),
            None => {
                let mut parts = base.parts.clone();
                for (index, part) in replacements {
                    parts[*index] = part.clone();
                }
                CompositeSolution::new(parts)
            }
        }
    }

    fn raw_objective(&self, sol: &CompositeSolution) -> f64 {
        (self.objective)(sol)
    }

    fn check_valid(&self, sol: &CompositeSolution) -> Result<(), CoreError> {
        if sol.len() != self.components.len() {
            return Err(CoreError::MissingPart {
                expected: self.components.len(),
                got: sol.len(),
            });
        }
        for (component, part) in self.components.iter().zip(sol.parts()) {
            component
                .validate(part)
                .map_err(|reason| CoreError::InvalidSolution {
                    component: component.id().to_string(),
                    reason,
                })?;
        }
        if let Some(check) = &self.solution_check {
            check(sol).map_err(|reason| CoreError::InvalidSolution {
                component: self.name.clone(),
                reason,
            })?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("name", &self.name)
            .field(
                "components",
                &self.components.iter().map(|c| c.id()).collect::<Vec<_>>(),
            )
            .field("orientation", &self.orientation)
            .finish_non_exhaustive()
    }
}

/// Builder for [`CompositeProblem`].
pub struct CompositeProblemBuilder {
    name: String,
    components: Vec<Arc<dyn Component>>,
    edges: Vec<(String, String)>,
    orientation: Option<Orientation>,
    objective: Option<Arc<ObjectiveFn>>,
    reconcile: Option<Arc<ReconcileFn>>,
    align_initial: Option<Arc<AlignFn>>,
    solution_check: Option<Arc<SolutionCheckFn>>,
}

impl CompositeProblemBuilder {
    pub fn component(mut self, component: Arc<dyn Component>) -> Self {
        self.components.push(component);
        self
    }

    /// Declare "dependent ← dependee" by component id.
    pub fn depends_on(mut self, dependent: &str, dependee: &str) -> Self {
        self.edges.push((dependent.to_string(), dependee.to_string()));
        self
    }

    pub fn maximize<F>(mut self, objective: F) -> Self
    where
        F: Fn(&CompositeSolution) -> f64 + Send + Sync + 'static,
    {
        self.orientation = Some(Orientation::Maximize);
        self.objective = Some(Arc::new(objective));
        self
    }

    pub fn minimize<F>(mut self, objective: F) -> Self
    where
        F: Fn(&CompositeSolution) -> f64 + Send + Sync + 'static,
    {
        self.orientation = Some(Orientation::Minimize);
        self.objective = Some(Arc::new(objective));
        self
    }

    /// Install a shared-state merge hook; see [`CompositeProblem::replace`].
    pub fn reconcile<F>(mut self, reconcile: F) -> Self
    where
        F: Fn(&CompositeSolution, &[(usize, Part)]) -> CompositeSolution + Send + Sync + 'static,
    {
        self.reconcile = Some(Arc::new(reconcile));
        self
    }

    /// Install a hook that aligns independently constructed initial parts
    /// into one coherent tuple (shared-state problems).
    pub fn align_initial<F>(mut self, align: F) -> Self
    where
        F: Fn(Vec<Part>) -> Vec<Part> + Send + Sync + 'static,
    {
        self.align_initial = Some(Arc::new(align));
        self
    }

    /// Install an extra tuple-level validity check run on every evaluation.
    pub fn solution_check<F>(mut self, check: F) -> Self
    where
        F: Fn(&CompositeSolution) -> Result<(), String> + Send + Sync + 'static,
    {
        self.solution_check = Some(Arc::new(check));
        self
    }

    pub fn build(self) -> Result<CompositeProblem, CoreError> {
        if self.components.is_empty() {
            return Err(CoreError::InvalidConfig(
                "a composite problem needs at least one component".into(),
            ));
        }
        let ids: Vec<ComponentId> = self
            .components
            .iter()
            .enumerate()
            .map(|(index, c)| ComponentId {
                id: c.id().to_string(),
                index,
            })
            .collect();
        for (i, a) in ids.iter().enumerate() {
            for b in ids.iter().skip(i + 1) {
                if a.id == b.id {
                    return Err(CoreError::InvalidConfig(format!(
                        "duplicate component id {:?}",
                        a.id
                    )));
                }
            }
        }
        let objective = self.objective.ok_or_else(|| {
            CoreError::InvalidConfig("composite problem has no objective".into())
        })?;
        let mut dependencies = DependencyGraph::new(ids);
        for (dependent, dependee) in &self.edges {
            dependencies.add_edge_by_id(dependent, dependee)?;
        }
        Ok(CompositeProblem {
            name: self.name,
            components: self.components,
            dependencies,
            orientation: self.orientation.expect("orientation set with objective"),
            objective,
            reconcile: self.reconcile,
            align_initial: self.align_initial,
            solution_check: self.solution_check,
        })
    }
}

/// Evaluate a total, valid solution tuple.
///
/// Deterministic: the same tuple always yields the same finite value. Runs
/// that need evaluation accounting go through an [`Evaluator`] instead.
pub fn evaluate(problem: &CompositeProblem, sol: &CompositeSolution) -> Result<Objective, CoreError> {
    problem.check_valid(sol)?;
    let value = problem.raw_objective(sol);
    if !value.is_finite() {
        return Err(CoreError::NonFiniteObjective { value });
    }
    Ok(Objective {
        orientation: problem.orientation(),
        value,
    })
}

/// Construct a valid initial tuple, deterministically from `seed`.
///
/// Every component initializer runs on its own seeded stream and never sees
/// another component's part. Shared-state problems then align the parts into
/// one coherent tuple.
pub fn initial_solution(problem: &CompositeProblem, seed: u64) -> CompositeSolution {
    let mut parts: Vec<Part> = problem
        .components()
        .iter()
        .enumerate()
        .map(|(index, component)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            component.initial(&mut rng)
        })
        .collect();
    if let Some(align) = &problem.align_initial {
        parts = align(parts);
    }
    CompositeSolution::new(parts)
}

/// Run context wrapping a problem with an atomic evaluation counter.
///
/// Evaluation is pure, so one evaluator may be shared by parallel workers;
/// the counter is the only mutable state.
pub struct Evaluator<'a> {
    problem: &'a CompositeProblem,
    count: AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a CompositeProblem) -> Self {
        Evaluator {
            problem,
            count: AtomicU64::new(0),
        }
    }

    pub fn problem(&self) -> &CompositeProblem {
        self.problem
    }

    pub fn evaluate(&self, sol: &CompositeSolution) -> Result<Objective, CoreError> {
        let objective = evaluate(self.problem, sol)?;
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok(objective)
    }

    pub fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}
