//! Per-component neighborhoods and their Cartesian-product join.
//!
//! A [`Neighborhood`] is a finite, lazily enumerable set of candidate
//! replacement solutions for one component. A [`JointNeighborhood`] is the
//! row-major Cartesian product of several of them: the joint candidates are
//! tuples with one candidate per factor, and the first factor varies slowest.
//! Nothing is materialized before it is requested — the product keeps one
//! live candidate per factor.

use std::sync::Arc;

use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;

use crate::component::PartIter;
use crate::error::CoreError;
use crate::part::Part;

type Factory = Arc<dyn Fn() -> PartIter + Send + Sync>;

/// Candidate replacement solutions around one component's current solution.
///
/// The candidates are produced by a repeatable factory so the neighborhood
/// can be enumerated any number of times in the same deterministic order.
#[derive(Clone)]
pub struct Neighborhood {
    source: Part,
    includes_identity: bool,
    factory: Factory,
}

impl Neighborhood {
    /// A neighborhood whose candidates exclude the source solution itself.
    pub fn new<F>(source: Part, factory: F) -> Self
    where
        F: Fn() -> PartIter + Send + Sync + 'static,
    {
        Neighborhood {
            source,
            includes_identity: false,
            factory: Arc::new(factory),
        }
    }

    /// The same neighborhood with the source prepended as candidate zero, so
    /// a joint product over several factors can leave this component
    /// unchanged.
    pub fn with_identity(self) -> Self {
        if self.includes_identity {
            return self;
        }
        let source = self.source.clone();
        let inner = self.factory.clone();
        Neighborhood {
            source: self.source,
            includes_identity: true,
            factory: Arc::new(move || {
                Box::new(std::iter::once(source.clone()).chain(inner()))
            }),
        }
    }

    pub fn source(&self) -> &Part {
        &self.source
    }

    pub fn includes_identity(&self) -> bool {
        self.includes_identity
    }

    /// Fresh deterministic enumeration of the candidates.
    pub fn iter(&self) -> PartIter {
        (self.factory)()
    }

    /// Number of candidates. Counts by enumeration.
    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }

    /// One uniformly random candidate.
    pub fn choose(&self, rng: &mut ChaCha8Rng) -> Option<Part> {
        self.iter().choose(rng)
    }
}

impl std::fmt::Debug for Neighborhood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Neighborhood")
            .field("source", &self.source)
            .field("includes_identity", &self.includes_identity)
            .finish_non_exhaustive()
    }
}

/// Lazy row-major Cartesian product of per-component neighborhoods.
pub struct JointNeighborhood {
    factors: Vec<Neighborhood>,
}

/// Build the joint neighborhood of the given factors, in order.
pub fn joint_neighborhood(factors: Vec<Neighborhood>) -> Result<JointNeighborhood, CoreError> {
    if factors.is_empty() {
        return Err(CoreError::EmptyFactors);
    }
    Ok(JointNeighborhood { factors })
}

impl JointNeighborhood {
    pub fn factors(&self) -> &[Neighborhood] {
        &self.factors
    }

    /// Product of the factor cardinalities. Zero if any factor is empty.
    pub fn cardinality(&self) -> usize {
        self.factors.iter().map(Neighborhood::len).product()
    }

    /// Row-major enumeration of candidate tuples: the last factor cycles
    /// fastest, the first slowest, matching nested per-component loops.
    pub fn iter(&self) -> JointIter<'_> {
        JointIter {
            factors: &self.factors,
            iters: Vec::new(),
            current: Vec::new(),
            primed: false,
            done: false,
        }
    }
}

/// Odometer-style iterator over a [`JointNeighborhood`].
pub struct JointIter<'a> {
    factors: &'a [Neighborhood],
    iters: Vec<PartIter>,
    current: Vec<Part>,
    primed: bool,
    done: bool,
}

impl Iterator for JointIter<'_> {
    type Item = Vec<Part>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.primed {
            self.primed = true;
            for factor in self.factors {
                let mut iter = factor.iter();
                match iter.next() {
                    Some(part) => {
                        self.current.push(part);
                        self.iters.push(iter);
                    }
                    None => {
                        // Any empty factor annihilates the product.
                        self.done = true;
                        return None;
                    }
                }
            }
            return Some(self.current.clone());
        }
        // Advance the fastest-cycling factor first, carrying leftwards.
        for pos in (0..self.factors.len()).rev() {
            if let Some(part) = self.iters[pos].next() {
                self.current[pos] = part;
                return Some(self.current.clone());
            }
            let mut fresh = self.factors[pos].iter();
            self.current[pos] = fresh.next().expect("factor was non-empty when primed");
            self.iters[pos] = fresh;
        }
        self.done = true;
        None
    }
}
