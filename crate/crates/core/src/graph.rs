//! Dependency graphs over component identifiers.

use crate::component::ComponentId;
use crate::error::CoreError;

/// Directed dependency edges among components. An edge `(dependent, dependee)`
/// reads "dependent ← dependee": changing the dependee's solution can change
/// which solutions are best for the dependent.
///
/// Mutual edges are permitted; self-loops are not. Only declared edges are
/// stored — transitive dependence is never inferred.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<ComponentId>,
    edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    pub fn new(nodes: Vec<ComponentId>) -> Self {
        DependencyGraph {
            nodes,
            edges: Vec::new(),
        }
    }

    /// Declare "dependent ← dependee". Idempotent for duplicate edges.
    pub fn add_edge(&mut self, dependent: usize, dependee: usize) -> Result<(), CoreError> {
        if dependent == dependee {
            return Err(CoreError::InvalidConfig(format!(
                "dependency graph: self-loop on component {dependent}"
            )));
        }
        if dependent >= self.nodes.len() || dependee >= self.nodes.len() {
            return Err(CoreError::InvalidConfig(format!(
                "dependency graph: edge ({dependent}, {dependee}) references an undeclared node"
            )));
        }
        if !self.edges.contains(&(dependent, dependee)) {
            self.edges.push((dependent, dependee));
        }
        Ok(())
    }

    /// Declare an edge by component id strings.
    pub fn add_edge_by_id(&mut self, dependent: &str, dependee: &str) -> Result<(), CoreError> {
        let find = |id: &str| {
            self.nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| CoreError::InvalidConfig(format!("unknown component id {id:?}")))
        };
        let dependent = find(dependent)?;
        let dependee = find(dependee)?;
        self.add_edge(dependent, dependee)
    }

    pub fn nodes(&self) -> &[ComponentId] {
        &self.nodes
    }

    /// Edges as `(dependent, dependee)` index pairs, in declaration order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn depends_on(&self, dependent: usize, dependee: usize) -> bool {
        self.edges.contains(&(dependent, dependee))
    }

    pub fn mutually_dependent(&self, a: usize, b: usize) -> bool {
        self.depends_on(a, b) && self.depends_on(b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(ids: &[&str]) -> Vec<ComponentId> {
        ids.iter()
            .enumerate()
            .map(|(index, id)| ComponentId {
                id: id.to_string(),
                index,
            })
            .collect()
    }

    #[test]
    fn mutual_edges_are_permitted() {
        let mut graph = DependencyGraph::new(nodes(&["A", "B", "C"]));
        graph.add_edge_by_id("A", "B").unwrap();
        graph.add_edge_by_id("B", "A").unwrap();
        graph.add_edge_by_id("C", "A").unwrap();
        assert!(graph.mutually_dependent(0, 1));
        assert!(graph.depends_on(2, 0));
        assert!(!graph.depends_on(0, 2));
    }

    #[test]
    fn self_loops_are_rejected() {
        let mut graph = DependencyGraph::new(nodes(&["A"]));
        assert!(graph.add_edge(0, 0).is_err());
    }

    #[test]
    fn undeclared_endpoints_are_rejected() {
        let mut graph = DependencyGraph::new(nodes(&["A"]));
        assert!(graph.add_edge(0, 1).is_err());
        assert!(graph.add_edge_by_id("A", "Z").is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let mut graph = DependencyGraph::new(nodes(&["A", "B"]));
        graph.add_edge(0, 1).unwrap();
        graph.add_edge(0, 1).unwrap();
        assert_eq!(graph.edges().len(), 1);
    }
}
