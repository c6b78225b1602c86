//! A synthetic decoupled benchmark: each component picks an index into its
//! own payoff table and the objective is the plain sum of the picks. By
//! additivity, no component's conditional optimum ever depends on another —
//! the dependency detector must report independence for every ordered pair.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::component::{Component, PartIter};
use crate::error::CoreError;
use crate::neighborhood::Neighborhood;
use crate::part::Part;
use crate::problem::CompositeProblem;

struct TableComponent {
    id: String,
    size: usize,
}

impl Component for TableComponent {
    fn id(&self) -> &str {
        &self.id
    }

    fn validate(&self, part: &Part) -> Result<(), String> {
        let value = part
            .downcast_ref::<usize>()
            .ok_or_else(|| "part is not an index".to_string())?;
        if *value < self.size {
            Ok(())
        } else {
            Err(format!("index {value} outside 0..{}", self.size))
        }
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
        Part::new(rng.gen_range(0..self.size))
    }

    fn neighborhood(&self, part: &Part) -> Neighborhood {
        let current = *part.expect_ref::<usize>();
        let size = self.size;
        Neighborhood::new(part.clone(), move || {
            Box::new((0..size).filter(move |v| *v != current).map(Part::new)) as PartIter
        })
    }

    fn space(&self, _part: &Part) -> Option<PartIter> {
        Some(Box::new((0..self.size).map(Part::new)))
    }

    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        Some(if rng.gen_bool(0.5) { a.clone() } else { b.clone() })
    }
}

/// Build a maximization problem whose objective is `sum(tables[i][pick_i])`.
/// One table per component; every table needs at least one entry.
pub fn additive_problem(tables: Vec<Vec<f64>>) -> Result<CompositeProblem, CoreError> {
    if tables.is_empty() {
        return Err(CoreError::InvalidConfig("need at least one table".into()));
    }
    if tables.iter().any(|t| t.is_empty()) {
        return Err(CoreError::InvalidConfig("empty payoff table".into()));
    }
    let mut builder = CompositeProblem::builder("additive");
    for (index, table) in tables.iter().enumerate() {
        builder = builder.component(Arc::new(TableComponent {
            id: format!("C{index}"),
            size: table.len(),
        }));
    }
    let tables = Arc::new(tables);
    Ok(builder
        .maximize(move |sol| {
            tables
                .iter()
                .enumerate()
                .map(|(index, table)| table[*sol.part(index).expect_ref::<usize>()])
                .sum()
        })
        .build()
        .expect("additive problem is well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{evaluate, initial_solution, CompositeSolution};

    #[test]
    fn objective_is_the_sum_of_picks() {
        let problem = additive_problem(vec![vec![1.0, 5.0], vec![2.0, 0.0, 7.0]]).unwrap();
        let sol = CompositeSolution::new(vec![Part::new(1usize), Part::new(2usize)]);
        assert_eq!(evaluate(&problem, &sol).unwrap().value, 12.0);
    }

    #[test]
    fn initials_are_valid() {
        let problem = additive_problem(vec![vec![0.0; 4], vec![0.0; 3], vec![0.0; 2]]).unwrap();
        for seed in 0..20 {
            let sol = initial_solution(&problem, seed);
            assert!(evaluate(&problem, &sol).is_ok());
        }
    }
}
