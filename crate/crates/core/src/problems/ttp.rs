//! The travelling thief problem: a tour component and a packing component
//! coupled through carried weight.
//!
//! A thief visits every city exactly once, starting and ending at city 1,
//! and may pick items stored in the cities. Picked weight slows travel
//! linearly from `max_speed` (empty) down to `min_speed` (at capacity), and
//! the thief pays rent proportional to total travel time. The objective is
//! picked profit minus rent, maximized. Items are picked on arrival at their
//! home city; city 1 holds no items.
//!
//! Instances use a line-oriented text format with a key/value header and
//! `NODE_COORD_SECTION` / `ITEMS SECTION` sections, mirroring the published
//! benchmark layout so benchmark files parse unchanged. A second
//! `MATRIX SECTION` form with an explicit distance matrix is accepted for
//! hand-built fixtures.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::component::{Component, PartIter};
use crate::cosolver::{SubSolver, SubSolverMode};
use crate::enumerate::multiset_permutations;
use crate::neighborhood::Neighborhood;
use crate::part::Part;
use crate::problem::{CompositeProblem, CompositeSolution};

/// Component id of the tour component.
pub const TOUR: &str = "TOUR";
/// Component id of the packing component.
pub const PLAN: &str = "PLAN";

#[derive(Debug, Error)]
pub enum TtpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("picked weight {weight} exceeds capacity {capacity}")]
    CapacityExceeded { weight: f64, capacity: f64 },
    #[error("enumeration of {candidates} candidates exceeds the cap of {cap}")]
    SpaceTooLarge { candidates: u128, cap: u64 },
}

/// How distances are derived from node coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DistanceRounding {
    /// Exact Euclidean distances.
    #[default]
    Exact,
    /// Rounded to the nearest integer.
    Nearest,
    /// Rounded up, as used by several published benchmark files.
    Ceil,
}

/// One item: home city (never the starting city), profit and weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtpItem {
    /// Zero-based home city index; never 0.
    pub city: usize,
    pub profit: f64,
    pub weight: f64,
}

/// A complete thief solution: tour plus packing plan.
#[derive(Clone, Debug, PartialEq)]
pub struct TtpSolution {
    /// Permutation of all cities, zero-based, starting at city 0.
    pub tour: Vec<usize>,
    /// One pick flag per item.
    pub plan: Vec<bool>,
}

impl TtpSolution {
    /// The identity tour (cities in index order) with nothing picked.
    pub fn identity_empty(instance: &TtpInstance) -> Self {
        TtpSolution {
            tour: (0..instance.cities()).collect(),
            plan: vec![false; instance.items().len()],
        }
    }
}

/// All optimal solutions of an instance, tie-aware, plus the optimal value.
#[derive(Clone, Debug)]
pub struct TtpOptima {
    pub value: f64,
    pub solutions: Vec<TtpSolution>,
}

impl TtpOptima {
    pub fn contains(&self, solution: &TtpSolution) -> bool {
        self.solutions.iter().any(|s| s == solution)
    }
}

/// A travelling thief instance with a symmetric distance matrix.
#[derive(Clone, Debug)]
pub struct TtpInstance {
    name: String,
    n: usize,
    dist: Vec<f64>,
    coords: Option<Vec<(f64, f64)>>,
    rounding: DistanceRounding,
    items: Vec<TtpItem>,
    capacity: f64,
    min_speed: f64,
    max_speed: f64,
    renting_rate: f64,
}

impl TtpInstance {
    /// Build an instance from an explicit distance matrix.
    pub fn from_matrix(
        name: impl Into<String>,
        dist: Vec<Vec<f64>>,
        items: Vec<TtpItem>,
        capacity: f64,
        min_speed: f64,
        max_speed: f64,
        renting_rate: f64,
    ) -> Result<Self, TtpError> {
        let n = dist.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in &dist {
            if row.len() != n {
                return Err(TtpError::Invalid("distance matrix is not square".into()));
            }
            flat.extend_from_slice(row);
        }
        let instance = TtpInstance {
            name: name.into(),
            n,
            dist: flat,
            coords: None,
            rounding: DistanceRounding::Exact,
            items,
            capacity,
            min_speed,
            max_speed,
            renting_rate,
        };
        instance.check()?;
        Ok(instance)
    }

    /// Build an instance from node coordinates.
    pub fn from_coords(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        rounding: DistanceRounding,
        items: Vec<TtpItem>,
        capacity: f64,
        min_speed: f64,
        max_speed: f64,
        renting_rate: f64,
    ) -> Result<Self, TtpError> {
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                let d = (dx * dx + dy * dy).sqrt();
                dist[i * n + j] = match rounding {
                    DistanceRounding::Exact => d,
                    DistanceRounding::Nearest => d.round(),
                    DistanceRounding::Ceil => d.ceil(),
                };
            }
        }
        let instance = TtpInstance {
            name: name.into(),
            n,
            dist,
            coords: Some(coords),
            rounding,
            items,
            capacity,
            min_speed,
            max_speed,
            renting_rate,
        };
        instance.check()?;
        Ok(instance)
    }

    fn check(&self) -> Result<(), TtpError> {
        if self.n < 2 {
            return Err(TtpError::Invalid("need at least two cities".into()));
        }
        for i in 0..self.n {
            if self.dist[i * self.n + i] != 0.0 {
                return Err(TtpError::Invalid(format!("non-zero diagonal at city {i}")));
            }
            for j in 0..self.n {
                let d = self.dist[i * self.n + j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(TtpError::Invalid(format!("bad distance ({i}, {j}): {d}")));
                }
                if d != self.dist[j * self.n + i] {
                    return Err(TtpError::Invalid(format!(
                        "distance matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        for (idx, item) in self.items.iter().enumerate() {
            if item.city == 0 || item.city >= self.n {
                return Err(TtpError::Invalid(format!(
                    "item {idx} assigned to city {} (the starting city holds no items)",
                    item.city + 1
                )));
            }
            if !(item.profit.is_finite() && item.profit >= 0.0) {
                return Err(TtpError::Invalid(format!("item {idx} has bad profit")));
            }
            if !(item.weight.is_finite() && item.weight > 0.0) {
                return Err(TtpError::Invalid(format!("item {idx} has bad weight")));
            }
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(TtpError::Invalid("capacity must be positive".into()));
        }
        if !(self.min_speed > 0.0 && self.min_speed <= self.max_speed) {
            return Err(TtpError::Invalid(
                "speeds must satisfy 0 < min <= max".into(),
            ));
        }
        if !(self.renting_rate.is_finite() && self.renting_rate >= 0.0) {
            return Err(TtpError::Invalid("renting rate must be non-negative".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cities(&self) -> usize {
        self.n
    }

    pub fn distance(&self, from: usize, to: usize) -> f64 {
        self.dist[from * self.n + to]
    }

    pub fn items(&self) -> &[TtpItem] {
        &self.items
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn min_speed(&self) -> f64 {
        self.min_speed
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    pub fn renting_rate(&self) -> f64 {
        self.renting_rate
    }

    /// The same instance with a different renting rate. At rate zero the
    /// packing component decouples from the tour entirely.
    pub fn with_renting_rate(&self, renting_rate: f64) -> Self {
        let mut copy = self.clone();
        copy.renting_rate = renting_rate;
        copy
    }

    pub fn plan_weight(&self, plan: &[bool]) -> f64 {
        self.items
            .iter()
            .zip(plan)
            .filter(|(_, picked)| **picked)
            .map(|(item, _)| item.weight)
            .sum()
    }

    pub fn plan_profit(&self, plan: &[bool]) -> f64 {
        self.items
            .iter()
            .zip(plan)
            .filter(|(_, picked)| **picked)
            .map(|(item, _)| item.profit)
            .sum()
    }

    pub fn validate_tour(&self, tour: &[usize]) -> Result<(), TtpError> {
        if tour.len() != self.n {
            return Err(TtpError::InvalidSolution(format!(
                "tour visits {} cities, instance has {}",
                tour.len(),
                self.n
            )));
        }
        if tour[0] != 0 {
            return Err(TtpError::InvalidSolution(
                "tour must start at city 1".into(),
            ));
        }
        let mut seen = vec![false; self.n];
        for &city in tour {
            if city >= self.n || seen[city] {
                return Err(TtpError::InvalidSolution(
                    "tour is not a permutation of all cities".into(),
                ));
            }
            seen[city] = true;
        }
        Ok(())
    }

    pub fn validate_plan(&self, plan: &[bool]) -> Result<(), TtpError> {
        if plan.len() != self.items.len() {
            return Err(TtpError::InvalidSolution(format!(
                "plan covers {} items, instance has {}",
                plan.len(),
                self.items.len()
            )));
        }
        let weight = self.plan_weight(plan);
        if weight > self.capacity {
            return Err(TtpError::CapacityExceeded {
                weight,
                capacity: self.capacity,
            });
        }
        Ok(())
    }

    /// Total travel time of the closed tour under the picked load.
    ///
    /// The speed on a leg is `max_speed - (w / W) * (max_speed - min_speed)`
    /// where `w` is the weight of items picked at cities already visited
    /// (items are picked on arrival at their home city).
    pub fn tour_time(&self, tour: &[usize], plan: &[bool]) -> Result<f64, TtpError> {
        self.validate_tour(tour)?;
        self.validate_plan(plan)?;
        Ok(self.tour_time_unchecked(tour, plan))
    }

    fn weight_by_city(&self, plan: &[bool]) -> Vec<f64> {
        let mut weight = vec![0.0; self.n];
        for (item, picked) in self.items.iter().zip(plan) {
            if *picked {
                weight[item.city] += item.weight;
            }
        }
        weight
    }

    pub(crate) fn tour_time_unchecked(&self, tour: &[usize], plan: &[bool]) -> f64 {
        let pickup = self.weight_by_city(plan);
        let span = self.max_speed - self.min_speed;
        let mut carried = 0.0;
        let mut time = 0.0;
        for pos in 0..self.n {
            let city = tour[pos];
            carried += pickup[city];
            let speed = self.max_speed - (carried / self.capacity) * span;
            let next = tour[(pos + 1) % self.n];
            time += self.distance(city, next) / speed;
        }
        time
    }

    /// Objective value: picked profit minus rent for the travel time.
    pub fn objective(&self, solution: &TtpSolution) -> Result<f64, TtpError> {
        let time = self.tour_time(&solution.tour, &solution.plan)?;
        Ok(self.plan_profit(&solution.plan) - self.renting_rate * time)
    }

    pub(crate) fn objective_unchecked(&self, tour: &[usize], plan: &[bool]) -> f64 {
        self.plan_profit(plan) - self.renting_rate * self.tour_time_unchecked(tour, plan)
    }

    /// Every tour of the instance, lexicographic in the visited suffix.
    pub fn tour_space(&self) -> impl Iterator<Item = Vec<usize>> {
        let rest: Vec<usize> = (1..self.n).collect();
        multiset_permutations(&rest).map(|suffix| {
            let mut tour = Vec::with_capacity(suffix.len() + 1);
            tour.push(0);
            tour.extend(suffix);
            tour
        })
    }

    /// Every capacity-feasible plan, in bitmask order.
    pub fn plan_space(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        let m = self.items.len();
        (0u64..(1u64 << m)).filter_map(move |bits| {
            let plan: Vec<bool> = (0..m).map(|i| bits & (1 << i) != 0).collect();
            (self.plan_weight(&plan) <= self.capacity).then_some(plan)
        })
    }

    /// Exhaustive enumeration of all (tour, plan) pairs; returns every
    /// optimum, tie-aware by exact value equality.
    pub fn brute_force(&self) -> Result<TtpOptima, TtpError> {
        const CAP: u64 = 1_000_000;
        let tours: u128 = (1..self.n as u128).product();
        let plans: u128 = 1u128 << self.items.len().min(64);
        let candidates = tours.saturating_mul(plans);
        if candidates > CAP as u128 {
            return Err(TtpError::SpaceTooLarge {
                candidates,
                cap: CAP,
            });
        }
        let mut best = f64::NEG_INFINITY;
        let mut optima: Vec<TtpSolution> = Vec::new();
        for tour in self.tour_space() {
            for plan in self.plan_space() {
                let value = self.objective_unchecked(&tour, &plan);
                if value > best {
                    best = value;
                    optima.clear();
                }
                if value == best {
                    optima.push(TtpSolution {
                        tour: tour.clone(),
                        plan,
                    });
                }
            }
        }
        Ok(TtpOptima {
            value: best,
            solutions: optima,
        })
    }

    /// Wrap the instance as a two-component composite problem: `TOUR` with
    /// pairwise position swaps and `PLAN` with capacity-safe bit flips,
    /// mutually dependent, maximizing the thief objective.
    pub fn to_composite(&self) -> CompositeProblem {
        let instance = Arc::new(self.clone());
        let objective_instance = Arc::clone(&instance);
        CompositeProblem::builder(format!("ttp:{}", self.name))
            .component(Arc::new(TourComponent {
                instance: Arc::clone(&instance),
            }))
            .component(Arc::new(PlanComponent { instance }))
            .depends_on(TOUR, PLAN)
            .depends_on(PLAN, TOUR)
            .maximize(move |sol| {
                let tour = sol.part(0).expect_ref::<Vec<usize>>();
                let plan = sol.part(1).expect_ref::<Vec<bool>>();
                objective_instance.objective_unchecked(tour, plan)
            })
            .build()
            .expect("ttp composite problem is well-formed")
    }

    /// Composite solution from a concrete thief solution.
    pub fn composite_solution(&self, solution: &TtpSolution) -> CompositeSolution {
        CompositeSolution::new(vec![
            Part::new(solution.tour.clone()),
            Part::new(solution.plan.clone()),
        ])
    }

    /// Read back a composite solution produced by [`Self::to_composite`].
    pub fn solution_from_composite(&self, sol: &CompositeSolution) -> TtpSolution {
        TtpSolution {
            tour: sol.part(0).expect_ref::<Vec<usize>>().clone(),
            plan: sol.part(1).expect_ref::<Vec<bool>>().clone(),
        }
    }

    /// Tour-improving sub-solver for the coordinated loop (plan frozen).
    pub fn subsolver_tour(&self, mode: SubSolverMode) -> SubSolver {
        match mode {
            SubSolverMode::Descent => SubSolver::improving_descent(0, "tour-descent"),
            SubSolverMode::Exact => SubSolver::exhaustive(0, "tour-exact"),
        }
    }

    /// Plan-improving sub-solver for the coordinated loop (tour frozen).
    pub fn subsolver_plan(&self, mode: SubSolverMode) -> SubSolver {
        match mode {
            SubSolverMode::Descent => SubSolver::improving_descent(1, "plan-descent"),
            SubSolverMode::Exact => SubSolver::exhaustive(1, "plan-exact"),
        }
    }

    /// Serialize in the canonical instance file layout. Parsing the output
    /// reproduces the instance exactly.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("PROBLEM NAME: {}\n", self.name));
        out.push_str(&format!("DIMENSION: {}\n", self.n));
        out.push_str(&format!("NUMBER OF ITEMS: {}\n", self.items.len()));
        out.push_str(&format!("CAPACITY OF KNAPSACK: {}\n", self.capacity));
        out.push_str(&format!("MIN SPEED: {}\n", self.min_speed));
        out.push_str(&format!("MAX SPEED: {}\n", self.max_speed));
        out.push_str(&format!("RENTING RATIO: {}\n", self.renting_rate));
        match &self.coords {
            Some(coords) => {
                let kind = match self.rounding {
                    DistanceRounding::Exact => "EUC_2D",
                    DistanceRounding::Nearest => "ROUND_2D",
                    DistanceRounding::Ceil => "CEIL_2D",
                };
                out.push_str(&format!("EDGE_WEIGHT_TYPE: {kind}\n"));
                out.push_str("NODE_COORD_SECTION\n");
                for (i, (x, y)) in coords.iter().enumerate() {
                    out.push_str(&format!("{} {} {}\n", i + 1, x, y));
                }
            }
            None => {
                out.push_str("MATRIX SECTION\n");
                for i in 0..self.n {
                    let row: Vec<String> = (0..self.n)
                        .map(|j| format!("{}", self.distance(i, j)))
                        .collect();
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
        }
        out.push_str("ITEMS SECTION\n");
        for (i, item) in self.items.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {} {}\n",
                i + 1,
                item.profit,
                item.weight,
                item.city + 1
            ));
        }
        out
    }

    /// Parse the text instance format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, TtpError> {
        Parser::new(text).parse()
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, line)| (i + 1, line.trim()))
            .filter(|(_, line)| !line.is_empty())
            .collect();
        Parser { lines, pos: 0 }
    }

    fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, TtpError> {
        Err(TtpError::Parse {
            line,
            message: message.into(),
        })
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        let entry = self.lines.get(self.pos).copied();
        if entry.is_some() {
            self.pos += 1;
        }
        entry
    }

    fn parse(mut self) -> Result<TtpInstance, TtpError> {
        let mut name = String::from("unnamed");
        let mut dimension: Option<usize> = None;
        let mut item_count: Option<usize> = None;
        let mut capacity: Option<f64> = None;
        let mut min_speed: Option<f64> = None;
        let mut max_speed: Option<f64> = None;
        let mut renting_rate: Option<f64> = None;
        let mut rounding = DistanceRounding::Exact;
        let mut coords: Option<Vec<(f64, f64)>> = None;
        let mut matrix: Option<Vec<Vec<f64>>> = None;
        let mut items: Option<Vec<TtpItem>> = None;

        while let Some((lineno, line)) = self.next_line() {
            if line.starts_with("NODE_COORD_SECTION") {
                let n = match dimension {
                    Some(n) => n,
                    None => return Self::fail(lineno, "NODE_COORD_SECTION before DIMENSION"),
                };
                coords = Some(self.read_coords(n)?);
            } else if line.starts_with("MATRIX SECTION") {
                let n = match dimension {
                    Some(n) => n,
                    None => return Self::fail(lineno, "MATRIX SECTION before DIMENSION"),
                };
                matrix = Some(self.read_matrix(n)?);
            } else if line.starts_with("ITEMS SECTION") {
                let m = match item_count {
                    Some(m) => m,
                    None => return Self::fail(lineno, "ITEMS SECTION before NUMBER OF ITEMS"),
                };
                let n = match dimension {
                    Some(n) => n,
                    None => return Self::fail(lineno, "ITEMS SECTION before DIMENSION"),
                };
                items = Some(self.read_items(m, n)?);
            } else if let Some((key, value)) = line.split_once(':') {
                let key = key.trim().to_uppercase();
                let value = value.trim();
                match key.as_str() {
                    "PROBLEM NAME" | "NAME" => name = value.to_string(),
                    "DIMENSION" => dimension = Some(Self::parse_num(lineno, value)?),
                    "NUMBER OF ITEMS" => item_count = Some(Self::parse_num(lineno, value)?),
                    "CAPACITY OF KNAPSACK" => capacity = Some(Self::parse_float(lineno, value)?),
                    "MIN SPEED" => min_speed = Some(Self::parse_float(lineno, value)?),
                    "MAX SPEED" => max_speed = Some(Self::parse_float(lineno, value)?),
                    "RENTING RATIO" => renting_rate = Some(Self::parse_float(lineno, value)?),
                    "EDGE_WEIGHT_TYPE" => {
                        rounding = match value {
                            "EUC_2D" => DistanceRounding::Exact,
                            "ROUND_2D" => DistanceRounding::Nearest,
                            "CEIL_2D" => DistanceRounding::Ceil,
                            other => {
                                return Self::fail(
                                    lineno,
                                    format!("unsupported EDGE_WEIGHT_TYPE {other:?}"),
                                )
                            }
                        }
                    }
                    // Benchmark files carry extra descriptive keys.
                    _ => {}
                }
            } else {
                return Self::fail(lineno, format!("unrecognized line {line:?}"));
            }
        }

        let require = |field: &str, line: usize| TtpError::Parse {
            line,
            message: format!("missing header {field}"),
        };
        let dimension = dimension.ok_or_else(|| require("DIMENSION", 1))?;
        let _ = item_count.ok_or_else(|| require("NUMBER OF ITEMS", 1))?;
        let capacity = capacity.ok_or_else(|| require("CAPACITY OF KNAPSACK", 1))?;
        let min_speed = min_speed.ok_or_else(|| require("MIN SPEED", 1))?;
        let max_speed = max_speed.ok_or_else(|| require("MAX SPEED", 1))?;
        let renting_rate = renting_rate.ok_or_else(|| require("RENTING RATIO", 1))?;
        let items = items.ok_or_else(|| require("ITEMS SECTION", 1))?;

        let instance = match (coords, matrix) {
            (Some(coords), None) => TtpInstance::from_coords(
                name,
                coords,
                rounding,
                items,
                capacity,
                min_speed,
                max_speed,
                renting_rate,
            ),
            (None, Some(matrix)) => TtpInstance::from_matrix(
                name,
                matrix,
                items,
                capacity,
                min_speed,
                max_speed,
                renting_rate,
            ),
            (None, None) => {
                return Self::fail(1, "missing NODE_COORD_SECTION or MATRIX SECTION");
            }
            (Some(_), Some(_)) => {
                return Self::fail(1, "both NODE_COORD_SECTION and MATRIX SECTION present");
            }
        }?;
        if instance.n != dimension {
            return Self::fail(1, "DIMENSION does not match the node data");
        }
        Ok(instance)
    }

    fn parse_num(line: usize, value: &str) -> Result<usize, TtpError> {
        value
            .parse()
            .map_err(|_| TtpError::Parse {
                line,
                message: format!("expected an integer, got {value:?}"),
            })
    }

    fn parse_float(line: usize, value: &str) -> Result<f64, TtpError> {
        value.parse().map_err(|_| TtpError::Parse {
            line,
            message: format!("expected a number, got {value:?}"),
        })
    }

    fn read_coords(&mut self, n: usize) -> Result<Vec<(f64, f64)>, TtpError> {
        let mut coords = vec![None; n];
        for _ in 0..n {
            let (lineno, line) = match self.next_line() {
                Some(entry) => entry,
                None => return Self::fail(0, "unexpected end of file in NODE_COORD_SECTION"),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Self::fail(lineno, "expected: index x y");
            }
            let index = Self::parse_num(lineno, fields[0])?;
            if index == 0 || index > n {
                return Self::fail(lineno, format!("node index {index} out of 1..={n}"));
            }
            if coords[index - 1].is_some() {
                return Self::fail(lineno, format!("duplicate node index {index}"));
            }
            let x = Self::parse_float(lineno, fields[1])?;
            let y = Self::parse_float(lineno, fields[2])?;
            coords[index - 1] = Some((x, y));
        }
        Ok(coords.into_iter().map(|c| c.unwrap()).collect())
    }

    fn read_matrix(&mut self, n: usize) -> Result<Vec<Vec<f64>>, TtpError> {
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (lineno, line) = match self.next_line() {
                Some(entry) => entry,
                None => return Self::fail(0, "unexpected end of file in MATRIX SECTION"),
            };
            let row: Result<Vec<f64>, TtpError> = line
                .split_whitespace()
                .map(|field| Self::parse_float(lineno, field))
                .collect();
            let row = row?;
            if row.len() != n {
                return Self::fail(lineno, format!("expected {n} entries, got {}", row.len()));
            }
            rows.push(row);
        }
        Ok(rows)
    }

    fn read_items(&mut self, m: usize, n: usize) -> Result<Vec<TtpItem>, TtpError> {
        let mut items = vec![None; m];
        for _ in 0..m {
            let (lineno, line) = match self.next_line() {
                Some(entry) => entry,
                None => return Self::fail(0, "unexpected end of file in ITEMS SECTION"),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Self::fail(lineno, "expected: index profit weight assigned_node");
            }
            let index = Self::parse_num(lineno, fields[0])?;
            if index == 0 || index > m {
                return Self::fail(lineno, format!("item index {index} out of 1..={m}"));
            }
            if items[index - 1].is_some() {
                return Self::fail(lineno, format!("duplicate item index {index}"));
            }
            let profit = Self::parse_float(lineno, fields[1])?;
            let weight = Self::parse_float(lineno, fields[2])?;
            let node = Self::parse_num(lineno, fields[3])?;
            if node < 2 || node > n {
                return Self::fail(
                    lineno,
                    format!("item {index} assigned to node {node}, expected 2..={n}"),
                );
            }
            items[index - 1] = Some(TtpItem {
                city: node - 1,
                profit,
                weight,
            });
        }
        Ok(items.into_iter().map(|i| i.unwrap()).collect())
    }
}

/// Parameters for the seeded instance generator.
#[derive(Clone, Debug)]
pub struct TtpGenConfig {
    pub cities: usize,
    pub items: usize,
    pub seed: u64,
    /// Knapsack capacity as a fraction of total item weight.
    pub capacity_fraction: f64,
    pub renting_rate: f64,
}

impl TtpGenConfig {
    pub fn new(cities: usize, items: usize, seed: u64) -> Self {
        TtpGenConfig {
            cities,
            items,
            seed,
            capacity_fraction: 0.5,
            renting_rate: 1.0,
        }
    }
}

/// Generate a random Euclidean instance, deterministically from the seed.
pub fn generate(config: &TtpGenConfig) -> Result<TtpInstance, TtpError> {
    if config.cities < 2 {
        return Err(TtpError::Invalid("need at least two cities".into()));
    }
    if config.items == 0 {
        return Err(TtpError::Invalid("need at least one item".into()));
    }
    if !(config.capacity_fraction > 0.0 && config.capacity_fraction <= 1.0) {
        return Err(TtpError::Invalid(
            "capacity fraction must be in (0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Coordinates in [0, 10] keep tour lengths on the same scale as item
    // profits, so picking decisions stay non-trivial at rate 1.
    let coords: Vec<(f64, f64)> = (0..config.cities)
        .map(|_| {
            (
                (rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0,
                (rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0,
            )
        })
        .collect();
    let items: Vec<TtpItem> = (0..config.items)
        .map(|_| TtpItem {
            city: rng.gen_range(1..config.cities),
            profit: rng.gen_range(1..=100) as f64,
            weight: rng.gen_range(1..=50) as f64,
        })
        .collect();
    let total_weight: f64 = items.iter().map(|i| i.weight).sum();
    let min_weight = items.iter().map(|i| i.weight).fold(f64::INFINITY, f64::min);
    let capacity = (config.capacity_fraction * total_weight).round().max(min_weight);
    TtpInstance::from_coords(
        format!("ttp-n{}-m{}-s{}", config.cities, config.items, config.seed),
        coords,
        DistanceRounding::Exact,
        items,
        capacity,
        0.1,
        1.0,
        config.renting_rate,
    )
}

struct TourComponent {
    instance: Arc<TtpInstance>,
}

impl Component for TourComponent {
    fn id(&self) -> &str {
        TOUR
    }

    fn validate(&self, part: &Part) -> Result<(), String> {
        let tour = part
            .downcast_ref::<Vec<usize>>()
            .ok_or_else(|| "part is not a tour".to_string())?;
        self.instance.validate_tour(tour).map_err(|e| e.to_string())
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
        let mut rest: Vec<usize> = (1..self.instance.cities()).collect();
        rest.shuffle(rng);
        let mut tour = Vec::with_capacity(self.instance.cities());
        tour.push(0);
        tour.extend(rest);
        Part::new(tour)
    }

    /// All pairwise swaps of visit positions, keeping city 1 first.
    fn neighborhood(&self, part: &Part) -> Neighborhood {
        let tour = part.expect_ref::<Vec<usize>>().clone();
        let n = tour.len();
        Neighborhood::new(part.clone(), move || {
            let tour = tour.clone();
            Box::new((1..n).flat_map(move |i| {
                let tour = tour.clone();
                ((i + 1)..n).map(move |j| {
                    let mut swapped = tour.clone();
                    swapped.swap(i, j);
                    Part::new(swapped)
                })
            })) as PartIter
        })
    }

    fn space(&self, _part: &Part) -> Option<PartIter> {
        let rest: Vec<usize> = (1..self.instance.cities()).collect();
        Some(Box::new(multiset_permutations(&rest).map(|suffix| {
            let mut tour = Vec::with_capacity(suffix.len() + 1);
            tour.push(0);
            tour.extend(suffix);
            Part::new(tour)
        })))
    }

    /// Order-preserving crossover: a slice of `a` keeps its positions, the
    /// remaining cities follow in `b`'s order.
    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        let first = a.expect_ref::<Vec<usize>>();
        let second = b.expect_ref::<Vec<usize>>();
        let n = first.len();
        if n <= 2 {
            return Some(a.clone());
        }
        let mut lo = rng.gen_range(1..n);
        let mut hi = rng.gen_range(1..n);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let kept: HashSet<usize> = first[lo..=hi].iter().copied().collect();
        let mut fill = second.iter().filter(|c| **c != 0 && !kept.contains(c));
        let mut child = Vec::with_capacity(n);
        child.push(0);
        for pos in 1..n {
            if pos >= lo && pos <= hi {
                child.push(first[pos]);
            } else {
                child.push(*fill.next().expect("fill cities cover the gap"));
            }
        }
        Some(Part::new(child))
    }
}

struct PlanComponent {
    instance: Arc<TtpInstance>,
}

impl Component for PlanComponent {
    fn id(&self) -> &str {
        PLAN
    }

    fn validate(&self, part: &Part) -> Result<(), String> {
        let plan = part
            .downcast_ref::<Vec<bool>>()
            .ok_or_else(|| "part is not a packing plan".to_string())?;
        self.instance.validate_plan(plan).map_err(|e| e.to_string())
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
        // Random feasible plan: coin-flip items in random order, skipping
        // anything that would overflow the knapsack.
        let instance = &self.instance;
        let mut order: Vec<usize> = (0..instance.items().len()).collect();
        order.shuffle(rng);
        let mut plan = vec![false; instance.items().len()];
        let mut weight = 0.0;
        for idx in order {
            if rng.gen_bool(0.5) && weight + instance.items()[idx].weight <= instance.capacity() {
                plan[idx] = true;
                weight += instance.items()[idx].weight;
            }
        }
        Part::new(plan)
    }

    /// All single-bit flips that stay within capacity.
    fn neighborhood(&self, part: &Part) -> Neighborhood {
        let plan = part.expect_ref::<Vec<bool>>().clone();
        let instance = Arc::clone(&self.instance);
        Neighborhood::new(part.clone(), move || {
            let plan = plan.clone();
            let instance = Arc::clone(&instance);
            let weight = instance.plan_weight(&plan);
            Box::new((0..plan.len()).filter_map(move |idx| {
                let feasible = plan[idx]
                    || weight + instance.items()[idx].weight <= instance.capacity();
                feasible.then(|| {
                    let mut flipped = plan.clone();
                    flipped[idx] = !flipped[idx];
                    Part::new(flipped)
                })
            })) as PartIter
        })
    }

    fn space(&self, _part: &Part) -> Option<PartIter> {
        if self.instance.items().len() >= 64 {
            return None;
        }
        let instance = Arc::clone(&self.instance);
        let m = instance.items().len();
        Some(Box::new((0u64..(1u64 << m)).filter_map(move |bits| {
            let plan: Vec<bool> = (0..m).map(|i| bits & (1 << i) != 0).collect();
            (instance.plan_weight(&plan) <= instance.capacity()).then(|| Part::new(plan))
        })))
    }

    /// Uniform crossover with capacity repair; every picked item comes from
    /// at least one parent.
    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        let first = a.expect_ref::<Vec<bool>>();
        let second = b.expect_ref::<Vec<bool>>();
        let mut child: Vec<bool> = first
            .iter()
            .zip(second)
            .map(|(x, y)| if rng.gen_bool(0.5) { *x } else { *y })
            .collect();
        let mut weight = self.instance.plan_weight(&child);
        while weight > self.instance.capacity() {
            let picked: Vec<usize> = (0..child.len()).filter(|i| child[*i]).collect();
            let drop = picked[rng.gen_range(0..picked.len())];
            child[drop] = false;
            weight -= self.instance.items()[drop].weight;
        }
        Some(Part::new(child))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{evaluate, initial_solution};

    /// Two cities 10 apart, no items worth anything.
    fn two_city_instance() -> TtpInstance {
        TtpInstance::from_matrix(
            "two-city",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![TtpItem {
                city: 1,
                profit: 5.0,
                weight: 1.0,
            }],
            2.0,
            0.5,
            1.0,
            1.0,
        )
        .unwrap()
    }

    pub(crate) fn fixture_text() -> &'static str {
        crate::problems::ttp::fixtures::TTP_N4_M3
    }

    #[test]
    fn empty_plan_travels_at_full_speed() {
        let instance = two_city_instance();
        let time = instance.tour_time(&[0, 1], &[false]).unwrap();
        assert_eq!(time, 20.0);
        // Objective with renting rate 1: 0 - 1 * 20.
        let value = instance
            .objective(&TtpSolution {
                tour: vec![0, 1],
                plan: vec![false],
            })
            .unwrap();
        assert_eq!(value, -20.0);
    }

    #[test]
    fn empty_plan_time_is_length_over_max_speed() {
        let instance = TtpInstance::parse(fixture_text()).unwrap();
        let sol = TtpSolution::identity_empty(&instance);
        let time = instance.tour_time(&sol.tour, &sol.plan).unwrap();
        let length: f64 = (0..instance.cities())
            .map(|i| instance.distance(sol.tour[i], sol.tour[(i + 1) % instance.cities()]))
            .sum();
        assert!((time - length / instance.max_speed()).abs() < 1e-12);
    }

    #[test]
    fn full_load_hits_min_speed_on_the_last_leg() {
        // The single item weighs 1 and capacity is 1, so picking it loads
        // the thief fully: out at max speed, back at min speed.
        let instance = TtpInstance::from_matrix(
            "full",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![TtpItem {
                city: 1,
                profit: 5.0,
                weight: 1.0,
            }],
            1.0,
            0.5,
            1.0,
            1.0,
        )
        .unwrap();
        let time = instance.tour_time(&[0, 1], &[true]).unwrap();
        assert_eq!(time, 10.0 / 1.0 + 10.0 / 0.5);
    }

    #[test]
    fn capacity_violations_are_reported() {
        let heavy = TtpInstance::from_matrix(
            "heavy",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![
                TtpItem {
                    city: 1,
                    profit: 5.0,
                    weight: 2.0,
                },
                TtpItem {
                    city: 1,
                    profit: 5.0,
                    weight: 2.0,
                },
            ],
            3.0,
            0.5,
            1.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            heavy.tour_time(&[0, 1], &[true, true]),
            Err(TtpError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn brute_force_two_city_picks_a_worthwhile_item() {
        // One item whose profit exceeds the extra rent it causes.
        let instance = TtpInstance::from_matrix(
            "worth-it",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![TtpItem {
                city: 1,
                profit: 50.0,
                weight: 1.0,
            }],
            2.0,
            0.5,
            1.0,
            1.0,
        )
        .unwrap();
        // Hand enumeration: the only tour is [0, 1]. Empty plan: -20.
        // Picking: return leg at speed 1 - (1/2)(0.5) = 0.75 so time is
        // 10 + 13.333..; objective = 50 - 23.333.. > -20.
        let optima = instance.brute_force().unwrap();
        assert_eq!(optima.solutions.len(), 1);
        assert_eq!(optima.solutions[0].plan, vec![true]);
        assert!((optima.value - (50.0 - (10.0 + 10.0 / 0.75))).abs() < 1e-12);
    }

    #[test]
    fn brute_force_with_zero_rent_reduces_to_knapsack() {
        let instance = TtpInstance::parse(fixture_text())
            .unwrap()
            .with_renting_rate(0.0);
        let optima = instance.brute_force().unwrap();
        // Optimal plan is the best feasible profit; every tour attains it.
        let best_profit = instance
            .plan_space()
            .map(|plan| instance.plan_profit(&plan))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(optima.value, best_profit);
        let tour_count: usize = (1..instance.cities()).product();
        assert_eq!(
            optima.solutions.len(),
            tour_count,
            "every tour should attain the knapsack optimum"
        );
    }

    #[test]
    fn brute_force_rejects_oversized_spaces() {
        let config = TtpGenConfig::new(12, 12, 3);
        let instance = generate(&config).unwrap();
        assert!(matches!(
            instance.brute_force(),
            Err(TtpError::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn evaluators_cross_check() {
        // Independent re-implementation: per leg, recompute the carried
        // weight from scratch by scanning the visited prefix.
        fn naive_objective(instance: &TtpInstance, tour: &[usize], plan: &[bool]) -> f64 {
            let n = tour.len();
            let mut time = 0.0;
            for pos in 0..n {
                let visited = &tour[0..=pos];
                let mut carried = 0.0;
                for (item, picked) in instance.items().iter().zip(plan) {
                    if *picked && visited.contains(&item.city) {
                        carried += item.weight;
                    }
                }
                let speed = instance.max_speed()
                    - (carried / instance.capacity())
                        * (instance.max_speed() - instance.min_speed());
                time += instance.distance(tour[pos], tour[(pos + 1) % n]) / speed;
            }
            instance.plan_profit(plan) - instance.renting_rate() * time
        }

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for sample in 0..1000 {
            let config = TtpGenConfig::new(rng.gen_range(3..8), rng.gen_range(1..6), sample);
            let instance = generate(&config).unwrap();
            let problem = instance.to_composite();
            let sol = initial_solution(&problem, sample);
            let tour = sol.part(0).expect_ref::<Vec<usize>>();
            let plan = sol.part(1).expect_ref::<Vec<bool>>();
            let fast = instance.objective_unchecked(tour, plan);
            let slow = naive_objective(&instance, tour, plan);
            let scale = fast.abs().max(slow.abs()).max(1.0);
            assert!(
                ((fast - slow) / scale).abs() < 1e-9,
                "evaluators disagree on sample {sample}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn adding_an_item_never_speeds_up_a_tour() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sample in 0..200 {
            let config = TtpGenConfig::new(rng.gen_range(3..7), rng.gen_range(2..6), sample + 500);
            let instance = generate(&config).unwrap();
            let problem = instance.to_composite();
            let sol = initial_solution(&problem, sample);
            let tour = sol.part(0).expect_ref::<Vec<usize>>().clone();
            let plan = sol.part(1).expect_ref::<Vec<bool>>().clone();
            let base_time = instance.tour_time_unchecked(&tour, &plan);
            for idx in 0..plan.len() {
                if plan[idx] {
                    continue;
                }
                let mut bigger = plan.clone();
                bigger[idx] = true;
                if instance.plan_weight(&bigger) > instance.capacity() {
                    continue;
                }
                let time = instance.tour_time_unchecked(&tour, &bigger);
                assert!(
                    time >= base_time - 1e-12,
                    "adding item {idx} decreased tour time"
                );
            }
        }
    }

    #[test]
    fn moves_preserve_validity() {
        let instance = TtpInstance::parse(fixture_text()).unwrap();
        let problem = instance.to_composite();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sol = initial_solution(&problem, 11);
        for _ in 0..2_000 {
            let component = rng.gen_range(0..problem.component_count());
            if let Some(part) = problem.component(component).random_move(sol.part(component), &mut rng)
            {
                sol = problem.replace(&sol, &[(component, part)]);
            }
            assert!(evaluate(&problem, &sol).is_ok());
        }
    }

    #[test]
    fn tour_crossover_yields_permutations() {
        let instance = TtpInstance::parse(fixture_text()).unwrap();
        let problem = instance.to_composite();
        let tour_component = problem.component(0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..200 {
            let a = initial_solution(&problem, seed);
            let b = initial_solution(&problem, seed + 1000);
            let child = tour_component
                .crossover(a.part(0), b.part(0), &mut rng)
                .unwrap();
            assert!(tour_component.validate(&child).is_ok());
        }
    }

    #[test]
    fn plan_crossover_respects_parent_provenance() {
        let instance = TtpInstance::parse(fixture_text()).unwrap();
        let problem = instance.to_composite();
        let plan_component = problem.component(1);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed in 0..200 {
            let a = initial_solution(&problem, seed);
            let b = initial_solution(&problem, seed + 97);
            let child = plan_component
                .crossover(a.part(1), b.part(1), &mut rng)
                .unwrap();
            let child_plan = child.expect_ref::<Vec<bool>>();
            let pa = a.part(1).expect_ref::<Vec<bool>>();
            let pb = b.part(1).expect_ref::<Vec<bool>>();
            for idx in 0..child_plan.len() {
                if child_plan[idx] {
                    assert!(pa[idx] || pb[idx], "picked item {idx} absent from both parents");
                }
            }
            assert!(plan_component.validate(&child).is_ok());
        }
    }

    #[test]
    fn joint_neighborhood_size_matches_the_product_law() {
        let instance = TtpInstance::parse(fixture_text()).unwrap();
        let problem = instance.to_composite();
        let sol = instance.composite_solution(&TtpSolution::identity_empty(&instance));
        let swaps = problem.component(0).neighborhood(sol.part(0)).len();
        let flips = problem.component(1).neighborhood(sol.part(1)).len();
        // C(n-1, 2) position swaps.
        let n = instance.cities();
        assert_eq!(swaps, (n - 1) * (n - 2) / 2);
        let joint = crate::neighborhood::joint_neighborhood(vec![
            problem.component(0).neighborhood(sol.part(0)),
            problem.component(1).neighborhood(sol.part(1)),
        ])
        .unwrap();
        assert_eq!(joint.cardinality(), swaps * flips);
    }

    #[test]
    fn parse_serialize_round_trip_is_exact() {
        let text = fixture_text();
        let instance = TtpInstance::parse(text).unwrap();
        let serialized = instance.to_file_string();
        let reparsed = TtpInstance::parse(&serialized).unwrap();
        assert_eq!(serialized, reparsed.to_file_string());
        assert_eq!(instance.cities(), reparsed.cities());
        assert_eq!(instance.items(), reparsed.items());
    }

    #[test]
    fn generated_instances_round_trip() {
        for seed in 0..20 {
            let instance = generate(&TtpGenConfig::new(6, 4, seed)).unwrap();
            let text = instance.to_file_string();
            let reparsed = TtpInstance::parse(&text).unwrap();
            assert_eq!(text, reparsed.to_file_string(), "seed {seed}");
        }
    }

    #[test]
    fn parser_reports_line_numbers() {
        let text = "DIMENSION: 2\nNUMBER OF ITEMS: 1\nCAPACITY OF KNAPSACK: 1\nMIN SPEED: 1\nMAX SPEED: 1\nRENTING RATIO: 0\nNODE_COORD_SECTION\n1 0 0\n1 1 1\nITEMS SECTION\n1 1 1 2\n";
        match TtpInstance::parse(text) {
            Err(TtpError::Parse { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("duplicate node index"));
            }
            other => panic!("expected duplicate-index parse error, got {other:?}"),
        }
    }

    #[test]
    fn parser_rejects_items_at_the_start_city() {
        let text = "DIMENSION: 2\nNUMBER OF ITEMS: 1\nCAPACITY OF KNAPSACK: 1\nMIN SPEED: 1\nMAX SPEED: 1\nRENTING RATIO: 0\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nITEMS SECTION\n1 1 1 1\n";
        match TtpInstance::parse(text) {
            Err(TtpError::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}

/// Built-in fixture instances used by the verification suite and tests.
pub mod fixtures {
    use super::TtpInstance;

    /// Four cities, three items, binding capacity, renting rate 1. Small
    /// enough for exhaustive oracles, interesting enough that the best
    /// packing depends on the tour.
    pub const TTP_N4_M3: &str = "\
PROBLEM NAME: ttp-n4-m3-fixture
DIMENSION: 4
NUMBER OF ITEMS: 3
CAPACITY OF KNAPSACK: 3
MIN SPEED: 0.1
MAX SPEED: 1
RENTING RATIO: 1
MATRIX SECTION
0 5 6 6
5 0 5 3
6 5 0 4
6 3 4 0
ITEMS SECTION
1 40 2 2
2 30 3 3
3 25 1 4
";

    /// Parsed form of [`TTP_N4_M3`].
    pub fn ttp_n4_m3() -> TtpInstance {
        TtpInstance::parse(TTP_N4_M3).expect("fixture parses")
    }
}
