//! Killer sudoku as a shared-grid composite problem.
//!
//! One n×n grid (n = box_size²) must satisfy the classic sudoku rules and,
//! on top of them, cage rules: the cells of every cage sum to its target and
//! hold no repeated digit. Feasibility is expressed through an additive
//! violation count, zero exactly on solutions.
//!
//! The composite model keeps one set of decision variables: both components
//! view the same grid and differ only in their move sets. Component `SUD`
//! swaps two cells within a row (preserving the row-permutation structure of
//! the initializer), component `KAK` swaps two cells within a cage. Freezing
//! a component means its moves are off the table; a component's reachable
//! space is the orbit of the current grid under its own swaps.
//!
//! Instance files are line oriented: `killersudoku <box_size>`, then one
//! `cage <target> r,c r,c ...` line per cage with zero-based cells;
//! `#` starts a comment.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::component::{Component, PartIter};
use crate::enumerate::{lazy_product, multiset_permutations};
use crate::neighborhood::Neighborhood;
use crate::part::Part;
use crate::problem::{CompositeProblem, CompositeSolution};

/// Component id of the sudoku-rules component.
pub const SUD: &str = "SUD";
/// Component id of the cage-rules component.
pub const KAK: &str = "KAK";

#[derive(Debug, Error)]
pub enum KsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("digit {value} at ({row}, {col}) out of range 1..={max}")]
    DigitOutOfRange {
        row: usize,
        col: usize,
        value: u8,
        max: u8,
    },
    #[error("search space of roughly {candidates:e} candidates exceeds the cap of {cap}")]
    SpaceTooLarge { candidates: f64, cap: u64 },
}

/// An n×n grid of digits in 1..=n, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    cells: Vec<u8>,
}

impl Grid {
    pub fn new(n: usize, cells: Vec<u8>) -> Self {
        assert_eq!(cells.len(), n * n, "grid needs n*n cells");
        Grid { n, cells }
    }

    pub fn from_rows(rows: Vec<Vec<u8>>) -> Self {
        let n = rows.len();
        let cells = rows.into_iter().flatten().collect();
        Grid::new(n, cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.cells[row * self.n + col] = value;
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.n..(row + 1) * self.n]
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in 0..self.n {
            let digits: Vec<String> = self.row(row).iter().map(|d| d.to_string()).collect();
            writeln!(f, "{}", digits.join(" "))?;
        }
        Ok(())
    }
}

/// A cage: a set of cells and the sum their digits must reach.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cage {
    pub cells: Vec<(usize, usize)>,
    pub target: u32,
}

/// Per-family weights for the violation total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationWeights {
    pub rows: f64,
    pub cols: f64,
    pub boxes: f64,
    pub cage_duplicates: f64,
    pub cage_sums: f64,
}

impl Default for ViolationWeights {
    fn default() -> Self {
        ViolationWeights {
            rows: 1.0,
            cols: 1.0,
            boxes: 1.0,
            cage_duplicates: 1.0,
            cage_sums: 1.0,
        }
    }
}

/// Violation counts per rule family. Duplicates in a unit count as
/// `cells - distinct values`; the cage sum deviation is `sum |cage - target|`.
/// The weighted total is zero exactly on killer sudoku solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationBreakdown {
    pub rows: u32,
    pub cols: u32,
    pub boxes: u32,
    pub cage_duplicates: u32,
    pub cage_sum_deviation: u32,
    pub total: f64,
}

/// A killer sudoku instance: grid size plus a cage partition.
#[derive(Clone, Debug)]
pub struct KillerSudokuInstance {
    box_size: usize,
    n: usize,
    cages: Vec<Cage>,
    cage_distinct_rule: bool,
}

impl KillerSudokuInstance {
    pub fn new(box_size: usize, cages: Vec<Cage>) -> Result<Self, KsError> {
        let instance = KillerSudokuInstance {
            box_size,
            n: box_size * box_size,
            cages,
            cage_distinct_rule: true,
        };
        instance.check()?;
        Ok(instance)
    }

    /// Toggle the "no repeated digit within a cage" rule (on by default).
    pub fn with_cage_distinct_rule(mut self, enabled: bool) -> Self {
        self.cage_distinct_rule = enabled;
        self
    }

    fn check(&self) -> Result<(), KsError> {
        if !(2..=5).contains(&self.box_size) {
            return Err(KsError::Invalid(format!(
                "box size {} outside 2..=5",
                self.box_size
            )));
        }
        let n = self.n;
        let mut owner = vec![usize::MAX; n * n];
        let mut target_sum: u64 = 0;
        for (index, cage) in self.cages.iter().enumerate() {
            if cage.cells.is_empty() {
                return Err(KsError::Invalid(format!("cage {index} is empty")));
            }
            if cage.cells.len() > n {
                return Err(KsError::Invalid(format!(
                    "cage {index} has {} cells, more than n = {n}",
                    cage.cells.len()
                )));
            }
            let size = cage.cells.len() as u32;
            let (min, max) = if self.cage_distinct_rule {
                ((1..=size).sum::<u32>(), (n as u32 - size + 1..=n as u32).sum())
            } else {
                (size, size * n as u32)
            };
            if cage.target < min || cage.target > max {
                return Err(KsError::Invalid(format!(
                    "cage {index} target {} outside the feasible range {min}..={max}",
                    cage.target
                )));
            }
            for &(row, col) in &cage.cells {
                if row >= n || col >= n {
                    return Err(KsError::Invalid(format!(
                        "cage {index} cell ({row}, {col}) outside the grid"
                    )));
                }
                if owner[row * n + col] != usize::MAX {
                    return Err(KsError::Invalid(format!(
                        "cell ({row}, {col}) belongs to two cages"
                    )));
                }
                owner[row * n + col] = index;
            }
            target_sum += u64::from(cage.target);
        }
        if owner.contains(&usize::MAX) {
            return Err(KsError::Invalid("cages do not cover the grid".into()));
        }
        let expected = (n * n * (n + 1) / 2) as u64;
        if target_sum != expected {
            return Err(KsError::Invalid(format!(
                "cage targets sum to {target_sum}, expected {expected}"
            )));
        }
        Ok(())
    }

    pub fn box_size(&self) -> usize {
        self.box_size
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cages(&self) -> &[Cage] {
        &self.cages
    }

    pub fn cage_distinct_rule(&self) -> bool {
        self.cage_distinct_rule
    }

    fn check_range(&self, grid: &Grid) -> Result<(), KsError> {
        if grid.n() != self.n {
            return Err(KsError::Invalid(format!(
                "grid is {}x{}, instance is {}x{}",
                grid.n(),
                grid.n(),
                self.n,
                self.n
            )));
        }
        for row in 0..self.n {
            for col in 0..self.n {
                let value = grid.get(row, col);
                if value == 0 || value as usize > self.n {
                    return Err(KsError::DigitOutOfRange {
                        row,
                        col,
                        value,
                        max: self.n as u8,
                    });
                }
            }
        }
        Ok(())
    }

    /// Violation breakdown with default (unit) weights.
    pub fn violations(&self, grid: &Grid) -> Result<ViolationBreakdown, KsError> {
        self.violations_weighted(grid, &ViolationWeights::default())
    }

    pub fn violations_weighted(
        &self,
        grid: &Grid,
        weights: &ViolationWeights,
    ) -> Result<ViolationBreakdown, KsError> {
        self.check_range(grid)?;
        Ok(self.violations_unchecked(grid, weights))
    }

    fn violations_unchecked(&self, grid: &Grid, weights: &ViolationWeights) -> ViolationBreakdown {
        let n = self.n;
        let b = self.box_size;
        let dup = |mask: &mut u32, count: &mut u32, value: u8| {
            let bit = 1u32 << (value - 1);
            if *mask & bit != 0 {
                *count += 1;
            }
            *mask |= bit;
        };
        let mut rows = 0u32;
        let mut cols = 0u32;
        let mut boxes = 0u32;
        let mut col_masks = vec![0u32; n];
        let mut box_masks = vec![0u32; n];
        for row in 0..n {
            let mut row_mask = 0u32;
            for col in 0..n {
                let value = grid.get(row, col);
                dup(&mut row_mask, &mut rows, value);
                dup(&mut col_masks[col], &mut cols, value);
                dup(&mut box_masks[(row / b) * b + col / b], &mut boxes, value);
            }
        }
        let mut cage_duplicates = 0u32;
        let mut cage_sum_deviation = 0u32;
        for cage in &self.cages {
            let mut mask = 0u32;
            let mut dups = 0u32;
            let mut sum = 0u32;
            for &(row, col) in &cage.cells {
                let value = grid.get(row, col);
                sum += u32::from(value);
                dup(&mut mask, &mut dups, value);
            }
            if self.cage_distinct_rule {
                cage_duplicates += dups;
            }
            cage_sum_deviation += sum.abs_diff(cage.target);
        }
        let total = weights.rows * f64::from(rows)
            + weights.cols * f64::from(cols)
            + weights.boxes * f64::from(boxes)
            + weights.cage_duplicates * f64::from(cage_duplicates)
            + weights.cage_sums * f64::from(cage_sum_deviation);
        ViolationBreakdown {
            rows,
            cols,
            boxes,
            cage_duplicates,
            cage_sum_deviation,
            total,
        }
    }

    /// Exhaustive solver for 4×4 instances: backtracking over row
    /// permutations with column/box/cage pruning. Returns every grid whose
    /// violation total is zero.
    pub fn brute_force_solve(&self) -> Result<Vec<Grid>, KsError> {
        if self.box_size != 2 {
            let candidates = factorial(self.n).powi(self.n as i32);
            return Err(KsError::SpaceTooLarge {
                candidates,
                cap: 400_000,
            });
        }
        self.brute_force_solve_capped(u64::MAX)
    }

    /// [`Self::brute_force_solve`] with an explicit cap on explored row
    /// placements, for deliberate use beyond 4×4.
    pub fn brute_force_solve_capped(&self, cap: u64) -> Result<Vec<Grid>, KsError> {
        let n = self.n;
        let mut cage_of = vec![usize::MAX; n * n];
        for (index, cage) in self.cages.iter().enumerate() {
            for &(row, col) in &cage.cells {
                cage_of[row * n + col] = index;
            }
        }
        let row_perms: Vec<Vec<u8>> =
            multiset_permutations(&(1..=n as u8).collect::<Vec<u8>>()).collect();
        let mut state = BruteForce {
            instance: self,
            cage_of,
            col_masks: vec![0u32; n],
            box_masks: vec![0u32; n],
            cage_masks: vec![0u32; self.cages.len()],
            cage_sums: vec![0u32; self.cages.len()],
            cage_filled: vec![0usize; self.cages.len()],
            grid: Grid::new(n, vec![1; n * n]),
            solutions: Vec::new(),
            explored: 0,
            cap,
        };
        state.place_row(0, &row_perms)?;
        Ok(state.solutions)
    }

    /// Wrap the instance as a two-component shared-grid composite problem,
    /// minimizing the violation total.
    pub fn to_composite(&self) -> CompositeProblem {
        let instance = Arc::new(self.clone());
        let objective_instance = Arc::clone(&instance);
        let n = self.n;
        CompositeProblem::builder(format!("killersudoku:{}x{}", n, n))
            .component(Arc::new(SudokuComponent {
                instance: Arc::clone(&instance),
            }))
            .component(Arc::new(CageComponent { instance }))
            .depends_on(SUD, KAK)
            .depends_on(KAK, SUD)
            .minimize(move |sol| {
                let grid = sol.part(0).expect_ref::<Grid>();
                objective_instance
                    .violations_unchecked(grid, &ViolationWeights::default())
                    .total
            })
            .reconcile(move |base, replacements| {
                // Merge each candidate's diff into the shared grid, in factor
                // order; later diffs win on overlapping cells. Both parts of
                // the result view the merged grid.
                let mut cells = base.part(0).expect_ref::<Grid>().cells().to_vec();
                for (index, part) in replacements {
                    let original = base.part(*index).expect_ref::<Grid>();
                    let replacement = part.expect_ref::<Grid>();
                    for pos in 0..cells.len() {
                        if replacement.cells()[pos] != original.cells()[pos] {
                            cells[pos] = replacement.cells()[pos];
                        }
                    }
                }
                let merged = Part::new(Grid::new(n, cells));
                let parts = vec![merged.clone(), merged];
                CompositeSolution::new(parts)
            })
            .align_initial(|parts| {
                // One shared grid: adopt the sudoku component's row-structured
                // initializer for every view.
                let shared = parts[0].clone();
                vec![shared.clone(), shared]
            })
            .solution_check(|sol| {
                if sol.parts().iter().all(|p| *p == *sol.part(0)) {
                    Ok(())
                } else {
                    Err("component views of the shared grid diverged".into())
                }
            })
            .build()
            .expect("killer sudoku composite problem is well-formed")
    }

    /// Composite solution viewing the given grid.
    pub fn composite_solution(&self, grid: &Grid) -> CompositeSolution {
        let part = Part::new(grid.clone());
        CompositeSolution::new(vec![part.clone(), part])
    }

    /// The shared grid of a composite solution.
    pub fn grid_from_composite(&self, sol: &CompositeSolution) -> Grid {
        sol.part(0).expect_ref::<Grid>().clone()
    }

    /// Serialize in the instance file format; parses back identically.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("killersudoku {}\n", self.box_size);
        for cage in &self.cages {
            let cells: Vec<String> = cage
                .cells
                .iter()
                .map(|(row, col)| format!("{row},{col}"))
                .collect();
            out.push_str(&format!("cage {} {}\n", cage.target, cells.join(" ")));
        }
        out
    }

    /// Parse the instance file format; errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, KsError> {
        let mut box_size: Option<(usize, usize)> = None;
        let mut cages: Vec<Cage> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (box_size, fields[0]) {
                (None, "killersudoku") => {
                    if fields.len() != 2 {
                        return Err(KsError::Parse {
                            line: lineno,
                            message: "expected: killersudoku <box_size>".into(),
                        });
                    }
                    let b: usize = fields[1].parse().map_err(|_| KsError::Parse {
                        line: lineno,
                        message: format!("bad box size {:?}", fields[1]),
                    })?;
                    if !(2..=5).contains(&b) {
                        return Err(KsError::Parse {
                            line: lineno,
                            message: format!("box size {b} outside 2..=5"),
                        });
                    }
                    box_size = Some((b, lineno));
                }
                (None, _) => {
                    return Err(KsError::Parse {
                        line: lineno,
                        message: "file must start with: killersudoku <box_size>".into(),
                    });
                }
                (Some(_), "cage") => {
                    if fields.len() < 3 {
                        return Err(KsError::Parse {
                            line: lineno,
                            message: "expected: cage <target> r,c r,c ...".into(),
                        });
                    }
                    let target: u32 = fields[1].parse().map_err(|_| KsError::Parse {
                        line: lineno,
                        message: format!("bad cage target {:?}", fields[1]),
                    })?;
                    let n = box_size.unwrap().0 * box_size.unwrap().0;
                    let mut cells = Vec::with_capacity(fields.len() - 2);
                    for cell in &fields[2..] {
                        let (row, col) = cell.split_once(',').ok_or_else(|| KsError::Parse {
                            line: lineno,
                            message: format!("bad cell {cell:?}, expected r,c"),
                        })?;
                        let row: usize = row.parse().map_err(|_| KsError::Parse {
                            line: lineno,
                            message: format!("bad row in cell {cell:?}"),
                        })?;
                        let col: usize = col.parse().map_err(|_| KsError::Parse {
                            line: lineno,
                            message: format!("bad column in cell {cell:?}"),
                        })?;
                        if row >= n || col >= n {
                            return Err(KsError::Parse {
                                line: lineno,
                                message: format!("cell ({row}, {col}) outside the {n}x{n} grid"),
                            });
                        }
                        if !seen.insert((row, col)) {
                            return Err(KsError::Parse {
                                line: lineno,
                                message: format!("cell ({row}, {col}) belongs to two cages"),
                            });
                        }
                        cells.push((row, col));
                    }
                    cages.push(Cage { cells, target });
                }
                (Some(_), other) => {
                    return Err(KsError::Parse {
                        line: lineno,
                        message: format!("unrecognized record {other:?}"),
                    });
                }
            }
        }
        let (b, header_line) = box_size.ok_or(KsError::Parse {
            line: 1,
            message: "missing header: killersudoku <box_size>".into(),
        })?;
        KillerSudokuInstance::new(b, cages).map_err(|e| match e {
            KsError::Invalid(message) => KsError::Parse {
                line: header_line,
                message,
            },
            other => other,
        })
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

struct BruteForce<'a> {
    instance: &'a KillerSudokuInstance,
    cage_of: Vec<usize>,
    col_masks: Vec<u32>,
    box_masks: Vec<u32>,
    cage_masks: Vec<u32>,
    cage_sums: Vec<u32>,
    cage_filled: Vec<usize>,
    grid: Grid,
    solutions: Vec<Grid>,
    explored: u64,
    cap: u64,
}

impl BruteForce<'_> {
    fn place_row(&mut self, row: usize, row_perms: &[Vec<u8>]) -> Result<(), KsError> {
        let n = self.instance.n;
        if row == n {
            // The pruning is an optimization; the violation count is the
            // authority on what counts as a solution.
            let breakdown = self
                .instance
                .violations_unchecked(&self.grid, &ViolationWeights::default());
            if breakdown.total == 0.0 {
                self.solutions.push(self.grid.clone());
            }
            return Ok(());
        }
        'perm: for perm in row_perms {
            self.explored += 1;
            if self.explored > self.cap {
                return Err(KsError::SpaceTooLarge {
                    candidates: self.explored as f64,
                    cap: self.cap,
                });
            }
            // Feasibility of this row placement against columns, boxes and
            // cages filled so far.
            let mut undo: Vec<(usize, u32, usize, usize, u32)> = Vec::with_capacity(n);
            for (col, &value) in perm.iter().enumerate() {
                let bit = 1u32 << (value - 1);
                let box_index = (row / self.instance.box_size) * self.instance.box_size
                    + col / self.instance.box_size;
                let cage = self.cage_of[row * n + col];
                let cage_ok = {
                    let dup = self.instance.cage_distinct_rule && self.cage_masks[cage] & bit != 0;
                    let sum = self.cage_sums[cage] + u32::from(value);
                    let filled = self.cage_filled[cage] + 1;
                    let remaining = (self.instance.cages[cage].cells.len() - filled) as u32;
                    // Remaining cells contribute at least 1 and at most n each.
                    let lower = sum + remaining;
                    let upper = sum + remaining * n as u32;
                    !dup && lower <= self.instance.cages[cage].target
                        && self.instance.cages[cage].target <= upper
                };
                if self.col_masks[col] & bit != 0 || self.box_masks[box_index] & bit != 0 || !cage_ok
                {
                    for &(col, bit, box_index, cage, value) in undo.iter().rev() {
                        self.col_masks[col] ^= bit;
                        self.box_masks[box_index] ^= bit;
                        self.cage_masks[cage] &= !bit;
                        self.cage_sums[cage] -= value;
                        self.cage_filled[cage] -= 1;
                    }
                    continue 'perm;
                }
                self.col_masks[col] |= bit;
                self.box_masks[box_index] |= bit;
                self.cage_masks[cage] |= bit;
                self.cage_sums[cage] += u32::from(value);
                self.cage_filled[cage] += 1;
                self.grid.set(row, col, value);
                undo.push((col, bit, box_index, cage, u32::from(value)));
            }
            self.place_row(row + 1, row_perms)?;
            for &(col, bit, box_index, cage, value) in undo.iter().rev() {
                self.col_masks[col] ^= bit;
                self.box_masks[box_index] ^= bit;
                self.cage_masks[cage] &= !bit;
                self.cage_sums[cage] -= value;
                self.cage_filled[cage] -= 1;
            }
        }
        Ok(())
    }
}

/// Generate an instance with a hidden reference solution: a seeded valid
/// grid is partitioned into connected cages (4-adjacency) of at most
/// `max_cage_size` cells with distinct digits, and the cage targets are read
/// off the grid. The instance therefore admits at least one solution.
pub fn generate(
    box_size: usize,
    seed: u64,
    max_cage_size: usize,
) -> Result<(KillerSudokuInstance, Grid), KsError> {
    if !(box_size == 2 || box_size == 3) {
        return Err(KsError::Invalid(format!(
            "generator supports box sizes 2 and 3, got {box_size}"
        )));
    }
    let n = box_size * box_size;
    if !(1..=n).contains(&max_cage_size) {
        return Err(KsError::Invalid(format!(
            "max cage size {max_cage_size} outside 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = random_solved_grid(box_size, &mut rng);
    let cages = partition_into_cages(&grid, max_cage_size, &mut rng);
    let instance = KillerSudokuInstance::new(box_size, cages)?;
    debug_assert_eq!(instance.violations(&grid).unwrap().total, 0.0);
    Ok((instance, grid))
}

/// A uniformly shuffled valid sudoku grid: start from a canonical pattern
/// and apply validity-preserving transformations (digit relabeling, row and
/// column shuffles within bands and stacks, band and stack shuffles,
/// optional transposition).
fn random_solved_grid(box_size: usize, rng: &mut ChaCha8Rng) -> Grid {
    let b = box_size;
    let n = b * b;
    let mut digits: Vec<u8> = (1..=n as u8).collect();
    digits.shuffle(rng);
    let mut rows: Vec<usize> = (0..n).collect();
    for band in 0..b {
        rows[band * b..(band + 1) * b].shuffle(rng);
    }
    let mut bands: Vec<usize> = (0..b).collect();
    bands.shuffle(rng);
    let mut cols: Vec<usize> = (0..n).collect();
    for stack in 0..b {
        cols[stack * b..(stack + 1) * b].shuffle(rng);
    }
    let mut stacks: Vec<usize> = (0..b).collect();
    stacks.shuffle(rng);
    let transpose = rng.gen_bool(0.5);
    let mut cells = vec![0u8; n * n];
    for row in 0..n {
        for col in 0..n {
            let source_row = bands[row / b] * b + (rows[row] % b);
            let source_col = stacks[col / b] * b + (cols[col] % b);
            let pattern = (source_row % b) * b + source_row / b + source_col;
            let value = digits[pattern % n];
            let (r, c) = if transpose { (col, row) } else { (row, col) };
            cells[r * n + c] = value;
        }
    }
    Grid::new(n, cells)
}

fn partition_into_cages(grid: &Grid, max_cage_size: usize, rng: &mut ChaCha8Rng) -> Vec<Cage> {
    let n = grid.n();
    let mut assigned = vec![false; n * n];
    let mut order: Vec<usize> = (0..n * n).collect();
    order.shuffle(rng);
    let mut cages = Vec::new();
    for &start in &order {
        if assigned[start] {
            continue;
        }
        let mut cells = vec![(start / n, start % n)];
        assigned[start] = true;
        let want = if max_cage_size >= 2 {
            rng.gen_range(2..=max_cage_size)
        } else {
            1
        };
        while cells.len() < want {
            // Unassigned 4-neighbors of the cage whose digit is not in the
            // cage yet.
            let mut frontier: Vec<(usize, usize)> = Vec::new();
            for &(row, col) in &cells {
                let mut push = |r: isize, c: isize| {
                    if r < 0 || c < 0 || r as usize >= n || c as usize >= n {
                        return;
                    }
                    let (r, c) = (r as usize, c as usize);
                    if assigned[r * n + c] || frontier.contains(&(r, c)) {
                        return;
                    }
                    let digit = grid.get(r, c);
                    if cells.iter().any(|&(cr, cc)| grid.get(cr, cc) == digit) {
                        return;
                    }
                    frontier.push((r, c));
                };
                push(row as isize - 1, col as isize);
                push(row as isize + 1, col as isize);
                push(row as isize, col as isize - 1);
                push(row as isize, col as isize + 1);
            }
            if frontier.is_empty() {
                break;
            }
            let &(row, col) = frontier.choose(rng).expect("frontier non-empty");
            assigned[row * n + col] = true;
            cells.push((row, col));
        }
        let target = cells.iter().map(|&(r, c)| u32::from(grid.get(r, c))).sum();
        cages.push(Cage { cells, target });
    }
    cages
}

struct SudokuComponent {
    instance: Arc<KillerSudokuInstance>,
}

impl Component for SudokuComponent {
    fn id(&self) -> &str {
        SUD
    }

    fn validate(&self, part: &Part) -> Result<(), String> {
        let grid = part
            .downcast_ref::<Grid>()
            .ok_or_else(|| "part is not a grid".to_string())?;
        self.instance.check_range(grid).map_err(|e| e.to_string())
    }

    /// Every row a random permutation of 1..=n, so row constraints hold by
    /// construction and row swaps stay closed over them.
    fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
        let n = self.instance.n();
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row: Vec<u8> = (1..=n as u8).collect();
            row.shuffle(rng);
            rows.push(row);
        }
        Part::new(Grid::from_rows(rows))
    }

    /// Swap two differing cells within one row.
    fn neighborhood(&self, part: &Part) -> Neighborhood {
        let grid = part.expect_ref::<Grid>().clone();
        Neighborhood::new(part.clone(), move || {
            let n = grid.n();
            let grid = grid.clone();
            Box::new((0..n).flat_map(move |row| {
                let grid = grid.clone();
                (0..n).flat_map(move |a| {
                    let grid = grid.clone();
                    ((a + 1)..n).filter_map(move |b| {
                        (grid.get(row, a) != grid.get(row, b)).then(|| {
                            let mut swapped = grid.clone();
                            swapped.set(row, a, grid.get(row, b));
                            swapped.set(row, b, grid.get(row, a));
                            Part::new(swapped)
                        })
                    })
                })
            })) as PartIter
        })
    }

    /// Orbit under row swaps: all per-row rearrangements of the current row
    /// multisets.
    fn space(&self, part: &Part) -> Option<PartIter> {
        let grid = part.expect_ref::<Grid>().clone();
        let n = grid.n();
        let factories: Vec<Box<dyn Fn() -> Box<dyn Iterator<Item = Vec<u8>>>>> = (0..n)
            .map(|row| {
                let values = grid.row(row).to_vec();
                Box::new(move || {
                    Box::new(multiset_permutations(&values)) as Box<dyn Iterator<Item = Vec<u8>>>
                }) as Box<dyn Fn() -> Box<dyn Iterator<Item = Vec<u8>>>>
            })
            .collect();
        Some(Box::new(
            lazy_product(factories).map(move |rows| Part::new(Grid::from_rows(rows))),
        ))
    }

    /// Row-wise mixing: each row comes from one of the parents.
    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        Some(row_mix(a, b, rng))
    }
}

struct CageComponent {
    instance: Arc<KillerSudokuInstance>,
}

impl Component for CageComponent {
    fn id(&self) -> &str {
        KAK
    }

    fn validate(&self, part: &Part) -> Result<(), String> {
        let grid = part
            .downcast_ref::<Grid>()
            .ok_or_else(|| "part is not a grid".to_string())?;
        self.instance.check_range(grid).map_err(|e| e.to_string())
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Part {
        let n = self.instance.n();
        let cells = (0..n * n).map(|_| rng.gen_range(1..=n as u8)).collect();
        Part::new(Grid::new(n, cells))
    }

    /// Swap two differing cells within one cage.
    fn neighborhood(&self, part: &Part) -> Neighborhood {
        let grid = part.expect_ref::<Grid>().clone();
        let instance = Arc::clone(&self.instance);
        Neighborhood::new(part.clone(), move || {
            let grid = grid.clone();
            let instance = Arc::clone(&instance);
            Box::new((0..instance.cages().len()).flat_map(move |cage_index| {
                let grid = grid.clone();
                let instance = Arc::clone(&instance);
                let cells = instance.cages()[cage_index].cells.clone();
                let len = cells.len();
                (0..len).flat_map(move |a| {
                    let grid = grid.clone();
                    let cells = cells.clone();
                    ((a + 1)..len).filter_map(move |b| {
                        let (ra, ca) = cells[a];
                        let (rb, cb) = cells[b];
                        (grid.get(ra, ca) != grid.get(rb, cb)).then(|| {
                            let mut swapped = grid.clone();
                            swapped.set(ra, ca, grid.get(rb, cb));
                            swapped.set(rb, cb, grid.get(ra, ca));
                            Part::new(swapped)
                        })
                    })
                })
            })) as PartIter
        })
    }

    /// Orbit under cage swaps: all per-cage rearrangements of the current
    /// cage multisets.
    fn space(&self, part: &Part) -> Option<PartIter> {
        let grid = part.expect_ref::<Grid>().clone();
        let cages = self.instance.cages().to_vec();
        let factories: Vec<Box<dyn Fn() -> Box<dyn Iterator<Item = Vec<u8>>>>> = cages
            .iter()
            .map(|cage| {
                let values: Vec<u8> = cage.cells.iter().map(|&(r, c)| grid.get(r, c)).collect();
                Box::new(move || {
                    Box::new(multiset_permutations(&values)) as Box<dyn Iterator<Item = Vec<u8>>>
                }) as Box<dyn Fn() -> Box<dyn Iterator<Item = Vec<u8>>>>
            })
            .collect();
        let base = grid.clone();
        Some(Box::new(lazy_product(factories).map(move |assignments| {
            let mut next = base.clone();
            for (cage, values) in cages.iter().zip(&assignments) {
                for (&(row, col), &value) in cage.cells.iter().zip(values) {
                    next.set(row, col, value);
                }
            }
            Part::new(next)
        })))
    }

    fn crossover(&self, a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Option<Part> {
        Some(row_mix(a, b, rng))
    }
}

fn row_mix(a: &Part, b: &Part, rng: &mut ChaCha8Rng) -> Part {
    let first = a.expect_ref::<Grid>();
    let second = b.expect_ref::<Grid>();
    let n = first.n();
    let mut rows = Vec::with_capacity(n);
    for row in 0..n {
        let source = if rng.gen_bool(0.5) { first } else { second };
        rows.push(source.row(row).to_vec());
    }
    Part::new(Grid::from_rows(rows))
}
