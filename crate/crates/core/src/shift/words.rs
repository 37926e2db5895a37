use std::time::Instant;

use num_traits::{CheckedAdd, CheckedMul, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::ones;
use super::{CountMatrix, ShiftError, ShiftSystem};
use crate::geometry::Verdict;

/// `m = [m₁, m₂]`; a word on `[0, m]` has `(m₁ + 1)(m₂ + 1)` cells.
pub type Shape = [usize; 2];

/// A word `w: [0, m] → 𝒯`, cells stored row by row (`m₂` rows of `m₁ + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub shape: Shape,
    pub cells: Vec<usize>,
}

impl Word {
    pub fn get(&self, x: usize, y: usize) -> usize {
        self.cells[y * (self.shape[0] + 1) + x]
    }

    /// Rows `y = 0..=m₂`, each listing `x = 0..=m₁`.
    pub fn grid(&self) -> Vec<Vec<usize>> {
        self.cells.chunks(self.shape[0] + 1).map(<[usize]>::to_vec).collect()
    }

    /// Checks `M_j(w(l + e_j), w(l)) = 1` wherever both cells exist.
    pub fn is_valid(&self, sys: &ShiftSystem) -> bool {
        let [m1, m2] = self.shape;
        if self.cells.len() != (m1 + 1) * (m2 + 1) || self.cells.iter().any(|&c| c >= sys.size()) {
            return false;
        }
        (0..=m2).all(|y| {
            (0..=m1).all(|x| {
                (x == m1 || sys.m1().get(self.get(x + 1, y), self.get(x, y)))
                    && (y == m2 || sys.m2().get(self.get(x, y + 1), self.get(x, y)))
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordBudget {
    /// Largest box the depth-first counter accepts.
    pub max_cells: usize,
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
}

impl Default for WordBudget {
    fn default() -> Self {
        WordBudget { max_cells: 12, max_nodes: 500_000_000, deadline: None }
    }
}

/// Depth-first search over one box in row-major order. Candidates for a
/// cell are the column of `M₁` at its left neighbour intersected with the
/// column of `M₂` at the cell below.
struct Grid<'a> {
    sys: &'a ShiftSystem,
    width: usize,
    cells: usize,
    full: Vec<u64>,
}

impl<'a> Grid<'a> {
    fn new(sys: &'a ShiftSystem, shape: Shape) -> Self {
        let n = sys.size();
        let words = n.div_ceil(64);
        let mut full = vec![u64::MAX; words];
        if !n.is_multiple_of(64) {
            if let Some(last) = full.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        if n == 0 {
            full.clear();
        }
        Grid { sys, width: shape[0] + 1, cells: (shape[0] + 1) * (shape[1] + 1), full }
    }

    fn candidates(&self, assigned: &[usize], idx: usize) -> Vec<u64> {
        let mut c = self.full.clone();
        if !idx.is_multiple_of(self.width) {
            let col = self.sys.transposed(1).row(assigned[idx - 1]);
            c.iter_mut().zip(col).for_each(|(a, b)| *a &= b);
        }
        if idx >= self.width {
            let col = self.sys.transposed(2).row(assigned[idx - self.width]);
            c.iter_mut().zip(col).for_each(|(a, b)| *a &= b);
        }
        c
    }

    fn count_last(&self, assigned: &[usize], idx: usize) -> u64 {
        self.candidates(assigned, idx).iter().map(|w| u64::from(w.count_ones())).sum()
    }
}

struct Meter {
    budget: WordBudget,
    nodes: u64,
}

impl Meter {
    fn tick(&mut self) -> Result<(), ShiftError> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(ShiftError::BudgetExceeded(format!("more than {} search nodes", self.budget.max_nodes)));
        }
        if self.nodes.is_multiple_of(4096) {
            if let Some(d) = self.budget.deadline {
                if Instant::now() >= d {
                    return Err(ShiftError::BudgetExceeded("time budget".into()));
                }
            }
        }
        Ok(())
    }
}

/// Exact `|W_m|` by depth-first search.
pub fn count_words_dfs(sys: &ShiftSystem, shape: Shape, budget: &WordBudget) -> Result<u64, ShiftError> {
    let grid = Grid::new(sys, shape);
    if grid.cells > budget.max_cells {
        return Err(ShiftError::BudgetExceeded(format!("{} cells, limit {}", grid.cells, budget.max_cells)));
    }
    let mut meter = Meter { budget: *budget, nodes: 0 };
    let mut assigned = vec![0; grid.cells];
    fn go(grid: &Grid, assigned: &mut [usize], idx: usize, meter: &mut Meter) -> Result<u64, ShiftError> {
        if idx + 1 == grid.cells {
            return Ok(grid.count_last(assigned, idx));
        }
        let mut total = 0;
        for v in ones(&grid.candidates(assigned, idx)) {
            meter.tick()?;
            assigned[idx] = v;
            total += go(grid, assigned, idx + 1, meter)?;
        }
        Ok(total)
    }
    go(&grid, &mut assigned, 0, &mut meter)
}

/// Total of the entries of `M_j^r`, the number of words on a strip of
/// length `r` in direction `j`. `None` on overflow of `S`.
pub fn strip_count<S>(sys: &ShiftSystem, j: usize, r: u32) -> Option<S>
where
    S: Clone + Zero + One + CheckedAdd + CheckedMul,
{
    CountMatrix::<S>::from_bits(sys.matrix(j)).checked_pow(r)?.checked_total()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub shape: Shape,
    pub dfs: u64,
    /// Set for strips, where the matrix-power count applies.
    pub matrix_power: Option<u64>,
}

impl WordCount {
    pub fn agrees(&self) -> bool {
        self.matrix_power.is_none_or(|m| m == self.dfs)
    }
}

/// `|W_m|` by search, cross-checked against matrix powers on strips.
pub fn count_words(sys: &ShiftSystem, shape: Shape, budget: &WordBudget) -> Result<WordCount, ShiftError> {
    let dfs = count_words_dfs(sys, shape, budget)?;
    let matrix_power = match shape {
        [r, 0] => strip_count::<u64>(sys, 1, r as u32),
        [0, r] => strip_count::<u64>(sys, 2, r as u32),
        _ => None,
    };
    Ok(WordCount { shape, dfs, matrix_power })
}

/// Words on `[0, m]` in lexicographic order of their row-major cells.
pub struct WordIter<'a> {
    grid: Grid<'a>,
    shape: Shape,
    meter: Meter,
    frames: Vec<Vec<usize>>,
    assigned: Vec<usize>,
    remaining: Option<usize>,
    done: bool,
}

pub fn enumerate_words(sys: &ShiftSystem, shape: Shape, limit: Option<usize>, budget: WordBudget) -> WordIter<'_> {
    let grid = Grid::new(sys, shape);
    let first: Vec<usize> = ones(&grid.candidates(&[], 0)).collect();
    WordIter {
        assigned: vec![0; grid.cells],
        grid,
        shape,
        meter: Meter { budget, nodes: 0 },
        frames: vec![first.into_iter().rev().collect()],
        remaining: limit,
        done: false,
    }
}

impl Iterator for WordIter<'_> {
    type Item = Result<Word, ShiftError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.remaining == Some(0) {
            return None;
        }
        while let Some(depth) = self.frames.len().checked_sub(1) {
            let Some(v) = self.frames[depth].pop() else {
                self.frames.pop();
                continue;
            };
            if let Err(e) = self.meter.tick() {
                self.done = true;
                return Some(Err(e));
            }
            self.assigned[depth] = v;
            if depth + 1 == self.grid.cells {
                if let Some(r) = self.remaining.as_mut() {
                    *r -= 1;
                }
                return Some(Ok(Word { shape: self.shape, cells: self.assigned.clone() }));
            }
            let next: Vec<usize> = ones(&self.grid.candidates(&self.assigned, depth + 1)).collect();
            self.frames.push(next.into_iter().rev().collect());
        }
        self.done = true;
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PeriodOutcome {
    /// `w(l) ≠ w(l + p)` for this word.
    Witness {
        p: [i64; 2],
        l: [usize; 2],
        word: Word,
    },
    /// Every word on the box agrees at `l` and `l + p`.
    NoWitness {
        p: [i64; 2],
    },
    Undecided {
        p: [i64; 2],
        reason: String,
    },
}

impl PeriodOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, PeriodOutcome::Witness { .. })
    }
}

/// Searches the smallest box holding `l` and `l + p` for a word that is not
/// `p`-periodic.
pub fn find_nonperiodic_witness(
    sys: &ShiftSystem,
    p: [i64; 2],
    budget: &WordBudget,
) -> Result<PeriodOutcome, ShiftError> {
    if p == [0, 0] {
        return Err(ShiftError::ZeroPeriod);
    }
    let shape = [p[0].unsigned_abs() as usize, p[1].unsigned_abs() as usize];
    let l = [usize::from(p[0] < 0) * shape[0], usize::from(p[1] < 0) * shape[1]];
    let lp = [(l[0] as i64 + p[0]) as usize, (l[1] as i64 + p[1]) as usize];
    let grid = Grid::new(sys, shape);
    let (i, j) = (l[1] * grid.width + l[0], lp[1] * grid.width + lp[0]);
    let (first, second) = (i.min(j), i.max(j));
    let mut meter = Meter { budget: *budget, nodes: 0 };
    let mut assigned = vec![0; grid.cells];

    fn go(
        grid: &Grid,
        assigned: &mut [usize],
        idx: usize,
        pair: (usize, usize),
        meter: &mut Meter,
    ) -> Result<bool, ShiftError> {
        if idx == grid.cells {
            return Ok(true);
        }
        for v in ones(&grid.candidates(assigned, idx)) {
            if idx == pair.1 && v == assigned[pair.0] {
                continue;
            }
            meter.tick()?;
            assigned[idx] = v;
            if go(grid, assigned, idx + 1, pair, meter)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    Ok(match go(&grid, &mut assigned, 0, (first, second), &mut meter) {
        Ok(true) => PeriodOutcome::Witness { p, l, word: Word { shape, cells: assigned } },
        Ok(false) => PeriodOutcome::NoWitness { p },
        Err(ShiftError::BudgetExceeded(reason)) => PeriodOutcome::Undecided { p, reason },
        Err(e) => return Err(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct H3Scope {
    pub p_max: usize,
    pub window: Shape,
    pub tested: usize,
}

/// Non-periodicity on the finite range `0 < max(|p₁|, |p₂|) ≤ p_max`. A
/// pass says nothing about longer periods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct H3Report {
    pub verdict: Verdict,
    pub scope: H3Scope,
    pub outcomes: Vec<PeriodOutcome>,
}

impl H3Report {
    pub fn witnesses(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_witness()).count()
    }
}

pub fn check_h3(sys: &ShiftSystem, p_max: usize, window: Shape, budget: &WordBudget) -> Result<H3Report, ShiftError> {
    if p_max == 0 {
        return Err(ShiftError::InvalidPMax);
    }
    if window[0] < p_max || window[1] < p_max {
        return Err(ShiftError::WindowTooSmall { window, p_max });
    }
    let r = p_max as i64;
    let periods: Vec<[i64; 2]> =
        (-r..=r).flat_map(|a| (-r..=r).map(move |b| [a, b])).filter(|&p| p != [0, 0]).collect();
    let outcomes =
        periods.par_iter().map(|&p| find_nonperiodic_witness(sys, p, budget)).collect::<Result<Vec<_>, _>>()?;
    Ok(H3Report {
        verdict: Verdict::from_bool(outcomes.iter().all(PeriodOutcome::is_witness)),
        scope: H3Scope { p_max, window, tested: periods.len() },
        outcomes,
    })
}
