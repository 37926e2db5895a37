//! Bijections `T: P -> L` with
//!
//! 1. `x` not incident with `T(x)`, and
//! 2. for distinct `x1, x2`, the point `T(x1) ∩ T(x2)` is not on the line `x1 x2`,
//!
//! found by backtracking and checked independently.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Line, Point, ProjectivePlane};

/// Orders above this make the exhaustive search impractical.
pub const RECOMMENDED_MAX_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BijectionError {
    #[error("no basic bijection exists ({nodes} search nodes, tree exhausted)")]
    NotFound { nodes: u64 },
    #[error("search budget exhausted after {nodes} nodes ({elapsed_ms} ms)")]
    Timeout { nodes: u64, elapsed_ms: u128 },
    #[error("map is not a basic bijection: {0}")]
    Invalid(Box<BijectionReport>),
    #[error("bijection was verified against a different plane")]
    VerificationRequired,
    #[error("point {point} is mapped to a line through it")]
    DomainError { point: Point },
    #[error("point order must list every point exactly once")]
    InvalidOrder,
    #[error("malformed bijection: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Property2Violation {
    pub points: (Point, Point),
    /// `T(x1) ∩ T(x2)`.
    pub meet: Point,
    /// The line through `x1` and `x2`, which contains `meet`.
    pub line: Line,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub points: usize,
    pub bijective: bool,
    /// Points without an image, or with an image that is not a line id.
    pub unmapped: Vec<Point>,
    /// Lines hit more than once, with their preimages.
    pub repeated: Vec<(Line, Vec<Point>)>,
    pub property1: Vec<Point>,
    pub property2: Vec<Property2Violation>,
}

impl BijectionReport {
    pub fn is_clean(&self) -> bool {
        self.bijective && self.property1.is_empty() && self.property2.is_empty()
    }
}

impl std::fmt::Display for BijectionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "bijective: {}, property 1 violations: {}, property 2 violations: {}",
            self.bijective,
            self.property1.len(),
            self.property2.len()
        )
    }
}

/// Checks bijectivity and both properties over every point and point pair.
pub fn verify_basic_bijection(plane: &ProjectivePlane, map: &[Line]) -> BijectionReport {
    let n = plane.size();
    let mut unmapped: Vec<Point> = (map.len()..n).map(Point).collect();
    let mut preimages = vec![Vec::new(); n];
    for (x, y) in map.iter().enumerate().take(n) {
        if y.0 < n {
            preimages[y.0].push(Point(x));
        } else {
            unmapped.push(Point(x));
        }
    }
    unmapped.sort();
    let repeated: Vec<_> =
        preimages.iter().enumerate().filter(|(_, pre)| pre.len() > 1).map(|(l, pre)| (Line(l), pre.clone())).collect();
    let bijective = map.len() == n && unmapped.is_empty() && repeated.is_empty();

    let image = |x: usize| map.get(x).copied().filter(|y| y.0 < n);
    let property1 = (0..n).filter(|&x| image(x).is_some_and(|y| plane.incident(Point(x), y))).map(Point).collect();
    let mut property2 = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (Some(ya), Some(yb)) = (image(a), image(b)) else { continue };
            if ya == yb {
                continue;
            }
            let meet = plane.meet_unchecked(ya, yb);
            let line = plane.join_unchecked(Point(a), Point(b));
            if plane.incident(meet, line) {
                property2.push(Property2Violation { points: (Point(a), Point(b)), meet, line });
            }
        }
    }

    BijectionReport { points: n, bijective, unmapped, repeated, property1, property2 }
}

/// A verified basic bijection, tied to the plane it was verified against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBijection {
    order: usize,
    plane: u64,
    map: Vec<Line>,
}

impl BasicBijection {
    pub fn new(plane: &ProjectivePlane, map: Vec<Line>) -> Result<Self, BijectionError> {
        let report = verify_basic_bijection(plane, &map);
        if !report.is_clean() {
            return Err(BijectionError::Invalid(Box::new(report)));
        }
        Ok(BasicBijection { order: plane.order(), plane: plane.fingerprint(), map })
    }

    pub fn from_json(plane: &ProjectivePlane, json: &BijectionJson) -> Result<Self, BijectionError> {
        if json.q != plane.order() {
            return Err(BijectionError::Malformed(format!(
                "bijection is for order {}, plane has order {}",
                json.q,
                plane.order()
            )));
        }
        Self::new(plane, json.t.iter().map(|&y| Line(y)).collect())
    }

    pub fn to_json(&self) -> BijectionJson {
        BijectionJson { q: self.order, t: self.map.iter().map(|y| y.0).collect() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn image(&self, x: Point) -> Line {
        self.map[x.0]
    }

    pub fn as_slice(&self) -> &[Line] {
        &self.map
    }

    /// `T^{-1}` as a vector indexed by line id.
    pub fn inverse(&self) -> Vec<Point> {
        let mut inv = vec![Point(0); self.map.len()];
        for (x, y) in self.map.iter().enumerate() {
            inv[y.0] = Point(x);
        }
        inv
    }

    /// Fails unless this bijection was verified against `plane`.
    pub fn check_plane(&self, plane: &ProjectivePlane) -> Result<(), BijectionError> {
        if self.plane == plane.fingerprint() {
            Ok(())
        } else {
            Err(BijectionError::VerificationRequired)
        }
    }
}

/// File format `{"q": int, "T": [line id per point id]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionJson {
    pub q: usize,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    FirstSolution,
    CountAll,
    ExhaustiveNonexistence,
}

#[derive(Debug, Clone, Default)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Point-processing order; the canonical order when `None`.
    pub order: Option<Vec<Point>>,
    /// Pin the first point to its first admissible line. `None` picks the
    /// mode default: on for first-solution, off otherwise.
    pub symmetry_fix: Option<bool>,
    pub time_budget: Option<Duration>,
    pub node_budget: Option<u64>,
    /// Split the first point's candidates across threads.
    pub parallel: bool,
}

impl SearchConfig {
    pub fn new(mode: SearchMode) -> Self {
        SearchConfig { mode, ..Default::default() }
    }

    fn pinned(&self) -> bool {
        self.symmetry_fix.unwrap_or(self.mode == SearchMode::FirstSolution)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(BasicBijection),
    Count(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub nodes: u64,
    pub pinned: bool,
}

/// Backtracking over points in the configured order; candidate lines are
/// tried in canonical order and filtered by property 1 and by property 2
/// against every point assigned so far.
pub fn search_basic_bijection(plane: &ProjectivePlane, cfg: &SearchConfig) -> Result<SearchResult, BijectionError> {
    let order = match &cfg.order {
        Some(order) => {
            let mut seen = vec![false; plane.size()];
            if order.len() != plane.size()
                || order.iter().any(|p| p.0 >= seen.len() || std::mem::replace(&mut seen[p.0], true))
            {
                return Err(BijectionError::InvalidOrder);
            }
            order.clone()
        }
        None => plane.points().collect(),
    };
    let start = Instant::now();
    let budget = Budget { deadline: cfg.time_budget.map(|d| start + d), nodes: cfg.node_budget, start };

    let pinned = cfg.pinned();
    let run = |pin: bool| run_search(plane, &order, cfg, pin, &budget);
    let (found, count, nodes, used_pin) = match run(pinned)? {
        // the pinned subtree can be empty even when solutions exist
        (None, _, nodes) if pinned && cfg.mode == SearchMode::FirstSolution => {
            let (f, c, more) = run(false)?;
            (f, c, nodes + more, false)
        }
        (f, c, nodes) => (f, c, nodes, pinned),
    };

    let outcome = match cfg.mode {
        SearchMode::CountAll => SearchOutcome::Count(count),
        _ => {
            let map = found.ok_or(BijectionError::NotFound { nodes })?;
            SearchOutcome::Found(BasicBijection::new(plane, map)?)
        }
    };
    Ok(SearchResult { outcome, nodes, pinned: used_pin })
}

struct Budget {
    deadline: Option<Instant>,
    nodes: Option<u64>,
    start: Instant,
}

type Partial = (Option<Vec<Line>>, u64, u64);

fn run_search(
    plane: &ProjectivePlane,
    order: &[Point],
    cfg: &SearchConfig,
    pin: bool,
    budget: &Budget,
) -> Result<Partial, BijectionError> {
    let stop_at_first = cfg.mode != SearchMode::CountAll;
    let first = order[0];
    let mut roots: Vec<Line> = plane.lines().filter(|&y| !plane.incident(first, y)).collect();
    if pin {
        roots.truncate(1);
    }
    let branch = |y: Line| {
        let mut s = Searcher::new(plane, order, stop_at_first, budget);
        s.assign(first, y);
        s.descend(1).map(|()| (s.solution.take(), s.count, s.nodes))
    };

    let results: Vec<Result<Partial, BijectionError>> = if cfg.parallel {
        roots.par_iter().map(|&y| branch(y)).collect()
    } else {
        let mut out = Vec::new();
        for &y in &roots {
            let r = branch(y);
            let done = stop_at_first && matches!(&r, Ok((Some(_), _, _)));
            let failed = r.is_err();
            out.push(r);
            if done || failed {
                break;
            }
        }
        out
    };

    let mut solution = None;
    let (mut count, mut nodes) = (0, roots.len() as u64);
    for r in results {
        let (s, c, n) = r?;
        count += c;
        nodes += n;
        if solution.is_none() {
            solution = s;
        }
    }
    Ok((solution, count, nodes))
}

struct Searcher<'a> {
    plane: &'a ProjectivePlane,
    order: &'a [Point],
    image: Vec<Option<Line>>,
    used: Vec<bool>,
    assigned: Vec<Point>,
    stop_at_first: bool,
    budget: &'a Budget,
    solution: Option<Vec<Line>>,
    count: u64,
    nodes: u64,
}

impl<'a> Searcher<'a> {
    fn new(plane: &'a ProjectivePlane, order: &'a [Point], stop_at_first: bool, budget: &'a Budget) -> Self {
        let n = plane.size();
        Searcher {
            plane,
            order,
            image: vec![None; n],
            used: vec![false; n],
            assigned: Vec::with_capacity(n),
            stop_at_first,
            budget,
            solution: None,
            count: 0,
            nodes: 0,
        }
    }

    fn assign(&mut self, x: Point, y: Line) {
        self.image[x.0] = Some(y);
        self.used[y.0] = true;
        self.assigned.push(x);
    }

    fn unassign(&mut self, x: Point) {
        if let Some(y) = self.image[x.0].take() {
            self.used[y.0] = false;
        }
        self.assigned.pop();
    }

    /// Property 1 plus property 2 against the already assigned points only.
    fn admissible(&self, x: Point, y: Line) -> bool {
        if self.used[y.0] || self.plane.incident(x, y) {
            return false;
        }
        self.assigned.iter().all(|&x2| {
            let y2 = self.image[x2.0].expect("assigned");
            let meet = self.plane.meet_unchecked(y, y2);
            !self.plane.incident(meet, self.plane.join_unchecked(x, x2))
        })
    }

    fn descend(&mut self, depth: usize) -> Result<(), BijectionError> {
        self.nodes += 1;
        self.check_budget()?;
        let Some(&x) = self.order.get(depth) else {
            self.count += 1;
            if self.solution.is_none() {
                self.solution = Some(self.image.iter().map(|y| y.expect("complete")).collect());
            }
            return Ok(());
        };
        for l in 0..self.plane.size() {
            let y = Line(l);
            if !self.admissible(x, y) {
                continue;
            }
            self.assign(x, y);
            let r = self.descend(depth + 1);
            self.unassign(x);
            r?;
            if self.stop_at_first && self.solution.is_some() {
                return Ok(());
            }
        }
        Ok(())
    }

    fn check_budget(&self) -> Result<(), BijectionError> {
        let over_time = self.nodes.is_multiple_of(1024) && self.budget.deadline.is_some_and(|d| Instant::now() > d);
        let over_nodes = self.budget.nodes.is_some_and(|b| self.nodes > b);
        if over_time || over_nodes {
            return Err(BijectionError::Timeout {
                nodes: self.nodes,
                elapsed_ms: self.budget.start.elapsed().as_millis(),
            });
        }
        Ok(())
    }
}

/// `T*` on the line `y`: each `x ∈ I(y)` goes to `T(x) ∩ y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinePermutation {
    pub line: Line,
    pub domain: Vec<Point>,
    pub image: Vec<Point>,
}

impl LinePermutation {
    pub fn apply(&self, x: Point) -> Option<Point> {
        self.domain.iter().position(|&d| d == x).map(|i| self.image[i])
    }

    pub fn is_bijection(&self) -> bool {
        let mut sorted = self.image.clone();
        sorted.sort();
        sorted == self.domain
    }

    pub fn fixed_points(&self) -> Vec<Point> {
        self.domain.iter().zip(&self.image).filter(|(a, b)| a == b).map(|(a, _)| *a).collect()
    }
}

pub fn induced_line_map(
    plane: &ProjectivePlane,
    t: &BasicBijection,
    y: Line,
) -> Result<LinePermutation, BijectionError> {
    t.check_plane(plane)?;
    let domain = plane.points_on(y).to_vec();
    let image = domain
        .iter()
        .map(|&x| {
            let tx = t.image(x);
            if tx == y {
                Err(BijectionError::DomainError { point: x })
            } else {
                Ok(plane.meet_unchecked(tx, y))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LinePermutation { line: y, domain, image })
}
