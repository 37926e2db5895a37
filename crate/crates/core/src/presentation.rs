//! The triple set `K` over a plane with a basic bijection `T`, and the tagged
//! triangle presentation built from it.
//!
//! `K` holds every `(x_i, x_j, x_k)` with `x_i ∈ y_k`, `x_j ∈ y_i` and
//! `x_j ∈ y_k`, where `y_t = T(x_t)`. (The same set is first introduced under
//! the name `O`; only `K` is used here.) Tagging copies the plane three times:
//! copies 1 and 2 are the plane itself, copy 3 is its dual, so the letter
//! `x_i^3` stands for the line `y_i` and the line letter `y_i^3` for the
//! point `x_i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bijection::{induced_line_map, BasicBijection, BijectionError, BijectionJson};
use crate::geometry::{BipartiteGraph, Point, ProjectivePlane};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("bijection is not usable with this plane")]
    UnverifiedBijection(#[from] BijectionError),
    #[error("triple set fails pair uniqueness ({} violations)", .0.violation_count())]
    InvalidK(Box<PairUniquenessReport>),
    #[error("malformed presentation: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub i: Point,
    pub j: Point,
    pub k: Point,
}

impl Triple {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Triple { i: Point(i), j: Point(j), k: Point(k) }
    }
}

/// Which ordered pair of a triple is used as a lookup key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairPosition {
    /// `(x_i, x_k)`, admissible iff `x_i ∈ y_k`.
    IK,
    /// `(x_i, x_j)`, admissible iff `x_j ∈ y_i`.
    IJ,
    /// `(x_j, x_k)`, admissible iff `x_j ∈ y_k`.
    JK,
}

impl PairPosition {
    pub const ALL: [PairPosition; 3] = [PairPosition::IK, PairPosition::IJ, PairPosition::JK];

    fn key(self, t: &Triple) -> (Point, Point) {
        match self {
            PairPosition::IK => (t.i, t.k),
            PairPosition::IJ => (t.i, t.j),
            PairPosition::JK => (t.j, t.k),
        }
    }

    fn admissible(self, plane: &ProjectivePlane, t: &BasicBijection, (a, b): (Point, Point)) -> bool {
        match self {
            PairPosition::IK => plane.incident(a, t.image(b)),
            PairPosition::IJ => plane.incident(b, t.image(a)),
            PairPosition::JK => plane.incident(a, t.image(b)),
        }
    }
}

const NONE: u32 = u32::MAX;

/// `K` in canonical sorted order, indexed by each of its three ordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    points: usize,
    triples: Vec<Triple>,
    index: [Vec<u32>; 3],
}

impl TripleSet {
    /// Sorts and deduplicates. When several triples share a pair the index
    /// keeps the first; [`verify_pair_uniqueness`] reports the clash.
    pub fn from_triples(points: usize, mut triples: Vec<Triple>) -> Self {
        triples.sort();
        triples.dedup();
        let mut index = [vec![NONE; points * points], vec![NONE; points * points], vec![NONE; points * points]];
        for (pos, slots) in PairPosition::ALL.iter().zip(index.iter_mut()) {
            for (n, t) in triples.iter().enumerate() {
                let (a, b) = pos.key(t);
                let slot = &mut slots[a.0 * points + b.0];
                if *slot == NONE {
                    *slot = n as u32;
                }
            }
        }
        TripleSet { points, triples, index }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn as_slice(&self) -> &[Triple] {
        &self.triples
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.binary_search(t).is_ok()
    }

    /// The triple whose `pos` pair is `(a, b)`, if any.
    pub fn extend(&self, pos: PairPosition, a: Point, b: Point) -> Option<Triple> {
        let slots = &self.index[PairPosition::ALL.iter().position(|&p| p == pos).unwrap_or(0)];
        match slots.get(a.0 * self.points + b.0) {
            Some(&n) if n != NONE => Some(self.triples[n as usize]),
            _ => None,
        }
    }
}

/// Independent ways of producing `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleConstruction {
    /// Filter all `|P|^3` index triples by the three incidences.
    BruteForce,
    /// From each `x_i ∈ y_k`: `x_j = y_i ∩ y_k`.
    Meet,
    /// From each `x_j ∈ y_i`: `y_k` is the line through `x_j` and `x_i`.
    Join,
    /// From each `x_j ∈ y_k`: `x_i` is the preimage of `x_j` under `T*` on `y_k`.
    InducedMap,
}

impl TripleConstruction {
    pub const ALL: [TripleConstruction; 4] = [
        TripleConstruction::BruteForce,
        TripleConstruction::Meet,
        TripleConstruction::Join,
        TripleConstruction::InducedMap,
    ];
}

/// `K` via the join construction.
pub fn build_triples(plane: &ProjectivePlane, t: &BasicBijection) -> Result<TripleSet, PresentationError> {
    build_triples_with(plane, t, TripleConstruction::Join)
}

pub fn build_triples_with(
    plane: &ProjectivePlane,
    t: &BasicBijection,
    how: TripleConstruction,
) -> Result<TripleSet, PresentationError> {
    t.check_plane(plane)?;
    let n = plane.size();
    let inverse = t.inverse();
    let y = |x: Point| t.image(x);
    let mut triples = Vec::new();
    match how {
        TripleConstruction::BruteForce => {
            for i in plane.points() {
                for j in plane.points() {
                    if !plane.incident(j, y(i)) {
                        continue;
                    }
                    for k in plane.points() {
                        if plane.incident(i, y(k)) && plane.incident(j, y(k)) {
                            triples.push(Triple { i, j, k });
                        }
                    }
                }
            }
        }
        TripleConstruction::Meet => {
            for k in plane.points() {
                for &i in plane.points_on(y(k)) {
                    let j = plane.meet_unchecked(y(i), y(k));
                    triples.push(Triple { i, j, k });
                }
            }
        }
        TripleConstruction::Join => {
            for i in plane.points() {
                for &j in plane.points_on(y(i)) {
                    let k = inverse[plane.join_unchecked(j, i).0];
                    triples.push(Triple { i, j, k });
                }
            }
        }
        TripleConstruction::InducedMap => {
            for k in plane.points() {
                let perm = induced_line_map(plane, t, y(k))?;
                for (&i, &j) in perm.domain.iter().zip(&perm.image) {
                    triples.push(Triple { i, j, k });
                }
            }
        }
    }
    Ok(TripleSet::from_triples(n, triples))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairViolation {
    pub pair: (Point, Point),
    pub admissible: bool,
    pub extensions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionReport {
    pub position: PairPosition,
    pub admissible_pairs: usize,
    pub uniquely_extended: usize,
    pub violations: Vec<PairViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairUniquenessReport {
    pub positions: Vec<PositionReport>,
}

impl PairUniquenessReport {
    pub fn passed(&self) -> bool {
        self.positions.iter().all(|p| p.violations.is_empty())
    }

    pub fn violation_count(&self) -> usize {
        self.positions.iter().map(|p| p.violations.len()).sum()
    }
}

/// For each pair position: every admissible pair lies in exactly one triple
/// and every other pair in none. Multiplicities are counted over the raw
/// triple list, so duplicates under a shared pair are caught.
pub fn verify_pair_uniqueness(k: &[Triple], plane: &ProjectivePlane, t: &BasicBijection) -> PairUniquenessReport {
    let n = plane.size();
    let positions = PairPosition::ALL
        .iter()
        .map(|&pos| {
            let mut counts = vec![0usize; n * n];
            for tr in k {
                let (a, b) = pos.key(tr);
                if a.0 < n && b.0 < n {
                    counts[a.0 * n + b.0] += 1;
                }
            }
            let mut report =
                PositionReport { position: pos, admissible_pairs: 0, uniquely_extended: 0, violations: Vec::new() };
            for a in plane.points() {
                for b in plane.points() {
                    let admissible = pos.admissible(plane, t, (a, b));
                    let extensions = counts[a.0 * n + b.0];
                    report.admissible_pairs += usize::from(admissible);
                    report.uniquely_extended += usize::from(admissible && extensions == 1);
                    if extensions != usize::from(admissible) {
                        report.violations.push(PairViolation { pair: (a, b), admissible, extensions });
                    }
                }
            }
            report
        })
        .collect();
    PairUniquenessReport { positions }
}

/// Copy tag 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tag(u8);

impl Tag {
    pub const ALL: [Tag; 3] = [Tag(1), Tag(2), Tag(3)];

    pub fn new(t: u8) -> Option<Tag> {
        (1..=3).contains(&t).then_some(Tag(t))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// `t + 1`, taken in `{1, 2, 3}`.
    pub fn next(self) -> Tag {
        Tag(self.0 % 3 + 1)
    }

    /// `t - 1`, taken in `{1, 2, 3}`.
    pub fn prev(self) -> Tag {
        Tag((self.0 + 1) % 3 + 1)
    }

    /// Zero-based position, for array indexing.
    pub fn slot(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point letter `x_i^t` of the alphabet `P = P1 ∪ P2 ∪ P3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    #[serde(rename = "t")]
    pub tag: Tag,
    #[serde(rename = "i")]
    pub index: usize,
}

impl Letter {
    pub fn new(tag: Tag, index: usize) -> Self {
        Letter { tag, index }
    }

    /// `λ(x_i^t) = y_i^{t+1}`.
    pub fn lambda(self) -> LineLetter {
        LineLetter { tag: self.tag.next(), index: self.index }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}^{}", self.index, self.tag)
    }
}

/// A line letter `y_i^t` of `L = L1 ∪ L2 ∪ L3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineLetter {
    #[serde(rename = "t")]
    pub tag: Tag,
    #[serde(rename = "i")]
    pub index: usize,
}

impl fmt::Display for LineLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}^{}", self.index, self.tag)
    }
}

pub type Tuple = [Letter; 3];

pub fn rotate(t: &Tuple) -> Tuple {
    [t[1], t[2], t[0]]
}

/// The tagged presentation `𝒯` with its link graphs and `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    order: usize,
    points: usize,
    bijection: BasicBijection,
    triples: TripleSet,
    tuples: Vec<Tuple>,
    /// `x_a ∈ y_b`, row-major over `(a, b)`.
    in_image: Vec<bool>,
}

/// Tags `K` into `𝒯 = {(x_i^1, x_j^2, x_k^3) and its rotations}`.
pub fn tag_presentation(
    k: &TripleSet,
    plane: &ProjectivePlane,
    t: &BasicBijection,
) -> Result<Presentation, PresentationError> {
    t.check_plane(plane)?;
    let report = verify_pair_uniqueness(k.as_slice(), plane, t);
    if !report.passed() {
        return Err(PresentationError::InvalidK(Box::new(report)));
    }
    let mut tuples = Vec::with_capacity(3 * k.len());
    for tr in k.iter() {
        let base = [Letter::new(Tag(1), tr.i.0), Letter::new(Tag(2), tr.j.0), Letter::new(Tag(3), tr.k.0)];
        let r1 = rotate(&base);
        let r2 = rotate(&r1);
        tuples.extend([base, r1, r2]);
    }
    tuples.sort();
    let n = plane.size();
    let mut in_image = vec![false; n * n];
    for a in plane.points() {
        for b in plane.points() {
            in_image[a.0 * n + b.0] = plane.incident(a, t.image(b));
        }
    }
    Ok(Presentation { order: plane.order(), points: n, bijection: t.clone(), triples: k.clone(), tuples, in_image })
}

/// `K` by the join construction, then tagging.
pub fn build_presentation(plane: &ProjectivePlane, t: &BasicBijection) -> Result<Presentation, PresentationError> {
    tag_presentation(&build_triples(plane, t)?, plane, t)
}

impl Presentation {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Points per plane, `q^2 + q + 1`.
    pub fn points_per_copy(&self) -> usize {
        self.points
    }

    pub fn bijection(&self) -> &BasicBijection {
        &self.bijection
    }

    pub fn triples(&self) -> &TripleSet {
        &self.triples
    }

    /// `𝒯` in canonical sorted order.
    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    /// The same presentation data with a different tuple set, for checking
    /// externally supplied or modified tuple sets.
    pub fn with_tuples(&self, mut tuples: Vec<Tuple>) -> Presentation {
        tuples.sort();
        Presentation { tuples, ..self.clone() }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        Tag::ALL.into_iter().flat_map(move |t| (0..self.points).map(move |i| Letter::new(t, i)))
    }

    fn contains_letter(&self, l: Letter) -> bool {
        l.index < self.points
    }

    /// Incidence of a point letter and a line letter inside the link graphs
    /// `G1`, `G2` (copies of the plane) and `G3` (the dual plane).
    pub fn incident(&self, p: Letter, l: LineLetter) -> bool {
        if p.tag != l.tag || p.index >= self.points || l.index >= self.points {
            return false;
        }
        let (a, b) = if p.tag == Tag(3) { (l.index, p.index) } else { (p.index, l.index) };
        self.in_image[a * self.points + b]
    }

    /// `G_t` with point letters as black and line letters as white vertices.
    pub fn link_graph(&self, tag: Tag) -> BipartiteGraph {
        let n = self.points;
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.incident(Letter::new(tag, a), LineLetter { tag, index: b }))
            .collect();
        BipartiteGraph::from_edges(n, n, &edges)
    }

    pub fn to_json(&self) -> PresentationJson {
        PresentationJson {
            q: self.order,
            t: self.bijection.to_json().t,
            k: self.triples.iter().map(|t| [t.i.0, t.j.0, t.k.0]).collect(),
            lambda: self.letters().map(|l| LambdaEntry { from: l, to: l.lambda() }).collect(),
            tuples: self.tuples.clone(),
        }
    }

    /// Rebuilds a presentation from its JSON form. `T` is re-verified
    /// against `plane`; `K`, `λ` and the tuples are taken as given and must
    /// be checked with the verifiers.
    pub fn from_json(plane: &ProjectivePlane, json: &PresentationJson) -> Result<Presentation, PresentationError> {
        let t = BasicBijection::from_json(plane, &BijectionJson { q: json.q, t: json.t.clone() })?;
        let n = plane.size();
        if json.k.iter().flatten().any(|&x| x >= n) {
            return Err(PresentationError::Malformed("triple index out of range".into()));
        }
        if json.tuples.iter().flatten().any(|l| l.index >= n) {
            return Err(PresentationError::Malformed("letter index out of range".into()));
        }
        for e in &json.lambda {
            if e.to != e.from.lambda() {
                return Err(PresentationError::Malformed(format!("lambda sends {} to {}", e.from, e.to)));
            }
        }
        let raw: Vec<Triple> = json.k.iter().map(|&[i, j, k]| Triple::new(i, j, k)).collect();
        let report = verify_pair_uniqueness(&raw, plane, &t);
        if !report.passed() {
            return Err(PresentationError::InvalidK(Box::new(report)));
        }
        let triples = TripleSet::from_triples(n, raw);
        let base = tag_presentation(&triples, plane, &t)?;
        Ok(base.with_tuples(json.tuples.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub from: Letter,
    pub to: LineLetter,
}

/// `{"q", "T", "K", "lambda", "tuples"}`; tuples are lists of `{"t", "i"}` letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub q: usize,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(rename = "K")]
    pub k: Vec<[usize; 3]>,
    pub lambda: Vec<LambdaEntry>,
    pub tuples: Vec<Tuple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionViolation {
    pub first: Letter,
    pub second: Letter,
    pub extends: bool,
    pub incident: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessViolation {
    pub first: Letter,
    pub second: Letter,
    pub thirds: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub tuples: usize,
    /// Axiom (1): rotations missing from the set.
    pub closure: Vec<Tuple>,
    /// Axiom (2), both directions.
    pub extension: Vec<ExtensionViolation>,
    /// Axiom (3).
    pub uniqueness: Vec<UniquenessViolation>,
    /// Letters of `P` that occur in no tuple.
    pub unused_letters: Vec<Letter>,
    /// Tuples whose tags are not a rotation of (1, 2, 3), or with letters outside `P`.
    pub bad_tags: Vec<Tuple>,
}

impl AxiomReport {
    pub fn closure_ok(&self) -> bool {
        self.closure.is_empty()
    }

    pub fn extension_ok(&self) -> bool {
        self.extension.is_empty()
    }

    pub fn uniqueness_ok(&self) -> bool {
        self.uniqueness.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.closure_ok()
            && self.extension_ok()
            && self.uniqueness_ok()
            && self.unused_letters.is_empty()
            && self.bad_tags.is_empty()
    }
}

/// Checks the polygonal presentation axioms on `pres.tuples()`: closure
/// under rotation, extension of `(a, b)` iff `b` is incident with `λ(a)`,
/// and at most one third letter per pair.
pub fn verify_polygonal_axioms(pres: &Presentation) -> AxiomReport {
    let set: BTreeSet<Tuple> = pres.tuples.iter().copied().collect();
    let closure = set.iter().map(rotate).filter(|r| !set.contains(r)).collect();

    let mut thirds: BTreeMap<(Letter, Letter), Vec<Letter>> = BTreeMap::new();
    for t in &set {
        thirds.entry((t[0], t[1])).or_default().push(t[2]);
    }
    let uniqueness = thirds
        .iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(&(first, second), v)| UniquenessViolation { first, second, thirds: v.clone() })
        .collect();

    let mut extension = Vec::new();
    for first in pres.letters() {
        for second in pres.letters() {
            let extends = thirds.contains_key(&(first, second));
            let incident = pres.incident(second, first.lambda());
            if extends != incident {
                extension.push(ExtensionViolation { first, second, extends, incident });
            }
        }
    }

    let used: BTreeSet<Letter> = set.iter().flatten().copied().collect();
    let unused_letters = pres.letters().filter(|l| !used.contains(l)).collect();
    let bad_tags = set
        .iter()
        .filter(|t| {
            !t.iter().all(|&l| pres.contains_letter(l)) || t[1].tag != t[0].tag.next() || t[2].tag != t[1].tag.next()
        })
        .copied()
        .collect();

    AxiomReport { tuples: set.len(), closure, extension, uniqueness, unused_letters, bad_tags }
}
