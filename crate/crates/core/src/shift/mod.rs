//! Transition matrices over the tuple alphabet, the hypotheses they are
//! meant to satisfy, and the two-dimensional words they admit.
//!
//! Orientation follows the word condition `M_j(w(l + e_j), w(l)) = 1`:
//! in a word, the cell one step along `e_j` is a row index of `M_j` whose
//! column is the current cell.

mod io;
mod matrix;
mod words;

pub use io::{read_csv, read_matrix_market, write_csv, write_matrix_market, AlphabetEntry, AlphabetJson, WordsJson};
pub use matrix::{BitMatrix, CountMatrix, ProductMatrix};
pub use words::{
    check_h3, count_words, count_words_dfs, enumerate_words, find_nonperiodic_witness, strip_count, H3Report, H3Scope,
    PeriodOutcome, Shape, Word, WordBudget, WordCount, WordIter,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Verdict;
use crate::presentation::{rotate, verify_polygonal_axioms, AxiomReport, Presentation, Tag, Tuple};

/// Largest alphabet for which dense matrices are built.
pub const MAX_ALPHABET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("presentation fails the polygonal axioms")]
    InvalidPresentation(Box<AxiomReport>),
    #[error("alphabet of {size} tuples exceeds the dense limit {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },
    #[error("matrices have different sizes ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("the period p must be nonzero")]
    ZeroPeriod,
    #[error("p_max must be at least 1")]
    InvalidPMax,
    #[error("window {window:?} cannot hold periods up to {p_max}")]
    WindowTooSmall { window: Shape, p_max: usize },
    #[error("word search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

/// One way of reading the mediating tuple `ψ` in the definition of the
/// matrices. With rotation `r`, `M₁(α, β) = 1` iff some `ψ` has
/// `ψ[r] = α[1]` and `ψ[r+1] = β[0]`, and `M₂(α, γ) = 1` iff some `ψ` has
/// `ψ[r] = α[1]` and `ψ[r+2] = γ[2]` (positions mod 3). Rotation 0 without
/// exclusion is the adopted reading. The non-backtracking variants also
/// require `ψ` to lie on a different face from `α` and from `β` (or `γ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reading {
    pub rotation: u8,
    pub non_backtracking: bool,
}

impl Reading {
    pub const ADOPTED: Reading = Reading { rotation: 0, non_backtracking: false };

    /// Adopted reading first, then the other rotations, then the
    /// non-backtracking variants in the same order.
    pub fn candidates() -> [Reading; 6] {
        let r = |rotation, non_backtracking| Reading { rotation, non_backtracking };
        [r(0, false), r(1, false), r(2, false), r(0, true), r(1, true), r(2, true)]
    }

    fn positions(self) -> [usize; 3] {
        let r = usize::from(self.rotation % 3);
        [r, (r + 1) % 3, (r + 2) % 3]
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rotation {}", self.rotation)?;
        if self.non_backtracking {
            write!(f, ", non-backtracking")?;
        }
        if *self == Reading::ADOPTED {
            write!(f, " (adopted)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub reading: Reading,
    pub h0: Verdict,
    pub h1a: Verdict,
    pub h1b: Verdict,
    pub unique_completion: Verdict,
    pub h2_union: Verdict,
    pub h2_per_matrix: Verdict,
    pub max_product_entry: u32,
}

impl CandidateVerdict {
    pub fn passed(&self) -> bool {
        [self.h0, self.h1a, self.h1b, self.unique_completion, self.h2_union, self.h2_per_matrix]
            .iter()
            .all(|v| v.passed())
    }
}

/// Outcome of trying every candidate reading. `fallback` is set when none
/// passed and the adopted reading was kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingSelection {
    pub chosen: Reading,
    pub fallback: bool,
    pub candidates: Vec<CandidateVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftSystem {
    order: Option<usize>,
    reading: Option<Reading>,
    selection: Option<ReadingSelection>,
    alphabet: Vec<Tuple>,
    m: [BitMatrix; 2],
    mt: [BitMatrix; 2],
}

/// Builds the system under the first candidate reading that passes H0, H1,
/// unique completion and H2, or under the adopted reading if none does.
pub fn build_transition_matrices(pres: &Presentation) -> Result<ShiftSystem, ShiftError> {
    let mut systems = Vec::new();
    let mut candidates = Vec::new();
    for reading in Reading::candidates() {
        let sys = build_with_reading(pres, reading)?;
        candidates.push(evaluate(&sys, reading));
        systems.push(sys);
    }
    let pick = candidates.iter().position(CandidateVerdict::passed);
    let index = pick.unwrap_or(0);
    let mut sys = systems.swap_remove(index);
    sys.selection = Some(ReadingSelection { chosen: candidates[index].reading, fallback: pick.is_none(), candidates });
    Ok(sys)
}

pub fn build_with_reading(pres: &Presentation, reading: Reading) -> Result<ShiftSystem, ShiftError> {
    let report = verify_polygonal_axioms(pres);
    if !report.passed() {
        return Err(ShiftError::InvalidPresentation(Box::new(report)));
    }
    let alphabet = pres.tuples().to_vec();
    let n = alphabet.len();
    if n > MAX_ALPHABET {
        return Err(ShiftError::AlphabetTooLarge { size: n, limit: MAX_ALPHABET });
    }
    let copy = pres.points_per_copy();
    let letter_id = |t: &Tuple, p: usize| t[p].tag.slot() * copy + t[p].index;

    let mut face_ids = BTreeMap::new();
    let face: Vec<usize> = alphabet
        .iter()
        .map(|t| {
            let r1 = rotate(t);
            let canon = *[*t, r1, rotate(&r1)].iter().min().unwrap_or(t);
            let next = face_ids.len();
            *face_ids.entry(canon).or_insert(next)
        })
        .collect();
    let mut by_pos = vec![vec![Vec::new(); 3 * copy]; 3];
    for (a, t) in alphabet.iter().enumerate() {
        for p in 0..3 {
            by_pos[p][letter_id(t, p)].push(a);
        }
    }

    let [pa, pb, pc] = reading.positions();
    let nb = reading.non_backtracking;
    let mut m1 = BitMatrix::zeros(n);
    let mut m2 = BitMatrix::zeros(n);
    for (a, alpha) in alphabet.iter().enumerate() {
        for &psi in &by_pos[pa][letter_id(alpha, 1)] {
            if nb && face[psi] == face[a] {
                continue;
            }
            for &b in &by_pos[0][letter_id(&alphabet[psi], pb)] {
                if !(nb && face[b] == face[psi]) {
                    m1.set(a, b, true);
                }
            }
            for &c in &by_pos[2][letter_id(&alphabet[psi], pc)] {
                if !(nb && face[c] == face[psi]) {
                    m2.set(a, c, true);
                }
            }
        }
    }
    let mut sys = ShiftSystem::from_matrices(m1, m2)?;
    sys.order = Some(pres.order());
    sys.reading = Some(reading);
    sys.alphabet = alphabet;
    Ok(sys)
}

fn evaluate(sys: &ShiftSystem, reading: Reading) -> CandidateVerdict {
    let h1 = check_h1(sys);
    let h2 = check_h2(sys);
    CandidateVerdict {
        reading,
        h0: check_h0(sys).verdict,
        h1a: h1.h1a.verdict,
        h1b: h1.h1b.verdict,
        unique_completion: check_unique_completion(sys).check.verdict,
        h2_union: h2.union.verdict,
        h2_per_matrix: h2.per_matrix(),
        max_product_entry: h1.max_entry,
    }
}

impl ShiftSystem {
    /// A bare system without an alphabet, for checking arbitrary matrices.
    pub fn from_matrices(m1: BitMatrix, m2: BitMatrix) -> Result<Self, ShiftError> {
        if m1.size() != m2.size() {
            return Err(ShiftError::DimensionMismatch(m1.size(), m2.size()));
        }
        let mt = [m1.transpose(), m2.transpose()];
        Ok(ShiftSystem { order: None, reading: None, selection: None, alphabet: Vec::new(), m: [m1, m2], mt })
    }

    pub fn size(&self) -> usize {
        self.m[0].size()
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn reading(&self) -> Option<Reading> {
        self.reading
    }

    pub fn selection(&self) -> Option<&ReadingSelection> {
        self.selection.as_ref()
    }

    /// Tuples of `𝒯` in canonical order; empty for bare systems.
    pub fn alphabet(&self) -> &[Tuple] {
        &self.alphabet
    }

    pub fn m1(&self) -> &BitMatrix {
        &self.m[0]
    }

    pub fn m2(&self) -> &BitMatrix {
        &self.m[1]
    }

    /// `M_j` for `j ∈ {1, 2}`.
    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.m[j - 1]
    }

    pub(crate) fn transposed(&self, j: usize) -> &BitMatrix {
        &self.mt[j - 1]
    }

    /// Copy tag of the tuple's first letter.
    pub fn color(&self, a: usize) -> Option<Tag> {
        self.alphabet.get(a).map(|t| t[0].tag)
    }

    /// The same system with one entry changed, for planted faults.
    pub fn with_entry(&self, j: usize, row: usize, col: usize, value: bool) -> Self {
        let mut m = self.m.clone();
        m[j - 1].set(row, col, value);
        let mt = [m[0].transpose(), m[1].transpose()];
        ShiftSystem { m, mt, ..self.clone() }
    }
}

/// A verdict with an optional witness of failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check<W> {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<W>,
}

impl<W> Check<W> {
    fn from_witness(witness: Option<W>) -> Self {
        Check { verdict: Verdict::from_bool(witness.is_none()), witness }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroMatrix {
    pub matrix: u8,
}

pub fn check_h0(sys: &ShiftSystem) -> Check<ZeroMatrix> {
    Check::from_witness((1..=2).find(|&j| sys.matrix(usize::from(j)).is_zero()).map(|matrix| ZeroMatrix { matrix }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub row: usize,
    pub col: usize,
    pub m1m2: u32,
    pub m2m1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Report {
    pub h1a: Check<ProductEntry>,
    pub h1b: Check<ProductEntry>,
    pub max_entry: u32,
}

pub fn check_h1(sys: &ShiftSystem) -> H1Report {
    let p = sys.m1().product(sys.m2());
    let q = sys.m2().product(sys.m1());
    let entry = |(row, col, m1m2): (usize, usize, u32)| ProductEntry { row, col, m1m2, m2m1: q.get(row, col) };
    let h1a = Check::from_witness(p.iter().find(|&(i, j, e)| e != q.get(i, j)).map(entry));
    let h1b = Check::from_witness(p.iter().find(|&(_, _, e)| e > 1).map(entry));
    H1Report { h1a, h1b, max_entry: p.max_entry() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionWitness {
    pub alpha: usize,
    pub beta: usize,
    pub psi: usize,
    pub completions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionReport {
    #[serde(flatten)]
    pub check: Check<CompletionWitness>,
    /// Chains `α → β → ψ` with `M₁(α, β) = M₂(β, ψ) = 1`.
    pub chains: u64,
    /// Chains with exactly one completing `γ`.
    pub completed_once: u64,
}

/// For each chain `M₁(α, β) = M₂(β, ψ) = 1`, the number of `γ` with
/// `M₂(α, γ) = M₁(γ, ψ) = 1` must be one. The count depends only on
/// `(α, ψ)`, so the scan runs over those pairs weighted by their chains.
pub fn check_unique_completion(sys: &ShiftSystem) -> CompletionReport {
    let chains = sys.m1().product(sys.m2());
    let completions = sys.m2().product(sys.m1());
    let mut witness = None;
    let mut completed_once = 0;
    for (alpha, psi, c) in chains.iter() {
        if c == 0 {
            continue;
        }
        if completions.get(alpha, psi) == 1 {
            completed_once += u64::from(c);
        } else if witness.is_none() {
            let beta = sys.m1().row_ones(alpha).find(|&b| sys.m2().get(b, psi)).unwrap_or(usize::MAX);
            let gammas = sys.m2().row_ones(alpha).filter(|&g| sys.m1().get(g, psi)).collect();
            witness = Some(CompletionWitness { alpha, beta, psi, completions: gammas });
        }
    }
    CompletionReport { check: Check::from_witness(witness), chains: chains.total(), completed_once }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnreachablePair {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct H2Report {
    pub union: Check<UnreachablePair>,
    pub m1: Check<UnreachablePair>,
    pub m2: Check<UnreachablePair>,
}

impl H2Report {
    pub fn per_matrix(&self) -> Verdict {
        Verdict::from_bool(self.m1.passed() && self.m2.passed())
    }
}

pub fn check_h2(sys: &ShiftSystem) -> H2Report {
    let union = sys.m1().union(sys.m2());
    H2Report {
        union: Check::from_witness(unreachable(&union, &union.transpose())),
        m1: Check::from_witness(unreachable(sys.m1(), sys.transposed(1))),
        m2: Check::from_witness(unreachable(sys.m2(), sys.transposed(2))),
    }
}

/// A pair `(from, to)` with no path, or `None` if strongly connected.
fn unreachable(m: &BitMatrix, mt: &BitMatrix) -> Option<UnreachablePair> {
    if m.size() == 0 {
        return None;
    }
    if let Some(to) = m.reachable(0).iter().position(|&r| !r) {
        return Some(UnreachablePair { from: 0, to });
    }
    mt.reachable(0).iter().position(|&r| !r).map(|from| UnreachablePair { from, to: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumRange {
    pub min: usize,
    pub max: usize,
}

impl SumRange {
    fn of(sums: &[usize]) -> Self {
        SumRange { min: sums.iter().copied().min().unwrap_or(0), max: sums.iter().copied().max().unwrap_or(0) }
    }
}

/// Row and column sums of one matrix, plus the colour shift every one of
/// its entries induces (row colour minus column colour, mod 3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub ones: usize,
    pub row_sums: SumRange,
    pub col_sums: SumRange,
    pub color_shift: Option<u8>,
}

pub fn matrix_stats(sys: &ShiftSystem, j: usize) -> MatrixStats {
    let m = sys.matrix(j);
    let mut shifts = m.entries().filter_map(|(a, b)| {
        let (ca, cb) = (sys.color(a)?, sys.color(b)?);
        Some((cb.get() + 3 - ca.get()) % 3)
    });
    let first = shifts.next();
    let color_shift = match first {
        Some(s) if shifts.all(|t| t == s) => Some(s),
        _ => None,
    };
    MatrixStats {
        ones: m.count_ones(),
        row_sums: SumRange::of(&m.row_sums()),
        col_sums: SumRange::of(&sys.transposed(j).row_sums()),
        color_shift,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub q: Option<usize>,
    pub alphabet_size: usize,
    pub reading: Option<Reading>,
    pub selection: Option<ReadingSelection>,
    pub m1: MatrixStats,
    pub m2: MatrixStats,
    pub h0: Check<ZeroMatrix>,
    pub h1: H1Report,
    pub unique_completion: CompletionReport,
    pub h2: H2Report,
    pub h3: Option<H3Report>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.h0.passed()
            && self.h1.h1a.passed()
            && self.h1.h1b.passed()
            && self.unique_completion.check.passed()
            && self.h2.union.passed()
            && self.h2.per_matrix().passed()
            && self.h3.as_ref().is_none_or(|h| h.verdict.passed())
    }
}

/// Every check; H3 only when a scope `(p_max, window)` is given.
pub fn check_hypotheses(
    sys: &ShiftSystem,
    h3: Option<(usize, Shape)>,
    budget: &WordBudget,
) -> Result<HypothesisReport, ShiftError> {
    let h3 = match h3 {
        Some((p_max, window)) => Some(check_h3(sys, p_max, window, budget)?),
        None => None,
    };
    Ok(HypothesisReport {
        q: sys.order,
        alphabet_size: sys.size(),
        reading: sys.reading,
        selection: sys.selection.clone(),
        m1: matrix_stats(sys, 1),
        m2: matrix_stats(sys, 2),
        h0: check_h0(sys),
        h1: check_h1(sys),
        unique_completion: check_unique_completion(sys),
        h2: check_h2(sys),
        h3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::{search_basic_bijection, SearchConfig, SearchOutcome};
    use crate::geometry::build_plane;
    use crate::presentation::build_presentation;

    pub(crate) fn pipeline(q: u32) -> Presentation {
        let plane = build_plane(q).unwrap();
        let SearchOutcome::Found(t) = search_basic_bijection(&plane, &SearchConfig::default()).unwrap().outcome else {
            panic!()
        };
        build_presentation(&plane, &t).unwrap()
    }

    fn bits(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|&b| b == 1).collect()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn adopted_reading_row_sums() {
        for (q, n, s) in [(2, 63, 9), (3, 156, 16)] {
            let sys = build_with_reading(&pipeline(q), Reading::ADOPTED).unwrap();
            assert_eq!(sys.size(), n);
            for j in [1, 2] {
                let st = matrix_stats(&sys, j);
                assert_eq!(st.row_sums, SumRange { min: s, max: s });
                assert_eq!(st.col_sums, SumRange { min: s, max: s });
            }
        }
    }

    #[test]
    fn adopted_reading_matches_definition() {
        // direct quantifier scan over all ψ
        let pres = pipeline(2);
        let sys = build_with_reading(&pres, Reading::ADOPTED).unwrap();
        let t = pres.tuples();
        for (a, al) in t.iter().enumerate() {
            for (b, be) in t.iter().enumerate() {
                let m1 = t.iter().any(|psi| psi[0] == al[1] && psi[1] == be[0]);
                let m2 = t.iter().any(|psi| psi[0] == al[1] && psi[2] == be[2]);
                assert_eq!(sys.m1().get(a, b), m1);
                assert_eq!(sys.m2().get(a, b), m2);
            }
        }
    }

    #[test]
    fn color_shift_of_m1() {
        let sys = build_with_reading(&pipeline(2), Reading::ADOPTED).unwrap();
        assert_eq!(matrix_stats(&sys, 1).color_shift, Some(2));
    }

    #[test]
    fn h0_cases() {
        let zero = ShiftSystem::from_matrices(BitMatrix::zeros(2), BitMatrix::identity(2)).unwrap();
        assert_eq!(check_h0(&zero).witness, Some(ZeroMatrix { matrix: 1 }));
        let single = bits(&[&[0, 1], &[0, 0]]);
        assert!(check_h0(&ShiftSystem::from_matrices(single.clone(), single).unwrap()).passed());
    }

    #[test]
    fn h1_small_cases() {
        let j = bits(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let r = check_h1(&ShiftSystem::from_matrices(j.clone(), j).unwrap());
        assert!(r.h1a.passed());
        assert!(!r.h1b.passed());
        assert_eq!(r.max_entry, 2);
        let id = BitMatrix::identity(3);
        let r = check_h1(&ShiftSystem::from_matrices(id.clone(), id).unwrap());
        assert!(r.h1a.passed() && r.h1b.passed());
    }

    #[test]
    fn h2_block_diagonal_fails() {
        let m = bits(&[&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1], &[0, 0, 1, 1]]);
        let r = check_h2(&ShiftSystem::from_matrices(m.clone(), m).unwrap());
        assert!(!r.union.passed());
        let w = r.union.witness.unwrap();
        assert!((w.from < 2) != (w.to < 2));
    }

    #[test]
    fn unique_completion_on_permutations() {
        let p = bits(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        let sys = ShiftSystem::from_matrices(p.clone(), p).unwrap();
        let r = check_unique_completion(&sys);
        assert!(r.check.passed());
        assert_eq!(r.chains, 3);
        let broken = sys.with_entry(2, 0, 1, false);
        assert!(!check_unique_completion(&broken).check.passed());
    }

    #[test]
    fn unique_completion_matches_brute_force_count() {
        let sys = build_with_reading(&pipeline(2), Reading::ADOPTED).unwrap();
        let (m1, m2) = (sys.m1(), sys.m2());
        let n = sys.size();
        let (mut chains, mut once) = (0u64, 0u64);
        for a in 0..n {
            for b in m1.row_ones(a) {
                for psi in m2.row_ones(b) {
                    chains += 1;
                    let g = (0..n).filter(|&g| m2.get(a, g) && m1.get(g, psi)).count();
                    once += u64::from(g == 1);
                }
            }
        }
        let r = check_unique_completion(&sys);
        assert_eq!((r.chains, r.completed_once), (chains, once));
        assert_eq!(chains, 63 * 81);
    }

    #[test]
    fn selection_reports_every_candidate() {
        let sys = build_transition_matrices(&pipeline(2)).unwrap();
        let sel = sys.selection().unwrap();
        assert_eq!(sel.candidates.len(), 6);
        assert_eq!(sel.candidates[0].reading, Reading::ADOPTED);
        assert_eq!(sys.reading(), Some(sel.chosen));
        if sel.fallback {
            assert_eq!(sel.chosen, Reading::ADOPTED);
        }
    }
}
