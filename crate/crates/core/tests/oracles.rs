//! Library results against direct recomputation from the definitions.

mod common;

use std::collections::BTreeSet;

use polyshift::bijection::{induced_line_map, verify_basic_bijection};
use polyshift::complex::build_polyhedron;
use polyshift::geometry::Point;
use polyshift::presentation::{build_triples_with, Triple, TripleConstruction, Tuple};
use polyshift::shift::{
    build_transition_matrices, build_with_reading, check_h1, check_h2, check_h3, check_unique_completion, count_words,
    count_words_dfs, BitMatrix, Reading, ShiftSystem, WordBudget,
};

use common::setup;

fn same_face(a: &Tuple, b: &Tuple) -> bool {
    (0..3).any(|s| (0..3).all(|p| a[p] == b[(p + s) % 3]))
}

/// M₁ and M₂ by scanning every (α, ψ, β) and (α, ψ, γ) triple.
fn oracle_matrices(alphabet: &[Tuple], reading: Reading) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let n = alphabet.len();
    let r = usize::from(reading.rotation);
    let (pa, pb, pc) = (r % 3, (r + 1) % 3, (r + 2) % 3);
    let nb = reading.non_backtracking;
    let mut m1 = vec![vec![false; n]; n];
    let mut m2 = vec![vec![false; n]; n];
    for (a, alpha) in alphabet.iter().enumerate() {
        for psi in alphabet {
            if psi[pa] != alpha[1] || (nb && same_face(psi, alpha)) {
                continue;
            }
            for (b, beta) in alphabet.iter().enumerate() {
                if psi[pb] == beta[0] && !(nb && same_face(psi, beta)) {
                    m1[a][b] = true;
                }
                if psi[pc] == beta[2] && !(nb && same_face(psi, beta)) {
                    m2[a][b] = true;
                }
            }
        }
    }
    (m1, m2)
}

fn dense(m: &BitMatrix) -> Vec<Vec<bool>> {
    (0..m.size()).map(|i| (0..m.size()).map(|j| m.get(i, j)).collect()).collect()
}

fn naive_product(a: &BitMatrix, b: &BitMatrix) -> Vec<Vec<u32>> {
    let n = a.size();
    let mut p = vec![vec![0; n]; n];
    for (i, row) in p.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = (0..n).filter(|&k| a.get(i, k) && b.get(k, j)).count() as u32;
        }
    }
    p
}

#[test]
fn transition_matrices_match_definition_under_every_reading() {
    let (_, _, pres) = setup(2);
    for reading in Reading::candidates() {
        let sys = build_with_reading(&pres, reading).unwrap();
        let (m1, m2) = oracle_matrices(sys.alphabet(), reading);
        assert_eq!(dense(sys.m1()), m1, "{reading}");
        assert_eq!(dense(sys.m2()), m2, "{reading}");
    }
}

#[test]
fn adopted_matrices_match_definition_at_q3() {
    let (_, _, pres) = setup(3);
    let sys = build_with_reading(&pres, Reading::ADOPTED).unwrap();
    let (m1, m2) = oracle_matrices(sys.alphabet(), Reading::ADOPTED);
    assert_eq!(dense(sys.m1()), m1);
    assert_eq!(dense(sys.m2()), m2);
}

#[test]
fn adopted_row_sums_are_q_plus_one_squared() {
    for q in [2u32, 3] {
        let (_, _, pres) = setup(q);
        let sys = build_with_reading(&pres, Reading::ADOPTED).unwrap();
        let (m1, m2) = oracle_matrices(sys.alphabet(), Reading::ADOPTED);
        let want = ((q + 1) * (q + 1)) as usize;
        for m in [&m1, &m2] {
            assert!(m.iter().all(|row| row.iter().filter(|&&x| x).count() == want));
            assert!((0..m.len()).all(|j| m.iter().filter(|row| row[j]).count() == want));
        }
    }
}

#[test]
fn horizontal_pairs_count_567_at_q2() {
    let (_, _, pres) = setup(2);
    let sys = build_transition_matrices(&pres).unwrap();
    assert_eq!(sys.size(), 63);
    let (m1, _) = oracle_matrices(sys.alphabet(), sys.reading().unwrap());
    let pairs = m1.iter().flatten().filter(|&&x| x).count() as u64;
    assert_eq!(pairs, 567);
    assert_eq!(count_words(&sys, [1, 0], &WordBudget::default()).unwrap().dfs, pairs);
    assert_eq!(count_words(&sys, [0, 0], &WordBudget::default()).unwrap().dfs, 63);
}

fn paths(m: &BitMatrix, from: usize, left: usize) -> u64 {
    if left == 0 {
        return 1;
    }
    (0..m.size()).filter(|&b| m.get(from, b)).map(|b| paths(m, b, left - 1)).sum()
}

#[test]
fn strip_counts_match_path_enumeration() {
    let (_, _, pres) = setup(2);
    let sys = build_transition_matrices(&pres).unwrap();
    let b = WordBudget::default();
    for r in 0..=4 {
        for (j, shape) in [(1, [r, 0]), (2, [0, r])] {
            let want: u64 = (0..sys.size()).map(|a| paths(sys.matrix(j), a, r)).sum();
            let c = count_words(&sys, shape, &b).unwrap();
            assert_eq!(c.dfs, want, "{shape:?}");
            assert_eq!(c.matrix_power, Some(want), "{shape:?}");
        }
    }
}

fn square_words(sys: &ShiftSystem) -> u64 {
    let (m1, m2) = (sys.m1(), sys.m2());
    let n = sys.size();
    let mut count = 0;
    for w00 in 0..n {
        for w10 in (0..n).filter(|&w| m1.get(w00, w)) {
            for w01 in (0..n).filter(|&w| m2.get(w00, w)) {
                count += (0..n).filter(|&w| m1.get(w01, w) && m2.get(w10, w)).count() as u64;
            }
        }
    }
    count
}

#[test]
fn square_count_matches_enumeration() {
    let (_, _, pres) = setup(2);
    for reading in [Reading::ADOPTED, Reading { rotation: 0, non_backtracking: true }] {
        let sys = build_with_reading(&pres, reading).unwrap();
        assert_eq!(count_words_dfs(&sys, [1, 1], &WordBudget::default()).unwrap(), square_words(&sys), "{reading}");
    }
}

#[test]
fn products_and_completion_match_naive_counts() {
    let (_, _, pres) = setup(2);
    for reading in Reading::candidates() {
        let sys = build_with_reading(&pres, reading).unwrap();
        let p = naive_product(sys.m1(), sys.m2());
        let q = naive_product(sys.m2(), sys.m1());
        let h1 = check_h1(&sys);
        assert_eq!(h1.max_entry, p.iter().flatten().copied().max().unwrap());
        assert_eq!(h1.h1a.passed(), p == q);
        assert_eq!(h1.h1b.passed(), p.iter().flatten().all(|&e| e <= 1));

        let mut chains = 0u64;
        let mut once = 0u64;
        for (alpha, row) in p.iter().enumerate() {
            for (psi, &c) in row.iter().enumerate() {
                chains += u64::from(c);
                if q[alpha][psi] == 1 {
                    once += u64::from(c);
                }
            }
        }
        let uc = check_unique_completion(&sys);
        assert_eq!((uc.chains, uc.completed_once), (chains, once), "{reading}");
        assert_eq!(uc.check.passed(), once == chains);
    }
}

fn strongly_connected(m: &[Vec<bool>]) -> bool {
    let n = m.len();
    let mut reach = m.to_vec();
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (x, &y) in row.iter_mut().zip(&via) {
                *x |= y;
            }
        }
    }
    reach.iter().flatten().all(|&x| x)
}

#[test]
fn irreducibility_matches_transitive_closure() {
    let (_, _, pres) = setup(2);
    let sys = build_transition_matrices(&pres).unwrap();
    let (m1, m2) = (dense(sys.m1()), dense(sys.m2()));
    let union: Vec<Vec<bool>> =
        m1.iter().zip(&m2).map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x || *y).collect()).collect();
    let h2 = check_h2(&sys);
    assert_eq!(h2.union.passed(), strongly_connected(&union));
    assert_eq!(h2.m1.passed(), strongly_connected(&m1));
    assert_eq!(h2.m2.passed(), strongly_connected(&m2));
}

#[test]
fn h3_tests_every_small_period() {
    let (_, _, pres) = setup(2);
    let sys = build_transition_matrices(&pres).unwrap();
    for p_max in [1usize, 2, 3] {
        let r = check_h3(&sys, p_max, [5, 5], &WordBudget::default()).unwrap();
        let side = 2 * p_max + 1;
        assert_eq!(r.scope.tested, side * side - 1);
        assert_eq!(r.outcomes.len(), side * side - 1);
    }
}

#[test]
fn triples_match_incidence_filter() {
    for q in [2u32, 3, 4] {
        let (plane, t, _) = setup(q);
        let n = plane.size();
        let on = |x: usize, y: usize| plane.incident(Point(x), t.image(Point(y)));
        let mut want = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if on(i, k) && on(j, i) && on(j, k) {
                        want.insert(Triple::new(i, j, k));
                    }
                }
            }
        }
        let qq = q as usize;
        assert_eq!(want.len(), (qq + 1) * (qq * qq + qq + 1));
        for how in TripleConstruction::ALL {
            let k = build_triples_with(&plane, &t, how).unwrap();
            assert_eq!(k.iter().copied().collect::<BTreeSet<_>>(), want, "{how:?}");
        }
    }
}

#[test]
fn euler_characteristic_from_distinct_letters_and_faces() {
    for q in [2u32, 3, 4] {
        let (_, _, pres) = setup(q);
        let poly = build_polyhedron(&pres).unwrap();
        let letters: BTreeSet<_> = pres.tuples().iter().flatten().copied().collect();
        let mut faces = BTreeSet::new();
        for t in pres.tuples() {
            let mut rots = [*t, [t[1], t[2], t[0]], [t[2], t[0], t[1]]];
            rots.sort();
            faces.insert(rots[0]);
        }
        let chi = 3 - letters.len() as i64 + faces.len() as i64;
        assert_eq!(poly.euler_characteristic(), chi);
        let qq = q as i64;
        assert_eq!(chi, 3 + (qq - 2) * (qq * qq + qq + 1));
    }
}

#[test]
fn induced_maps_match_meets() {
    let (plane, t, _) = setup(3);
    assert!(verify_basic_bijection(&plane, t.as_slice()).is_clean());
    for y in plane.lines() {
        let map = induced_line_map(&plane, &t, y).unwrap();
        for &x in plane.points_on(y) {
            let image = plane.points_on(y).iter().copied().find(|&z| plane.incident(z, t.image(x))).unwrap();
            assert_eq!(map.apply(x), Some(image));
        }
        assert!(map.is_bijection());
    }
}
