//! One line per acceptance criterion. Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::Value;

use polyshift::bijection::{
    induced_line_map, search_basic_bijection, verify_basic_bijection, BasicBijection, BijectionJson, BijectionReport,
    LinePermutation, SearchConfig, SearchMode, SearchOutcome,
};
use polyshift::complex::{build_polyhedron, verify_counts, ComplexJson, CountReport, Polyhedron};
use polyshift::geometry::{
    build_plane, certify_mgon, BipartiteGraph, MgonCertificate, PlaneJson, Point, ProjectivePlane,
};
use polyshift::presentation::{
    build_presentation, build_triples_with, verify_pair_uniqueness, verify_polygonal_axioms, AxiomReport,
    PairUniquenessReport, Presentation, PresentationJson, Tag, Triple, TripleConstruction,
};
use polyshift::shift::{
    build_transition_matrices, check_hypotheses, count_words, read_csv, read_matrix_market, AlphabetJson,
    HypothesisReport, ShiftSystem, WordBudget, WordCount,
};

const PLANE_LIMIT: Duration = Duration::from_secs(1);
const BIJECTION_LIMIT: Duration = Duration::from_secs(5);
const SHIFT_LIMIT: Duration = Duration::from_secs(60);
const H3_P_MAX: usize = 3;
const H3_WINDOW: [usize; 2] = [5, 5];
const STRIP_MAX: usize = 4;

type Criterion = fn() -> Result<(bool, String)>;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyshift"))
}

fn plane_params(q: usize) -> (usize, usize) {
    (q * q + q + 1, q + 1)
}

fn find_bijection(plane: &ProjectivePlane) -> Result<BasicBijection> {
    match search_basic_bijection(plane, &SearchConfig::new(SearchMode::FirstSolution))?.outcome {
        SearchOutcome::Found(t) => Ok(t),
        SearchOutcome::Count(_) => anyhow::bail!("search returned a count"),
    }
}

fn presentation(q: u32) -> Result<(ProjectivePlane, BasicBijection, Presentation)> {
    let plane = build_plane(q)?;
    let t = find_bijection(&plane)?;
    let pres = build_presentation(&plane, &t)?;
    Ok((plane, t, pres))
}

fn criterion_1() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [2usize, 3] {
        let start = Instant::now();
        let out = bin().args(["plane", "--q", &q.to_string()]).output()?;
        let elapsed = start.elapsed();
        let json: PlaneJson = serde_json::from_slice(&out.stdout).context("plane JSON on stdout")?;
        // from_json runs the exhaustive axiom check
        let plane = ProjectivePlane::from_json(&json)?;
        let (n, k) = plane_params(q);
        let shape_ok = plane.size() == n
            && plane.lines().count() == n
            && plane.lines().all(|l| plane.points_on(l).len() == k)
            && plane.points().all(|p| plane.lines_through(p).len() == k);
        let cert = certify_mgon(&plane.incidence_graph(), 3);
        ok &= out.status.success() && shape_ok && cert.verdict.passed() && elapsed < PLANE_LIMIT;
        detail.push(format!("q={q} ({n},{n},{k}) axioms ok, {:.3}s", elapsed.as_secs_f64()));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_2() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [2u32, 3] {
        let plane = build_plane(q)?;
        let start = Instant::now();
        let t = find_bijection(&plane)?;
        let elapsed = start.elapsed();
        let report = verify_basic_bijection(&plane, t.as_slice());
        let mut bijective = 0;
        for y in plane.lines() {
            if induced_line_map(&plane, &t, y)?.is_bijection() {
                bijective += 1;
            }
        }
        ok &= report.is_clean() && bijective == plane.size() && elapsed < BIJECTION_LIMIT;
        detail.push(format!(
            "q={q} violations {}+{}, induced maps bijective on {bijective}/{} lines, {:.3}s",
            report.property1.len(),
            report.property2.len(),
            plane.size(),
            elapsed.as_secs_f64()
        ));
    }
    Ok((ok, detail.join("; ")))
}

/// K straight from the incidence conditions.
fn oracle_triples(plane: &ProjectivePlane, t: &BasicBijection) -> BTreeSet<Triple> {
    let n = plane.size();
    let on = |x: usize, y: usize| plane.incident(Point(x), t.image(Point(y)));
    let mut k = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                if on(i, kk) && on(j, i) && on(j, kk) {
                    k.insert(Triple::new(i, j, kk));
                }
            }
        }
    }
    k
}

fn criterion_3() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, expected) in [(2u32, 21usize), (3, 52)] {
        let plane = build_plane(q)?;
        let t = find_bijection(&plane)?;
        let oracle = oracle_triples(&plane, &t);
        let mut agree = oracle.len() == expected;
        for how in TripleConstruction::ALL {
            let k = build_triples_with(&plane, &t, how)?;
            agree &= k.iter().copied().collect::<BTreeSet<_>>() == oracle;
        }
        let pairs = verify_pair_uniqueness(&Vec::from_iter(oracle.iter().copied()), &plane, &t);
        ok &= agree && pairs.passed();
        detail.push(format!(
            "q={q} |K|={} constructions agree={agree} pair violations={}",
            oracle.len(),
            pairs.violation_count()
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_4() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, expected) in [(2u32, 63usize), (3, 156)] {
        let (_, _, pres) = presentation(q)?;
        let qq = q as usize;
        let formula = 3 * (qq + 1) * (qq * qq + qq + 1);
        let axioms = verify_polygonal_axioms(&pres);
        ok &= pres.tuples().len() == expected && formula == expected && axioms.passed();
        detail.push(format!(
            "q={q} |T|={} closure={} extension={} uniqueness={}",
            pres.tuples().len(),
            axioms.closure_ok(),
            axioms.extension_ok(),
            axioms.uniqueness_ok()
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_5() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [2u32, 3] {
        let (plane, t, pres) = presentation(q)?;
        let poly = build_polyhedron(&pres)?;
        let counts = verify_counts(&poly, &pres);
        let qq = q as i64;
        ok &= counts.passed() && poly.euler_characteristic() == 3 + (qq - 2) * (qq * qq + qq + 1);
        if q == 2 {
            ok &= (Polyhedron::VERTICES, poly.edges().len(), poly.faces().len(), poly.euler_characteristic())
                == (3, 21, 21, 3);
        }
        let mut isos = 0;
        for link in poly.links() {
            let cert = certify_mgon(&link.to_bipartite(), 3);
            ok &= cert.verdict.passed()
                && cert.regular_degree == Some(q as usize + 1)
                && cert.girth == Some(6)
                && cert.diameter == Some(3);
            if link.natural_isomorphism(&plane, &t)?.is_some() {
                isos += 1;
            }
        }
        ok &= isos == 3;
        detail.push(format!(
            "q={q} V,E,F,chi = {},{},{},{} links 3-gons, isomorphisms {isos}/3",
            Polyhedron::VERTICES,
            poly.edges().len(),
            poly.faces().len(),
            poly.euler_characteristic()
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_6() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [2u32, 3] {
        let (_, _, pres) = presentation(q)?;
        let start = Instant::now();
        let sys = build_transition_matrices(&pres)?;
        let r = check_hypotheses(&sys, Some((H3_P_MAX, H3_WINDOW)), &WordBudget::default())?;
        let elapsed = start.elapsed();
        let h3 = r.h3.as_ref().context("H3 ran")?;
        ok &= r.passed() && elapsed < SHIFT_LIMIT;
        detail.push(format!(
            "q={q} [{}] H0={} H1a={} H1b={} (max entry {}) UC={} ({}/{} chains once) H2={} H3={} ({}/{} periods), {:.2}s",
            sys.reading().map(|r| r.to_string()).unwrap_or_default(),
            r.h0.passed(),
            r.h1.h1a.passed(),
            r.h1.h1b.passed(),
            r.h1.max_entry,
            r.unique_completion.check.passed(),
            r.unique_completion.completed_once,
            r.unique_completion.chains,
            r.h2.union.passed() && r.h2.per_matrix().passed(),
            h3.verdict.passed(),
            h3.witnesses(),
            h3.scope.tested,
            elapsed.as_secs_f64()
        ));
    }
    Ok((ok, detail.join("; ")))
}

/// Strip words as paths of length r in the digraph of one matrix.
fn oracle_paths(sys: &ShiftSystem, j: usize, r: usize) -> u64 {
    let m = sys.matrix(j);
    let mut ends = vec![1u64; sys.size()];
    for _ in 0..r {
        let mut next = vec![0u64; sys.size()];
        for (a, &c) in ends.iter().enumerate() {
            for b in m.row_ones(a) {
                next[b] += c;
            }
        }
        ends = next;
    }
    ends.iter().sum()
}

fn criterion_7() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [2u32, 3] {
        let (_, _, pres) = presentation(q)?;
        let sys = build_transition_matrices(&pres)?;
        let b = WordBudget::default();
        let mut strips = 0;
        let mut agree = 0;
        for r in 0..=STRIP_MAX {
            for (j, shape) in [(1, [r, 0]), (2, [0, r])] {
                if r == 0 && j == 2 {
                    continue;
                }
                let c = count_words(&sys, shape, &b)?;
                strips += 1;
                if c.agrees() && c.dfs == oracle_paths(&sys, j, r) {
                    agree += 1;
                }
            }
        }
        ok &= agree == strips;
        let (w00, w10) = (count_words(&sys, [0, 0], &b)?.dfs, count_words(&sys, [1, 0], &b)?.dfs);
        if q == 2 {
            ok &= w00 == 63 && w10 == 567 && w10 == sys.m1().count_ones() as u64;
        }
        let square = count_words(&sys, [1, 1], &b)?.dfs;
        let product = sys.m1().product(sys.m2()).total();
        ok &= square == product;
        detail.push(format!(
            "q={q} strips {agree}/{strips} agree, |W(0,0)|={w00} |W(1,0)|={w10}, |W(1,1)|={square} vs sum(M1M2)={product}"
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        files.push((e.file_name().to_string_lossy().into_owned(), fs::read(e.path())?));
    }
    files.sort();
    Ok(files)
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    Ok(serde_json::from_slice(bytes)?)
}

fn field<T: DeserializeOwned>(v: &Value, key: &str) -> Result<T> {
    Ok(serde_json::from_value(v.get(key).with_context(|| format!("missing {key}"))?.clone())?)
}

/// Edges `a -- b;` of a DOT file, as (black, white) indices after the prefixes.
fn read_dot(text: &str, black: &str, white: &str) -> Result<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    for line in text.lines().filter(|l| l.contains("--")) {
        let (a, b) = line.trim().trim_end_matches(';').split_once(" -- ").context("edge syntax")?;
        let a = a.strip_prefix(black).context("black prefix")?.parse()?;
        let b = b.strip_prefix(white).context("white prefix")?.parse()?;
        edges.insert((a, b));
    }
    Ok(edges)
}

fn edge_set(g: &BipartiteGraph) -> BTreeSet<(usize, usize)> {
    g.edges().into_iter().collect()
}

/// Reads one emitted file and re-verifies it against freshly built objects.
fn round_trip(name: &str, bytes: &[u8], dir: &Path) -> Result<()> {
    let plane = build_plane(2)?;
    let t: BasicBijection =
        BasicBijection::from_json(&plane, &parse::<BijectionJson>(&fs::read(dir.join("bijection.json"))?)?)?;
    let pres = build_presentation(&plane, &t)?;
    let sys = build_transition_matrices(&pres)?;
    let text = std::str::from_utf8(bytes)?;
    match name {
        "plane.json" => ensure!(ProjectivePlane::from_json(&parse(bytes)?)?.fingerprint() == plane.fingerprint()),
        "plane.txt" => ensure!(ProjectivePlane::parse_incidence(text)?.fingerprint() == plane.fingerprint()),
        "plane.dot" => ensure!(read_dot(text, "x", "y")? == edge_set(&plane.incidence_graph())),
        "plane-report.json" => {
            let v: Value = parse(bytes)?;
            ensure!(field::<MgonCertificate>(&v, "generalized_triangle")? == certify_mgon(&plane.incidence_graph(), 3));
        }
        "bijection.json" => ensure!(verify_basic_bijection(&plane, t.as_slice()).is_clean()),
        "bijection-report.json" => {
            let v: Value = parse(bytes)?;
            ensure!(field::<BijectionReport>(&v, "properties")? == verify_basic_bijection(&plane, t.as_slice()));
            let maps: Vec<LinePermutation> = field(&v, "induced_line_maps")?;
            for m in &maps {
                ensure!(*m == induced_line_map(&plane, &t, m.line)?);
            }
            ensure!(maps.len() == plane.size());
        }
        "presentation.json" => {
            let read = Presentation::from_json(&plane, &parse::<PresentationJson>(bytes)?)?;
            ensure!(read.tuples() == pres.tuples() && verify_polygonal_axioms(&read).passed());
        }
        "presentation-report.json" => {
            let v: Value = parse(bytes)?;
            ensure!(field::<AxiomReport>(&v, "axioms")? == verify_polygonal_axioms(&pres));
            let pairs: PairUniquenessReport = field(&v, "pair_uniqueness")?;
            ensure!(pairs == verify_pair_uniqueness(pres.triples().as_slice(), &plane, &t));
        }
        "complex.json" => ensure!(parse::<ComplexJson>(bytes)? == build_polyhedron(&pres)?.to_json()),
        "polyhedron-report.json" => {
            let poly = build_polyhedron(&pres)?;
            ensure!(field::<CountReport>(&parse(bytes)?, "counts")? == verify_counts(&poly, &pres));
        }
        "link1.dot" | "link2.dot" | "link3.dot" => {
            let u: u8 = name[4..5].parse()?;
            let link = build_polyhedron(&pres)?.link(Tag::new(u).context("tag")?);
            ensure!(read_dot(text, &format!("x{u}_"), &format!("y{u}_"))? == edge_set(&link.to_bipartite()));
        }
        "m1.mtx" => ensure!(read_matrix_market(text)? == *sys.m1()),
        "m2.mtx" => ensure!(read_matrix_market(text)? == *sys.m2()),
        "m1.csv" => ensure!(read_csv(text)? == *sys.m1()),
        "m2.csv" => ensure!(read_csv(text)? == *sys.m2()),
        "alphabet.json" => ensure!(parse::<AlphabetJson>(bytes)? == AlphabetJson::of(&sys)),
        "hypotheses.json" => {
            let read: HypothesisReport = parse(bytes)?;
            let m1 = read_matrix_market(&fs::read_to_string(dir.join("m1.mtx"))?)?;
            let m2 = read_matrix_market(&fs::read_to_string(dir.join("m2.mtx"))?)?;
            let again = check_hypotheses(
                &ShiftSystem::from_matrices(m1, m2)?,
                Some((H3_P_MAX, H3_WINDOW)),
                &WordBudget::default(),
            )?;
            ensure!(read.h0 == again.h0 && read.h1 == again.h1 && read.unique_completion == again.unique_completion);
            ensure!(read.h2 == again.h2 && read.h3 == again.h3);
        }
        "word-counts.json" => {
            let v: Value = parse(bytes)?;
            let b = WordBudget::default();
            for c in field::<Vec<WordCount>>(&v, "strips")? {
                ensure!(c == count_words(&sys, c.shape, &b)?);
            }
            let square: WordCount = field(&v, "square")?;
            ensure!(square == count_words(&sys, [1, 1], &b)?);
        }
        "certificate.json" => {
            let v: Value = parse(bytes)?;
            let gates = v["gates"].as_array().context("gates")?;
            let all = gates.iter().all(|g| g["passed"] == true || g["mandatory"] == false);
            ensure!(v["passed"] == all && !gates.is_empty());
        }
        other => anyhow::bail!("no reader for {other}"),
    }
    Ok(())
}

fn criterion_8() -> Result<(bool, String)> {
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let mut codes = Vec::new();
    for d in &dirs {
        let status = bin().args(["pipeline", "--q", "2", "--out"]).arg(d.path()).output()?.status;
        codes.push(status.code());
    }
    let (a, b) = (snapshot(dirs[0].path())?, snapshot(dirs[1].path())?);
    let identical = a == b && !a.is_empty();
    let mut failures = Vec::new();
    for (name, bytes) in &a {
        if let Err(e) = round_trip(name, bytes, dirs[0].path()) {
            failures.push(format!("{name}: {e:#}"));
        }
    }
    let words = tempfile::tempdir()?;
    let emitted = bin().args(["words", "--q", "2", "--shape", "1,1", "--out"]).arg(words.path()).status()?.success();
    let verified =
        bin().args(["words", "--q", "2", "--verify"]).arg(words.path().join("words.json")).status()?.success();
    if !(emitted && verified) {
        failures.push("words.json".into());
    }
    let detail = format!(
        "{} files byte-identical={identical}, round-trip failures {}{}, pipeline exit codes {:?}",
        a.len(),
        failures.len(),
        if failures.is_empty() { String::new() } else { format!(" ({})", failures.join("; ")) },
        codes
    );
    Ok((identical && failures.is_empty(), detail))
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("plane construction", criterion_1),
        ("basic bijection", criterion_2),
        ("triples", criterion_3),
        ("presentation", criterion_4),
        ("polyhedron and links", criterion_5),
        ("shift hypotheses", criterion_6),
        ("word counting", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e:#}")));
        if !ok {
            failed += 1;
        }
        println!("criterion {}: {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
