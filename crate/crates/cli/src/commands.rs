use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use polyshift::bijection::{
    induced_line_map, search_basic_bijection, verify_basic_bijection, BasicBijection, BijectionJson, LinePermutation,
    SearchConfig, SearchMode, SearchOutcome, RECOMMENDED_MAX_ORDER,
};
use polyshift::complex::{build_polyhedron, verify_counts, ComplexJson, CountReport, Polyhedron};
use polyshift::geometry::{
    build_plane, certify_mgon, Isomorphism, Line, MgonCertificate, PlaneJson, ProjectivePlane, MAX_ISO_VERTICES,
};
use polyshift::presentation::{
    build_triples_with, rotate, tag_presentation, verify_pair_uniqueness, verify_polygonal_axioms, AxiomReport,
    PairUniquenessReport, Presentation, PresentationJson, Tag, TripleConstruction,
};
use polyshift::shift::{
    build_transition_matrices, check_hypotheses, count_words, enumerate_words, read_csv, read_matrix_market, write_csv,
    write_matrix_market, AlphabetJson, BitMatrix, HypothesisReport, Reading, Shape, ShiftSystem, WordBudget, WordCount,
    WordsJson,
};

use crate::output::{Artifact, Format, Gate, Outcome};
use crate::Common;

/// Brute-force triple scans are skipped above this many points.
const BRUTE_FORCE_POINTS: usize = 300;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn budget(c: &Common) -> Option<Duration> {
    c.budget_ms.map(Duration::from_millis)
}

fn word_budget(c: &Common) -> WordBudget {
    WordBudget { deadline: budget(c).map(|d| Instant::now() + d), ..WordBudget::default() }
}

pub fn load_plane(c: &Common) -> Result<ProjectivePlane> {
    let Some(path) = &c.file else {
        return Ok(build_plane(c.q.unwrap_or(2))?);
    };
    let text = read(path)?;
    let plane = if text.trim_start().starts_with('{') {
        let json: PlaneJson = serde_json::from_str(&text).context("parsing plane JSON")?;
        ProjectivePlane::from_json(&json)?
    } else {
        ProjectivePlane::parse_incidence(&text)?
    };
    if let Some(q) = c.q {
        if q as usize != plane.order() {
            bail!("--q {q} does not match the plane of order {} in {}", plane.order(), path.display());
        }
    }
    Ok(plane)
}

#[derive(Debug, Clone, Serialize)]
struct SearchSummary {
    mode: SearchMode,
    nodes: u64,
    pinned: bool,
}

fn warn_order(plane: &ProjectivePlane) {
    if plane.order() > RECOMMENDED_MAX_ORDER {
        eprintln!(
            "warning: q = {} is above {RECOMMENDED_MAX_ORDER}; the bijection search may not finish (see --budget-ms)",
            plane.order()
        );
    }
}

fn load_bijection(c: &Common, plane: &ProjectivePlane) -> Result<(BasicBijection, Option<SearchSummary>)> {
    if let Some(path) = &c.seed_file {
        let json: BijectionJson = serde_json::from_str(&read(path)?).context("parsing bijection JSON")?;
        return Ok((BasicBijection::from_json(plane, &json)?, None));
    }
    warn_order(plane);
    let cfg = SearchConfig { time_budget: budget(c), ..SearchConfig::new(SearchMode::FirstSolution) };
    let result = search_basic_bijection(plane, &cfg).context(
        "basic bijections are expected to exist for every Desarguesian plane; the search did not produce one",
    )?;
    let SearchOutcome::Found(t) = result.outcome else { unreachable!("first-solution search returns a map") };
    Ok((t, Some(SearchSummary { mode: SearchMode::FirstSolution, nodes: result.nodes, pinned: result.pinned })))
}

fn load_presentation(c: &Common) -> Result<(ProjectivePlane, BasicBijection, Presentation)> {
    let plane = load_plane(c)?;
    let (t, _) = load_bijection(c, &plane)?;
    let k = build_triples_with(&plane, &t, TripleConstruction::Join)?;
    let pres = tag_presentation(&k, &plane, &t)?;
    Ok((plane, t, pres))
}

#[derive(Serialize)]
struct PlaneReport {
    q: usize,
    points: usize,
    lines: usize,
    points_per_line: usize,
    lines_per_point: usize,
    fingerprint: String,
    generalized_triangle: MgonCertificate,
}

fn plane_part(out: &mut Outcome, plane: &ProjectivePlane) -> Result<()> {
    let g = plane.incidence_graph();
    let cert = certify_mgon(&g, 3);
    let report = PlaneReport {
        q: plane.order(),
        points: plane.size(),
        lines: plane.size(),
        points_per_line: plane.points_on(Line(0)).len(),
        lines_per_point: plane.lines_through(polyshift::geometry::Point(0)).len(),
        fingerprint: format!("{:016x}", plane.fingerprint()),
        generalized_triangle: cert.clone(),
    };
    out.gate(
        "plane axioms",
        true,
        true,
        format!(
            "q={}: {} points, {} lines, {} points per line",
            report.q, report.points, report.lines, report.points_per_line
        ),
    );
    out.gate("incidence graph generalized 3-gon", true, cert.verdict.passed(), mgon_detail(&cert));
    out.artifacts.push(Artifact::json("plane.json", &plane.to_json())?);
    out.artifacts.push(Artifact::new("plane.txt", Format::Text, plane.to_incidence_text()));
    out.artifacts.push(Artifact::new("plane.dot", Format::Dot, g.to_dot("plane", "x", "y")));
    out.artifacts.push(Artifact::json("plane-report.json", &report)?);
    Ok(())
}

fn mgon_detail(cert: &MgonCertificate) -> String {
    let show = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    format!(
        "{} vertices, {} edges, degree {}, girth {}, diameter {}",
        cert.vertices,
        cert.edges,
        show(cert.regular_degree),
        show(cert.girth),
        show(cert.diameter)
    )
}

pub fn plane(c: &Common) -> Result<Outcome> {
    let mut out = Outcome::default();
    plane_part(&mut out, &load_plane(c)?)?;
    Ok(out)
}

#[derive(Serialize)]
struct BijectionReportJson {
    q: usize,
    search: Option<SearchSummary>,
    properties: polyshift::bijection::BijectionReport,
    induced_line_maps: Vec<LinePermutation>,
}

fn bijection_gates(
    out: &mut Outcome,
    plane: &ProjectivePlane,
    map: &[Line],
    search: Option<SearchSummary>,
) -> Result<Option<BasicBijection>> {
    let report = verify_basic_bijection(plane, map);
    out.gate(
        "T is a bijection P -> L",
        true,
        report.bijective,
        format!("{} unmapped, {} repeated", report.unmapped.len(), report.repeated.len()),
    );
    out.gate("property 1: x not on T(x)", true, report.property1.is_empty(), violations(report.property1.len()));
    out.gate("property 2: T(x1)^T(x2) off x1x2", true, report.property2.is_empty(), violations(report.property2.len()));
    let t = report.is_clean().then(|| BasicBijection::new(plane, map.to_vec())).transpose()?;
    let maps = match &t {
        Some(t) => plane.lines().map(|y| induced_line_map(plane, t, y)).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let bijective = maps.iter().filter(|m| m.is_bijection()).count();
    out.gate(
        "induced maps T* bijective on lines",
        true,
        t.is_some() && bijective == plane.size(),
        format!("{bijective} of {} lines", plane.size()),
    );
    let json = BijectionJson { q: plane.order(), t: map.iter().map(|l| l.0).collect() };
    out.artifacts.push(Artifact::json("bijection.json", &json)?);
    out.artifacts.push(Artifact::json(
        "bijection-report.json",
        &BijectionReportJson { q: plane.order(), search, properties: report, induced_line_maps: maps },
    )?);
    Ok(t)
}

fn violations(n: usize) -> String {
    format!("{n} violations")
}

pub fn bijection(c: &Common, count_all: bool, exhaustive: bool, verify: Option<&Path>) -> Result<Outcome> {
    let plane = load_plane(c)?;
    let mut out = Outcome::default();
    if let Some(path) = verify {
        let json: BijectionJson = serde_json::from_str(&read(path)?).context("parsing bijection JSON")?;
        if json.q != plane.order() {
            bail!("bijection is for q={}, plane has q={}", json.q, plane.order());
        }
        let map: Vec<Line> = json.t.iter().map(|&l| Line(l)).collect();
        bijection_gates(&mut out, &plane, &map, None)?;
        return Ok(out);
    }
    if count_all || exhaustive {
        warn_order(&plane);
        let mode = if count_all { SearchMode::CountAll } else { SearchMode::ExhaustiveNonexistence };
        let cfg = SearchConfig { time_budget: budget(c), symmetry_fix: Some(false), ..SearchConfig::new(mode) };
        let result = search_basic_bijection(&plane, &cfg)?;
        if let SearchOutcome::Count(n) = result.outcome {
            out.gate("basic bijections exist", true, n > 0, format!("{n} solutions, {} nodes", result.nodes));
            #[derive(Serialize)]
            struct CountJson {
                q: usize,
                solutions: u64,
                nodes: u64,
            }
            out.artifacts.push(Artifact::json(
                "bijection-count.json",
                &CountJson { q: plane.order(), solutions: n, nodes: result.nodes },
            )?);
            return Ok(out);
        }
        let SearchOutcome::Found(t) = result.outcome else { unreachable!() };
        let summary = SearchSummary { mode, nodes: result.nodes, pinned: result.pinned };
        bijection_gates(&mut out, &plane, t.as_slice(), Some(summary))?;
        return Ok(out);
    }
    let (t, search) = load_bijection(c, &plane)?;
    bijection_gates(&mut out, &plane, t.as_slice(), search)?;
    Ok(out)
}

#[derive(Serialize)]
struct ConstructionSize {
    construction: TripleConstruction,
    size: usize,
    agrees: bool,
}

#[derive(Serialize)]
struct PresentationReport {
    q: usize,
    triples: usize,
    constructions: Vec<ConstructionSize>,
    pair_uniqueness: PairUniquenessReport,
    tuples: usize,
    axioms: AxiomReport,
}

fn axiom_gates(out: &mut Outcome, axioms: &AxiomReport) {
    out.gate("axiom 1: closed under rotation", true, axioms.closure_ok(), format!("{} missing", axioms.closure.len()));
    out.gate("axiom 2: extension iff incidence", true, axioms.extension_ok(), violations(axioms.extension.len()));
    out.gate("axiom 3: unique third letter", true, axioms.uniqueness_ok(), violations(axioms.uniqueness.len()));
    out.gate(
        "alphabet used, tags cyclic",
        true,
        axioms.unused_letters.is_empty() && axioms.bad_tags.is_empty(),
        format!("{} unused letters, {} bad tuples", axioms.unused_letters.len(), axioms.bad_tags.len()),
    );
}

fn presentation_part(out: &mut Outcome, plane: &ProjectivePlane, t: &BasicBijection) -> Result<Presentation> {
    let q = plane.order();
    let n = plane.size();
    let reference = build_triples_with(plane, t, TripleConstruction::Join)?;
    let mut constructions = Vec::new();
    for how in TripleConstruction::ALL {
        if how == TripleConstruction::BruteForce && n > BRUTE_FORCE_POINTS {
            out.notes.push(format!("brute-force triple scan skipped ({n} points)"));
            continue;
        }
        let k = build_triples_with(plane, t, how)?;
        constructions.push(ConstructionSize { construction: how, size: k.len(), agrees: k == reference });
    }
    let expected = (q + 1) * n;
    out.gate(
        "triple constructions agree",
        true,
        constructions.iter().all(|c| c.agrees),
        format!("{} constructions", constructions.len()),
    );
    out.gate("|K| = (q+1)(q^2+q+1)", true, reference.len() == expected, format!("|K| = {}", reference.len()));
    let pairs = verify_pair_uniqueness(reference.as_slice(), plane, t);
    out.gate(
        "pair uniqueness in K",
        true,
        pairs.passed(),
        format!("3 positions, {} violations", pairs.violation_count()),
    );
    let pres = tag_presentation(&reference, plane, t)?;
    out.gate(
        "|T| = 3(q+1)(q^2+q+1)",
        true,
        pres.tuples().len() == 3 * expected,
        format!("|T| = {}", pres.tuples().len()),
    );
    let axioms = verify_polygonal_axioms(&pres);
    axiom_gates(out, &axioms);
    out.artifacts.push(Artifact::json("presentation.json", &pres.to_json())?);
    out.artifacts.push(Artifact::json(
        "presentation-report.json",
        &PresentationReport {
            q,
            triples: reference.len(),
            constructions,
            pair_uniqueness: pairs,
            tuples: pres.tuples().len(),
            axioms,
        },
    )?);
    Ok(pres)
}

pub fn presentation(c: &Common, verify: Option<&Path>) -> Result<Outcome> {
    let plane = load_plane(c)?;
    let mut out = Outcome::default();
    if let Some(path) = verify {
        let json: PresentationJson = serde_json::from_str(&read(path)?).context("parsing presentation JSON")?;
        let pres = Presentation::from_json(&plane, &json)?;
        out.gate("K passes pair uniqueness", true, true, format!("|K| = {}", pres.triples().len()));
        axiom_gates(&mut out, &verify_polygonal_axioms(&pres));
        let canonical = tag_presentation(pres.triples(), &plane, pres.bijection())?;
        out.gate(
            "tuples are the tagging of K",
            true,
            canonical.tuples() == pres.tuples(),
            format!("{} tuples", pres.tuples().len()),
        );
        return Ok(out);
    }
    let (t, _) = load_bijection(c, &plane)?;
    presentation_part(&mut out, &plane, &t)?;
    Ok(out)
}

#[derive(Serialize)]
struct LinkReport {
    vertex: Tag,
    certificate: MgonCertificate,
    natural_isomorphism: Option<Isomorphism>,
    isomorphism_found_by_search: Option<bool>,
}

#[derive(Serialize)]
struct PolyhedronReport {
    counts: CountReport,
    links: Vec<LinkReport>,
}

fn polyhedron_part(
    out: &mut Outcome,
    plane: &ProjectivePlane,
    t: &BasicBijection,
    pres: &Presentation,
) -> Result<Polyhedron> {
    let poly = build_polyhedron(pres)?;
    let counts = verify_counts(&poly, pres);
    let n = plane.size();
    out.gate(
        "cells V, E, F and Euler characteristic",
        true,
        counts.edges == 3 * n
            && 3 * counts.faces == pres.tuples().len()
            && counts.euler_characteristic == counts.expected_euler_characteristic,
        format!("V={} E={} F={} chi={}", counts.vertices, counts.edges, counts.faces, counts.euler_characteristic),
    );
    out.gate(
        "counts from links (sum s/2, sum t/3)",
        true,
        counts.derived_agree,
        format!("E={} F={}", counts.derived_edges, counts.derived_faces),
    );
    out.gate(
        "printed counts (k sum s, sum t)",
        false,
        counts.printed_agree,
        format!("E={} F={}", counts.printed_edges, counts.printed_faces),
    );

    let mut links = Vec::new();
    for link in poly.links() {
        let u = link.vertex;
        let g = link.to_bipartite();
        let certificate = certify_mgon(&g, 3);
        out.gate(&format!("link {u} generalized 3-gon"), true, certificate.verdict.passed(), mgon_detail(&certificate));
        let natural = link.natural_isomorphism(plane, t)?;
        let target = if u == Tag::ALL[2] { "G'" } else { "G" };
        out.gate(
            &format!("link {u} naturally isomorphic to {target}"),
            true,
            natural.is_some(),
            "tagging map preserves incidence".to_string(),
        );
        let searched =
            if g.vertex_count() <= MAX_ISO_VERTICES { Some(link.search_isomorphism(plane)?.is_some()) } else { None };
        out.artifacts.push(Artifact::new(&format!("link{u}.dot"), Format::Dot, link.to_dot()));
        links.push(LinkReport {
            vertex: u,
            certificate,
            natural_isomorphism: natural,
            isomorphism_found_by_search: searched,
        });
    }
    out.artifacts.insert(out.artifacts.len() - links.len(), Artifact::json("complex.json", &poly.to_json())?);
    out.artifacts.push(Artifact::json("polyhedron-report.json", &PolyhedronReport { counts, links })?);
    Ok(poly)
}

pub fn polyhedron(c: &Common, verify: Option<&Path>) -> Result<Outcome> {
    let (plane, t, pres) = load_presentation(c)?;
    let mut out = Outcome::default();
    if let Some(path) = verify {
        let json: ComplexJson = serde_json::from_str(&read(path)?).context("parsing complex JSON")?;
        let poly = build_polyhedron(&pres)?;
        out.gate("three vertices", true, json.vertices == 3, format!("{} vertices", json.vertices));
        out.gate("edges match the alphabet", true, json.edges == poly.edges(), format!("{} edges", json.edges.len()));
        let tuples: Vec<_> = json
            .faces
            .iter()
            .flat_map(|f| {
                let r1 = rotate(f);
                [*f, r1, rotate(&r1)]
            })
            .collect();
        axiom_gates(&mut out, &verify_polygonal_axioms(&pres.with_tuples(tuples)));
        out.gate(
            "faces match the presentation",
            true,
            json.faces == poly.faces(),
            format!("{} faces", json.faces.len()),
        );
        return Ok(out);
    }
    polyhedron_part(&mut out, &plane, &t, &pres)?;
    Ok(out)
}

fn reading_note(sys: &ShiftSystem) -> String {
    match (sys.reading(), sys.selection()) {
        (Some(r), Some(sel)) if sel.fallback => {
            let tried: Vec<String> = sel
                .candidates
                .iter()
                .map(|c| {
                    format!("[{}: H1a {:?}, H1b {:?}, max entry {}]", c.reading, c.h1a, c.h1b, c.max_product_entry)
                })
                .collect();
            format!("reading: {r}; no candidate passes every check, kept the adopted one; tried {}", tried.join(" "))
        }
        (Some(r), _) => format!("reading: {r}"),
        _ => "reading: matrices supplied directly".to_string(),
    }
}

fn hypothesis_gates(out: &mut Outcome, r: &HypothesisReport) {
    out.gate("H0: M1, M2 nonzero", true, r.h0.passed(), format!("{} and {} ones", r.m1.ones, r.m2.ones));
    let entry = |w: &Option<polyshift::shift::ProductEntry>| match w {
        Some(e) => format!("at ({}, {}): M1M2 = {}, M2M1 = {}", e.row, e.col, e.m1m2, e.m2m1),
        None => "exact".to_string(),
    };
    out.gate("H1a: M1M2 = M2M1", true, r.h1.h1a.passed(), entry(&r.h1.h1a.witness));
    out.gate("H1b: M1M2 is 0/1", true, r.h1.h1b.passed(), format!("max entry {}", r.h1.max_entry));
    let uc = &r.unique_completion;
    out.gate(
        "unique completion",
        true,
        uc.check.passed(),
        format!("{} of {} chains complete exactly once", uc.completed_once, uc.chains),
    );
    out.gate("H2: union digraph irreducible", true, r.h2.union.passed(), "strong connectivity".to_string());
    out.gate(
        "H2: each M_j irreducible",
        true,
        r.h2.per_matrix().passed(),
        format!("M1 {:?}, M2 {:?}", r.h2.m1.verdict, r.h2.m2.verdict),
    );
    if let Some(h3) = &r.h3 {
        out.gate(
            "H3: non-periodic words",
            true,
            h3.verdict.passed(),
            format!(
                "{}/{} periods with |p_i| <= {} (window {}x{})",
                h3.witnesses(),
                h3.scope.tested,
                h3.scope.p_max,
                h3.scope.window[0],
                h3.scope.window[1]
            ),
        );
    }
}

fn shift_part(out: &mut Outcome, c: &Common, sys: &ShiftSystem) -> Result<HypothesisReport> {
    let report = check_hypotheses(sys, Some((c.p_max, c.window)), &word_budget(c))?;
    out.notes.push(reading_note(sys));
    out.notes.push(format!(
        "alphabet {}; row sums M1 {}..{}, M2 {}..{}",
        report.alphabet_size,
        report.m1.row_sums.min,
        report.m1.row_sums.max,
        report.m2.row_sums.min,
        report.m2.row_sums.max
    ));
    hypothesis_gates(out, &report);
    out.artifacts.push(Artifact::json("hypotheses.json", &report)?);
    for (j, m) in [(1, sys.m1()), (2, sys.m2())] {
        out.artifacts.push(Artifact::new(&format!("m{j}.mtx"), Format::Mm, write_matrix_market(m)));
        out.artifacts.push(Artifact::new(&format!("m{j}.csv"), Format::Csv, write_csv(m)));
    }
    out.artifacts.push(Artifact::json("alphabet.json", &AlphabetJson::of(sys))?);
    Ok(report)
}

fn read_matrix(path: &Path) -> Result<BitMatrix> {
    let text = read(path)?;
    let m = if text.starts_with("%%") { read_matrix_market(&text) } else { read_csv(&text) };
    m.with_context(|| format!("reading matrix {}", path.display()))
}

pub fn shift(c: &Common, matrices: Option<(&Path, &Path)>) -> Result<Outcome> {
    let (_, _, pres) = load_presentation(c)?;
    let built = build_transition_matrices(&pres)?;
    let mut out = Outcome::default();
    match matrices {
        Some((p1, p2)) => {
            let (m1, m2) = (read_matrix(p1)?, read_matrix(p2)?);
            out.gate(
                "matrices equal the rebuilt ones",
                true,
                &m1 == built.m1() && &m2 == built.m2(),
                format!("{}", built.reading().unwrap_or(Reading::ADOPTED)),
            );
            let sys = ShiftSystem::from_matrices(m1, m2)?;
            let report = check_hypotheses(&sys, Some((c.p_max, c.window)), &word_budget(c))?;
            hypothesis_gates(&mut out, &report);
            out.artifacts.insert(0, Artifact::json("hypotheses.json", &report)?);
        }
        None => {
            shift_part(&mut out, c, &built)?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct StripCounts {
    strips: Vec<WordCount>,
    square: WordCount,
    square_product_total: u64,
    square_hadamard_total: u64,
}

/// Strip counts both ways up to length 4 and the square count against the
/// product structure.
fn word_count_part(out: &mut Outcome, c: &Common, sys: &ShiftSystem) -> Result<()> {
    let b = word_budget(c);
    let mut strips = Vec::new();
    for r in 0..=4 {
        strips.push(count_words(sys, [r, 0], &b)?);
        if r > 0 {
            strips.push(count_words(sys, [0, r], &b)?);
        }
    }
    let agree = strips.iter().filter(|s| s.agrees()).count();
    out.gate(
        "strip counts: search = matrix power",
        true,
        agree == strips.len(),
        format!("{agree}/{} strips; |W(0,0)| = {}, |W(1,0)| = {}", strips.len(), strips[0].dfs, strips[1].dfs),
    );
    let square = count_words(sys, [1, 1], &b)?;
    let (p, q) = (sys.m1().product(sys.m2()), sys.m2().product(sys.m1()));
    let hadamard: u64 = q.iter().map(|(i, j, e)| u64::from(e) * u64::from(p.get(i, j))).sum();
    out.gate(
        "square count = sum of M2M1 * M1M2",
        true,
        square.dfs == hadamard,
        format!("{} words on [0,(1,1)]", square.dfs),
    );
    out.gate(
        "square count = sum of M1M2 entries",
        true,
        square.dfs == p.total(),
        format!("{} vs {}", square.dfs, p.total()),
    );
    out.artifacts.push(Artifact::json(
        "word-counts.json",
        &StripCounts { strips, square, square_product_total: p.total(), square_hadamard_total: hadamard },
    )?);
    Ok(())
}

pub fn words(c: &Common, shape: Shape, verify: Option<&Path>) -> Result<Outcome> {
    let (_, _, pres) = load_presentation(c)?;
    let sys = build_transition_matrices(&pres)?;
    let mut out = Outcome::default();
    out.notes.push(reading_note(&sys));
    if let Some(path) = verify {
        let json: WordsJson = serde_json::from_str(&read(path)?).context("parsing words JSON")?;
        let words = json.to_words()?;
        let valid = words.iter().filter(|w| w.is_valid(&sys)).count();
        out.gate("words satisfy M1, M2", true, valid == words.len(), format!("{valid}/{} valid", words.len()));
        return Ok(out);
    }
    let b = word_budget(c);
    let mut words = Vec::new();
    for w in enumerate_words(&sys, shape, Some(c.limit + 1), b) {
        words.push(w?);
    }
    let truncated = words.len() > c.limit;
    words.truncate(c.limit);
    let valid = words.iter().filter(|w| w.is_valid(&sys)).count();
    out.gate("emitted words satisfy M1, M2", true, valid == words.len(), format!("{} words", words.len()));
    out.artifacts.push(Artifact::json("words.json", &WordsJson::new(shape, "alphabet.json", &words, truncated))?);
    out.artifacts.push(Artifact::json("alphabet.json", &AlphabetJson::of(&sys))?);
    if (shape[0] + 1) * (shape[1] + 1) <= b.max_cells {
        let count = count_words(&sys, shape, &b)?;
        out.gate(
            "word count",
            true,
            count.agrees(),
            match count.matrix_power {
                Some(m) => format!("{} by search, {m} by matrix power", count.dfs),
                None => format!("{} by search", count.dfs),
            },
        );
        out.artifacts.push(Artifact::json("word-count.json", &count)?);
    } else {
        out.notes.push(format!("count skipped: more than {} cells", b.max_cells));
    }
    Ok(out)
}

#[derive(Serialize)]
struct Certificate<'a> {
    q: usize,
    reading: Option<Reading>,
    passed: bool,
    gates: &'a [Gate],
}

pub fn pipeline(c: &Common) -> Result<Outcome> {
    let plane = load_plane(c)?;
    let mut out = Outcome::default();
    plane_part(&mut out, &plane)?;
    let (t, search) = load_bijection(c, &plane)?;
    bijection_gates(&mut out, &plane, t.as_slice(), search)?;
    let pres = presentation_part(&mut out, &plane, &t)?;
    polyhedron_part(&mut out, &plane, &t, &pres)?;
    let sys = build_transition_matrices(&pres)?;
    shift_part(&mut out, c, &sys)?;
    word_count_part(&mut out, c, &sys)?;
    let cert = Certificate { q: plane.order(), reading: sys.reading(), passed: out.passed(), gates: &out.gates };
    let artifact = Artifact::json("certificate.json", &cert)?;
    out.artifacts.insert(0, artifact);
    Ok(out)
}
