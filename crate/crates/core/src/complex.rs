//! The triangle complex of a tagged presentation: three vertices, one
//! directed edge per letter, one face per cyclic class of tuples.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bijection::BasicBijection;
use crate::geometry::{graphs_isomorphic, BipartiteGraph, GeometryError, Isomorphism, ProjectivePlane};
use crate::presentation::{rotate, verify_polygonal_axioms, AxiomReport, Letter, LineLetter, Presentation, Tag, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("presentation fails the polygonal axioms")]
    InvalidPresentation(Box<AxiomReport>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("the plane or bijection does not belong to this complex")]
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: Letter,
    pub tail: Tag,
    pub head: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    order: usize,
    points: usize,
    edges: Vec<Edge>,
    /// Canonical representatives, each the least rotation, which starts with
    /// the tag 1 letter.
    faces: Vec<Tuple>,
}

pub fn build_polyhedron(pres: &Presentation) -> Result<Polyhedron, ComplexError> {
    let report = verify_polygonal_axioms(pres);
    if !report.passed() {
        return Err(ComplexError::InvalidPresentation(Box::new(report)));
    }
    let edges = pres.letters().map(|l| Edge { label: l, tail: l.tag, head: l.tag.next() }).collect();
    let mut faces: Vec<Tuple> = pres
        .tuples()
        .iter()
        .map(|t| {
            let r1 = rotate(t);
            let r2 = rotate(&r1);
            *[*t, r1, r2].iter().min().unwrap_or(t)
        })
        .collect();
    faces.sort();
    faces.dedup();
    Ok(Polyhedron { order: pres.order(), points: pres.points_per_copy(), edges, faces })
}

impl Polyhedron {
    pub const VERTICES: usize = 3;

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Tuple] {
        &self.faces
    }

    pub fn euler_characteristic(&self) -> i64 {
        Self::VERTICES as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// The link at vertex `u`: one edge per face corner, joining the
    /// outgoing germ `a_u` to the incoming germ `λ(a_{u-1})`.
    pub fn link(&self, u: Tag) -> LinkGraph {
        let corners = self
            .faces
            .iter()
            .map(|f| {
                let out = f[u.slot()];
                let into = f[u.prev().slot()].lambda();
                (out.index, into.index)
            })
            .collect();
        LinkGraph { vertex: u, germs: self.points, corners }
    }

    pub fn links(&self) -> [LinkGraph; 3] {
        Tag::ALL.map(|u| self.link(u))
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson { vertices: Self::VERTICES, edges: self.edges.clone(), faces: self.faces.clone() }
    }
}

/// `{"vertices": 3, "edges": [{"label", "tail", "head"}], "faces": [[letters]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    pub faces: Vec<Tuple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Germ {
    Outgoing(Letter),
    Incoming(LineLetter),
}

/// Link at a vertex. Outgoing germs `x_i^u` and incoming germs `y_j^u` are
/// kept apart even when `i = j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkGraph {
    pub vertex: Tag,
    germs: usize,
    /// `(i, j)` for a corner between `x_i^u` and `y_j^u`.
    corners: Vec<(usize, usize)>,
}

impl LinkGraph {
    pub fn node_count(&self) -> usize {
        2 * self.germs
    }

    pub fn edge_count(&self) -> usize {
        self.corners.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Germ> + '_ {
        let u = self.vertex;
        (0..self.germs)
            .map(move |i| Germ::Outgoing(Letter::new(u, i)))
            .chain((0..self.germs).map(move |j| Germ::Incoming(LineLetter { tag: u, index: j })))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Germ, Germ)> + '_ {
        let u = self.vertex;
        self.corners
            .iter()
            .map(move |&(i, j)| (Germ::Outgoing(Letter::new(u, i)), Germ::Incoming(LineLetter { tag: u, index: j })))
    }

    /// Outgoing germs black, incoming germs white, both by letter index.
    pub fn to_bipartite(&self) -> BipartiteGraph {
        BipartiteGraph::from_edges(self.germs, self.germs, &self.corners)
    }

    pub fn to_dot(&self) -> String {
        let u = self.vertex;
        self.to_bipartite().to_dot(&format!("link{u}"), &format!("x{u}_"), &format!("y{u}_"))
    }

    /// The identification with the plane's incidence graph (`u = 1, 2`) or
    /// with the dual's (`u = 3`) that the tagging induces. Returned only if
    /// it really preserves edges.
    pub fn natural_isomorphism(
        &self,
        plane: &ProjectivePlane,
        t: &BasicBijection,
    ) -> Result<Option<Isomorphism>, ComplexError> {
        let n = self.germs;
        if plane.size() != n || t.check_plane(plane).is_err() {
            return Err(ComplexError::Mismatch);
        }
        // vertex ids: black 0..n, white n..2n
        let mapping: Vec<usize> = if self.vertex == Tag::ALL[2] {
            (0..n).map(|a| t.as_slice()[a].0).chain((0..n).map(|b| n + b)).collect()
        } else {
            (0..n).chain((0..n).map(|b| n + t.as_slice()[b].0)).collect()
        };
        let target = self.natural_target(plane);
        let iso = Isomorphism { mapping, swaps_classes: false };
        Ok(iso.verify(&self.to_bipartite(), &target).then_some(iso))
    }

    /// Isomorphism search against the natural target graph.
    pub fn search_isomorphism(&self, plane: &ProjectivePlane) -> Result<Option<Isomorphism>, ComplexError> {
        Ok(graphs_isomorphic(&self.to_bipartite(), &self.natural_target(plane))?)
    }

    fn natural_target(&self, plane: &ProjectivePlane) -> BipartiteGraph {
        if self.vertex == Tag::ALL[2] {
            plane.dual().incidence_graph()
        } else {
            plane.incidence_graph()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    /// `3 + (q - 2)(q^2 + q + 1)`.
    pub expected_euler_characteristic: i64,
    /// `s_i`, nodes of each link.
    pub link_nodes: [usize; 3],
    /// `t_i`, edges of each link.
    pub link_edges: [usize; 3],
    /// `Σ s_i / 2`.
    pub derived_edges: usize,
    /// `Σ t_i / 3`.
    pub derived_faces: usize,
    pub derived_agree: bool,
    /// `k Σ s_i` from the printed count formula.
    pub printed_edges: usize,
    /// `Σ t_i` from the printed count formula.
    pub printed_faces: usize,
    pub printed_agree: bool,
}

impl CountReport {
    /// Direct counts against the construction. The printed formulas are
    /// advisory and do not take part.
    pub fn passed(&self) -> bool {
        self.derived_agree && self.euler_characteristic == self.expected_euler_characteristic
    }
}

pub fn verify_counts(poly: &Polyhedron, pres: &Presentation) -> CountReport {
    let links = poly.links();
    let link_nodes = links.each_ref().map(LinkGraph::node_count);
    let link_edges = links.each_ref().map(LinkGraph::edge_count);
    let (sum_s, sum_t) = (link_nodes.iter().sum::<usize>(), link_edges.iter().sum::<usize>());
    let (e, f) = (poly.edges.len(), poly.faces.len());
    let derived_edges = sum_s / 2;
    let derived_faces = sum_t / 3;
    let q = pres.order() as i64;
    let printed_edges = 3 * sum_s;
    let printed_faces = sum_t;
    CountReport {
        vertices: Polyhedron::VERTICES,
        edges: e,
        faces: f,
        euler_characteristic: poly.euler_characteristic(),
        expected_euler_characteristic: 3 + (q - 2) * (q * q + q + 1),
        link_nodes,
        link_edges,
        derived_edges,
        derived_faces,
        derived_agree: sum_s % 2 == 0 && sum_t % 3 == 0 && derived_edges == e && derived_faces == f,
        printed_edges,
        printed_faces,
        printed_agree: printed_edges == e && printed_faces == f,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::{search_basic_bijection, SearchConfig, SearchOutcome};
    use crate::geometry::{build_plane, certify_mgon};
    use crate::presentation::build_presentation;

    fn setup(q: u32) -> (ProjectivePlane, BasicBijection, Presentation, Polyhedron) {
        let plane = build_plane(q).unwrap();
        let SearchOutcome::Found(t) = search_basic_bijection(&plane, &SearchConfig::default()).unwrap().outcome else {
            panic!()
        };
        let pres = build_presentation(&plane, &t).unwrap();
        let poly = build_polyhedron(&pres).unwrap();
        (plane, t, pres, poly)
    }

    #[test]
    fn cell_counts() {
        for (q, e, f, chi) in [(2, 21, 21, 3), (3, 39, 52, 16)] {
            let (_, _, _, poly) = setup(q);
            assert_eq!((poly.edges().len(), poly.faces().len(), poly.euler_characteristic()), (e, f, chi));
        }
    }

    #[test]
    fn every_face_has_each_tag_once() {
        let (_, _, _, poly) = setup(2);
        for f in poly.faces() {
            assert_eq!(f.map(|l| l.tag), Tag::ALL);
        }
        for e in poly.edges() {
            assert_eq!(e.head, e.tail.next());
        }
    }

    #[test]
    fn links_are_generalized_triangles() {
        for q in [2, 3] {
            let (_, _, _, poly) = setup(q);
            for link in poly.links() {
                let g = link.to_bipartite();
                assert_eq!(link.node_count(), 2 * (q * q + q + 1) as usize);
                assert_eq!(g.regular_degree(), Some(q as usize + 1));
                assert!(certify_mgon(&g, 3).verdict.passed());
            }
        }
    }

    #[test]
    fn natural_isomorphisms_hold() {
        for q in [2, 3] {
            let (plane, t, _, poly) = setup(q);
            for link in poly.links() {
                assert!(link.natural_isomorphism(&plane, &t).unwrap().is_some(), "q={q} u={}", link.vertex);
                let found = link.search_isomorphism(&plane).unwrap().unwrap();
                assert!(found.verify(&link.to_bipartite(), &link.natural_target(&plane)));
            }
        }
    }

    #[test]
    fn counts_and_printed_formula_discrepancy() {
        let (_, _, pres, poly) = setup(2);
        let r = verify_counts(&poly, &pres);
        assert!(r.passed());
        assert_eq!(r.link_nodes, [14; 3]);
        assert_eq!(r.link_edges, [21; 3]);
        assert_eq!((r.derived_edges, r.derived_faces), (21, 21));
        assert_eq!(r.printed_edges, 126);
        assert!(!r.printed_agree);
    }

    #[test]
    fn broken_presentation_is_rejected() {
        let (_, _, pres, _) = setup(2);
        let mut tuples = pres.tuples().to_vec();
        tuples.pop();
        assert!(matches!(build_polyhedron(&pres.with_tuples(tuples)), Err(ComplexError::InvalidPresentation(_))));
    }

    #[test]
    fn json_shape() {
        let (_, _, _, poly) = setup(2);
        let text = serde_json::to_string(&poly.to_json()).unwrap();
        assert!(text.starts_with("{\"vertices\":3,\"edges\":[{\"label\":{\"t\":1,\"i\":0},\"tail\":1,\"head\":2}"));
    }
}
