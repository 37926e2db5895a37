use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, GeometryError};

/// Largest graph accepted by [`graphs_isomorphic`].
pub const MAX_ISO_VERTICES: usize = 200;

/// An edge-preserving vertex bijection `mapping[v1] = v2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isomorphism {
    pub mapping: Vec<usize>,
    /// Black vertices of the first graph land on white vertices of the second.
    pub swaps_classes: bool,
}

impl Isomorphism {
    /// Checks bijectivity and that edges map onto edges exactly.
    pub fn verify(&self, g1: &BipartiteGraph, g2: &BipartiteGraph) -> bool {
        let n = g1.vertex_count();
        if n != g2.vertex_count() || self.mapping.len() != n || g1.edge_count() != g2.edge_count() {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in &self.mapping {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        (0..n).all(|u| g1.neighbors(u).iter().all(|&v| g2.has_edge(self.mapping[u], self.mapping[v])))
    }
}

/// Decides isomorphism by colour refinement followed by backtracking over a
/// BFS order of the first graph. Colour classes may be exchanged.
pub fn graphs_isomorphic(g1: &BipartiteGraph, g2: &BipartiteGraph) -> Result<Option<Isomorphism>, GeometryError> {
    for g in [g1, g2] {
        if g.vertex_count() > MAX_ISO_VERTICES {
            return Err(GeometryError::TooLarge { vertices: g.vertex_count(), limit: MAX_ISO_VERTICES });
        }
    }
    let n = g1.vertex_count();
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let (c1, c2) = refine(g1, g2);
    let histogram = |c: &[usize]| {
        let mut h = c.to_vec();
        h.sort_unstable();
        h
    };
    if histogram(&c1) != histogram(&c2) {
        return Ok(None);
    }

    let order = search_order(g1, &c1);
    let mut search =
        Search { g1, g2, c1: &c1, c2: &c2, order: &order, mapping: vec![usize::MAX; n], used: vec![false; n] };
    if !search.extend(0) {
        return Ok(None);
    }
    let mapping = search.mapping;
    let swaps_classes = n > 0 && g1.is_black(0) != g2.is_black(mapping[0]);
    Ok(Some(Isomorphism { mapping, swaps_classes }))
}

/// Joint colour refinement of both graphs, starting from degrees.
fn refine(g1: &BipartiteGraph, g2: &BipartiteGraph) -> (Vec<usize>, Vec<usize>) {
    let mut c1: Vec<usize> = (0..g1.vertex_count()).map(|v| g1.degree(v)).collect();
    let mut c2: Vec<usize> = (0..g2.vertex_count()).map(|v| g2.degree(v)).collect();
    let mut classes = 0;
    loop {
        let signature = |g: &BipartiteGraph, c: &[usize], v: usize| {
            let mut around: Vec<usize> = g.neighbors(v).iter().map(|&w| c[w]).collect();
            around.sort_unstable();
            (c[v], around)
        };
        let s1: Vec<_> = (0..c1.len()).map(|v| signature(g1, &c1, v)).collect();
        let s2: Vec<_> = (0..c2.len()).map(|v| signature(g2, &c2, v)).collect();
        let mut ids = BTreeMap::new();
        for s in s1.iter().chain(&s2) {
            let next = ids.len();
            ids.entry(s.clone()).or_insert(next);
        }
        c1 = s1.iter().map(|s| ids[s]).collect();
        c2 = s2.iter().map(|s| ids[s]).collect();
        if ids.len() == classes {
            return (c1, c2);
        }
        classes = ids.len();
    }
}

/// BFS order starting from the rarest colour so later vertices have mapped neighbours.
fn search_order(g: &BipartiteGraph, colors: &[usize]) -> Vec<usize> {
    let n = g.vertex_count();
    let mut freq = BTreeMap::new();
    for &c in colors {
        *freq.entry(c).or_insert(0usize) += 1;
    }
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (freq[&colors[v]], v));
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

struct Search<'a> {
    g1: &'a BipartiteGraph,
    g2: &'a BipartiteGraph,
    c1: &'a [usize],
    c2: &'a [usize],
    order: &'a [usize],
    mapping: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, pos: usize) -> bool {
        let Some(&v) = self.order.get(pos) else {
            return true;
        };
        let anchor = self.g1.neighbors(v).iter().copied().find(|&w| self.mapping[w] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(w) => self.g2.neighbors(self.mapping[w]).to_vec(),
            None => (0..self.g2.vertex_count()).collect(),
        };
        for c in candidates {
            if self.used[c] || self.c2[c] != self.c1[v] || !self.consistent(pos, v, c) {
                continue;
            }
            self.mapping[v] = c;
            self.used[c] = true;
            if self.extend(pos + 1) {
                return true;
            }
            self.mapping[v] = usize::MAX;
            self.used[c] = false;
        }
        false
    }

    fn consistent(&self, pos: usize, v: usize, c: usize) -> bool {
        self.order[..pos].iter().all(|&u| self.g1.has_edge(v, u) == self.g2.has_edge(c, self.mapping[u]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::geometry::ProjectivePlane;

    fn pg(q: u32) -> ProjectivePlane {
        ProjectivePlane::desarguesian(&Field::new(q).unwrap())
    }

    #[test]
    fn plane_and_dual_graphs_are_isomorphic() {
        for q in [2, 3] {
            let plane = pg(q);
            let (g, gd) = (plane.incidence_graph(), plane.dual().incidence_graph());
            let iso = graphs_isomorphic(&g, &gd).unwrap().expect("isomorphic");
            assert!(iso.verify(&g, &gd));
        }
    }

    #[test]
    fn different_orders_are_not_isomorphic() {
        assert_eq!(graphs_isomorphic(&pg(2).incidence_graph(), &pg(3).incidence_graph()).unwrap(), None);
    }

    #[test]
    fn relabelled_copy_is_isomorphic() {
        let g = pg(3).incidence_graph();
        let n = g.black_count();
        // deterministic pseudo-random permutations of both classes
        let perm = |k: usize| (0..n).map(|i| (i * k + 5) % n).collect::<Vec<_>>();
        let (pb, pw) = (perm(7), perm(11));
        let edges: Vec<_> = g.edges().into_iter().map(|(b, w)| (pb[b], pw[w])).collect();
        let h = BipartiteGraph::from_edges(n, n, &edges);
        let iso = graphs_isomorphic(&g, &h).unwrap().unwrap();
        assert!(iso.verify(&g, &h));
    }

    #[test]
    fn cycle_vs_two_triangles_like_graphs() {
        // 12-cycle against two disjoint hexagons: same degrees, different structure
        let c12: Vec<_> = (0..6).flat_map(|i| [(i, i), ((i + 1) % 6, i)]).collect();
        let two: Vec<_> =
            (0..3).flat_map(|i| [(i, i), ((i + 1) % 3, i), (3 + i, 3 + i), (3 + (i + 1) % 3, 3 + i)]).collect();
        let a = BipartiteGraph::from_edges(6, 6, &c12);
        let b = BipartiteGraph::from_edges(6, 6, &two);
        assert_eq!(graphs_isomorphic(&a, &b).unwrap(), None);
    }

    #[test]
    fn size_guard() {
        let big = BipartiteGraph::from_edges(101, 100, &[(0, 0)]);
        assert!(matches!(graphs_isomorphic(&big, &big), Err(GeometryError::TooLarge { .. })));
    }

    #[test]
    fn swapped_classes_detected() {
        let g = pg(2).incidence_graph();
        let s = g.swapped();
        let iso = graphs_isomorphic(&g, &s).unwrap().unwrap();
        assert!(iso.verify(&g, &s));
    }
}
