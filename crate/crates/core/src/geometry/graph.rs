use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// A bipartite graph with black vertices `0..black` and white vertices
/// `black..black + white`. Edges only join the two classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    black: usize,
    white: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// `edges` are `(black index, white index)` pairs, both zero-based within their class.
    pub fn from_edges(black: usize, white: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); black + white];
        for &(b, w) in edges {
            assert!(b < black && w < white, "edge ({b}, {w}) out of range");
            adj[b].push(black + w);
            adj[black + w].push(b);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        BipartiteGraph { black, white, adj }
    }

    pub fn black_count(&self) -> usize {
        self.black
    }

    pub fn white_count(&self) -> usize {
        self.white
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj[..self.black].iter().map(Vec::len).sum()
    }

    pub fn is_black(&self, v: usize) -> bool {
        v < self.black
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(black index, white index)` pairs in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.black).flat_map(|b| self.adj[b].iter().map(move |&w| (b, w - self.black))).collect()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first()?.len();
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.bfs(0).iter().all(|d| d.is_some())
    }

    /// Graph with the two colour classes exchanged.
    pub fn swapped(&self) -> Self {
        let edges: Vec<(usize, usize)> = self.edges().into_iter().map(|(b, w)| (w, b)).collect();
        BipartiteGraph::from_edges(self.white, self.black, &edges)
    }

    pub fn bfs(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Graphviz rendering; black vertices are circles, white vertices boxes.
    pub fn to_dot(&self, name: &str, black_prefix: &str, white_prefix: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for b in 0..self.black {
            let _ = writeln!(out, "  {black_prefix}{b} [shape=circle];");
        }
        for w in 0..self.white {
            let _ = writeln!(out, "  {white_prefix}{w} [shape=box];");
        }
        for (b, w) in self.edges() {
            let _ = writeln!(out, "  {black_prefix}{b} -- {white_prefix}{w};");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Why a graph is not a generalized m-gon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MgonWitness {
    /// No path joins the two vertices.
    Disconnected { from: usize, to: usize },
    /// A shortest circuit whose length differs from 2m.
    Cycle { cycle: Vec<usize> },
    /// The graph has no circuit at all.
    Acyclic,
    /// A pair at maximal distance, when that distance differs from m.
    Pair { from: usize, to: usize, distance: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgonCertificate {
    pub m: usize,
    pub vertices: usize,
    pub edges: usize,
    pub connected: bool,
    pub diameter: Option<usize>,
    pub girth: Option<usize>,
    pub regular_degree: Option<usize>,
    pub verdict: Verdict,
    pub witness: Option<MgonWitness>,
}

/// Certifies that `g` is a generalized `m`-gon: connected, diameter `m` and
/// shortest circuit `2m`. Diameter and girth come from a BFS at every vertex.
pub fn certify_mgon(g: &BipartiteGraph, m: usize) -> MgonCertificate {
    let n = g.vertex_count();
    let mut diameter = 0;
    let mut diametral = (0, 0);
    let mut girth: Option<(usize, Vec<usize>)> = None;
    let mut disconnected = None;

    for root in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    let len = dist[u] + dist[v] + 1;
                    if girth.as_ref().is_none_or(|(best, _)| len < *best) {
                        girth = Some((len, closed_walk(&parent, u, v)));
                    }
                }
            }
        }
        for (v, &d) in dist.iter().enumerate() {
            if d == usize::MAX {
                disconnected.get_or_insert((root, v));
            } else if d > diameter {
                diameter = d;
                diametral = (root, v);
            }
        }
    }

    let connected = disconnected.is_none();
    let witness = if let Some((from, to)) = disconnected {
        Some(MgonWitness::Disconnected { from, to })
    } else {
        match &girth {
            None => Some(MgonWitness::Acyclic),
            Some((len, cycle)) if *len != 2 * m => Some(MgonWitness::Cycle { cycle: cycle.clone() }),
            _ if diameter != m => Some(MgonWitness::Pair { from: diametral.0, to: diametral.1, distance: diameter }),
            _ => None,
        }
    };

    MgonCertificate {
        m,
        vertices: n,
        edges: g.edge_count(),
        connected,
        diameter: connected.then_some(diameter),
        girth: girth.map(|(len, _)| len),
        regular_degree: g.regular_degree(),
        verdict: Verdict::from_bool(witness.is_none()),
        witness,
    }
}

/// Tree path root..u, the edge u-v, then v..root, without repeating the root.
fn closed_walk(parent: &[usize], u: usize, v: usize) -> Vec<usize> {
    let up = |mut x: usize| {
        let mut path = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            path.push(x);
        }
        path
    };
    let mut left = up(u);
    left.reverse();
    let mut right = up(v);
    right.pop();
    left.extend(right);
    left
}
