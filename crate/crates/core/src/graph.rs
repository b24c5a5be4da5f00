//! Undirected weighted graphs, shortest-path trees and tree distances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(usize, usize),
    #[error("graphs have different vertex counts ({0} vs {1})")]
    VertexCountMismatch(usize, usize),
}

/// An edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: u64,
}

impl Edge {
    pub fn new(a: usize, b: usize, w: u64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge { u, v, w }
    }
}

/// Index of the unordered pair `{u, v}` (u ≠ v) in `0..n(n-1)/2`.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(v < n && u != v);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(n: usize, idx: usize) -> (usize, usize) {
    let mut u = 0;
    let mut start = 0;
    loop {
        let row = n - u - 1;
        if idx < start + row {
            return (u, u + 1 + idx - start);
        }
        start += row;
        u += 1;
    }
}

/// Number of unordered vertex pairs.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Simple undirected graph on `0..n` with non-negative integer weights.
/// Edges are kept sorted by endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        let mut edges: Vec<Edge> = edges.into_iter().map(|e| Edge::new(e.u, e.v, e.w)).collect();
        for e in &edges {
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if e.v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: e.v, n });
            }
        }
        edges.sort_unstable();
        for pair in edges.windows(2) {
            if (pair[0].u, pair[0].v) == (pair[1].u, pair[1].v) {
                return Err(GraphError::DuplicateEdge(pair[0].u, pair[0].v));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weight of the edge `{u, v}` if present.
    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&(u, v)))
            .ok()
            .map(|i| self.edges[i].w)
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_edges(self.n, &self.edges)
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// Union of graphs on the same vertex set; a pair present in several inputs
/// keeps its minimum weight.
pub fn union(graphs: &[&Graph]) -> Result<Graph, GraphError> {
    let Some(first) = graphs.first() else {
        return Ok(Graph::empty(0));
    };
    let n = first.n;
    let mut best: HashMap<(usize, usize), u64> = HashMap::new();
    for g in graphs {
        if g.n != n {
            return Err(GraphError::VertexCountMismatch(n, g.n));
        }
        for e in &g.edges {
            best.entry((e.u, e.v)).and_modify(|w| *w = (*w).min(e.w)).or_insert(e.w);
        }
    }
    Graph::new(n, best.into_iter().map(|((u, v), w)| Edge { u, v, w }))
}

/// Compressed adjacency lists. Parallel edges are allowed and harmless for
/// shortest paths.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<(usize, u64)>,
}

impl Adjacency {
    pub fn from_edges<'a>(n: usize, edges: impl IntoIterator<Item = &'a Edge> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for e in edges.clone() {
            offsets[e.u + 1] += 1;
            offsets[e.v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![(0usize, 0u64); offsets[n]];
        for e in edges {
            targets[fill[e.u]] = (e.v, e.w);
            fill[e.u] += 1;
            targets[fill[e.v]] = (e.u, e.w);
            fill[e.v] += 1;
        }
        Adjacency { offsets, targets }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Total number of stored directed arcs (twice the edge count).
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }
}

/// A shortest-path distance; [`Distance::INFINITY`] marks unreachable vertices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distance(u64);

impl Distance {
    pub const INFINITY: Distance = Distance(u64::MAX);
    pub const ZERO: Distance = Distance(0);

    pub fn finite(d: u64) -> Self {
        assert!(d != u64::MAX, "finite distance must be below the infinity sentinel");
        Distance(d)
    }

    pub fn is_finite(self) -> bool {
        self.0 != u64::MAX
    }

    pub fn get(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }
}

impl fmt::Debug for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("INF"),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

const NO_PARENT: usize = usize::MAX;
const INF: u64 = u64::MAX;

/// Shortest-path tree (forest over unreachable vertices) rooted at `root`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShortestPathTree {
    root: usize,
    parent: Vec<usize>,
    dist: Vec<u64>,
}

impl ShortestPathTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != NO_PARENT).then_some(p)
    }

    /// Distance from the root to `v` along tree edges.
    pub fn dist(&self, v: usize) -> Distance {
        Distance(self.dist[v])
    }

    pub(crate) fn raw_dists(&self) -> &[u64] {
        &self.dist
    }

    /// Tree edges `(parent(v), v)` with weights recovered from the distances.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n()).filter_map(move |v| {
            self.parent(v).map(|p| Edge::new(p, v, self.dist[v] - self.dist[p]))
        })
    }

    pub fn to_graph(&self) -> Graph {
        Graph::new(self.n(), self.edges()).expect("tree edges form a simple graph")
    }
}

/// True iff the tree stretches `(u, v, w)`: `|d_T(u) - d_T(v)| > w`, where one
/// unreachable endpoint counts as a violation and two unreachable endpoints do not.
#[inline]
pub fn violates(t: &ShortestPathTree, u: usize, v: usize, w: u64) -> bool {
    violates_raw(t.dist[u], t.dist[v], w)
}

#[inline]
pub(crate) fn violates_raw(du: u64, dv: u64, w: u64) -> bool {
    match (du == INF, dv == INF) {
        (true, true) => false,
        (true, false) | (false, true) => true,
        (false, false) => du.abs_diff(dv) > w,
    }
}

/// Distances from `s`, with `u64::MAX` for unreachable vertices.
pub fn dijkstra(adj: &Adjacency, s: usize) -> Vec<u64> {
    dijkstra_order(adj, s).0
}

fn dijkstra_order(adj: &Adjacency, s: usize) -> (Vec<u64>, Vec<usize>) {
    let n = adj.n();
    let mut dist = vec![INF; n];
    let mut settled = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0;
    heap.push(Reverse((0u64, s)));
    let mut next = 0;
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v] != usize::MAX || d > dist[v] {
            continue;
        }
        settled[v] = next;
        next += 1;
        for &(x, w) in adj.neighbors(v) {
            let nd = d + w;
            if nd < dist[x] {
                dist[x] = nd;
                heap.push(Reverse((nd, x)));
            }
        }
    }
    (dist, settled)
}

/// Dijkstra shortest-path tree from `s`. Among tight predecessors settled
/// before `v`, the parent is the one with the smallest vertex id.
pub fn shortest_path_tree(adj: &Adjacency, s: usize) -> ShortestPathTree {
    let (dist, settled) = dijkstra_order(adj, s);
    let n = adj.n();
    let mut parent = vec![NO_PARENT; n];
    for v in 0..n {
        if v == s || dist[v] == INF {
            continue;
        }
        let mut best = NO_PARENT;
        for &(p, w) in adj.neighbors(v) {
            if dist[p] != INF && dist[p] + w == dist[v] && settled[p] < settled[v] && p < best {
                best = p;
            }
        }
        debug_assert!(best != NO_PARENT);
        parent[v] = best;
    }
    ShortestPathTree { root: s, parent, dist }
}

/// Shortest-path tree of `g` from `s`.
pub fn spt(g: &Graph, s: usize) -> ShortestPathTree {
    shortest_path_tree(&g.adjacency(), s)
}

/// Tree distance between `u` and `v` in a forest given by parent pointers,
/// measured along tree edges. Infinite if they lie in different components.
pub fn tree_distance(t: &ShortestPathTree, u: usize, v: usize) -> Distance {
    let (du, dv) = (t.dist[u], t.dist[v]);
    if du == INF || dv == INF {
        return if u == v { Distance::ZERO } else { Distance::INFINITY };
    }
    // Walk both endpoints up to their lowest common ancestor.
    let depth = |mut x: usize| {
        let mut d = 0;
        while t.parent[x] != NO_PARENT {
            x = t.parent[x];
            d += 1;
        }
        d
    };
    let (mut a, mut b) = (u, v);
    let (mut da, mut db) = (depth(a), depth(b));
    while da > db {
        a = t.parent[a];
        da -= 1;
    }
    while db > da {
        b = t.parent[b];
        db -= 1;
    }
    while a != b {
        a = t.parent[a];
        b = t.parent[b];
    }
    Distance(du + dv - 2 * t.dist[a])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize, u64)]) -> Graph {
        Graph::new(n, edges.iter().map(|&(u, v, w)| Edge::new(u, v, w))).unwrap()
    }

    #[test]
    fn pair_index_round_trips() {
        for n in 2..12 {
            let mut seen = vec![false; pair_count(n)];
            for u in 0..n {
                for v in u + 1..n {
                    let i = pair_index(n, u, v);
                    assert_eq!(i, pair_index(n, v, u));
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(pair_from_index(n, i), (u, v));
                }
            }
        }
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert_eq!(Graph::new(3, [Edge::new(1, 1, 2)]), Err(GraphError::SelfLoop(1)));
        assert!(matches!(Graph::new(3, [Edge::new(1, 3, 2)]), Err(GraphError::VertexOutOfRange { .. })));
        assert_eq!(
            Graph::new(3, [Edge::new(0, 1, 2), Edge::new(1, 0, 5)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn spt_prefers_the_short_path() {
        // s=0, a=1, b=2: s-a (2), a-b (3), s-b (10).
        let t = spt(&g(3, &[(0, 1, 2), (1, 2, 3), (0, 2, 10)]), 0);
        assert_eq!(t.dist(2), Distance::finite(5));
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(t.parent(0), None);
    }

    #[test]
    fn spt_single_vertex_and_unreachable() {
        let t = spt(&Graph::empty(1), 0);
        assert_eq!(t.dist(0), Distance::ZERO);
        let t = spt(&g(4, &[(0, 1, 1), (2, 3, 1)]), 0);
        assert_eq!(t.dist(2), Distance::INFINITY);
        assert_eq!(t.parent(3), None);
        assert_eq!(tree_distance(&t, 2, 3), Distance::INFINITY);
        assert_eq!(tree_distance(&t, 2, 2), Distance::ZERO);
    }

    #[test]
    fn spt_tie_break_uses_smallest_id() {
        // Two shortest paths to 3: via 1 and via 2.
        let t = spt(&g(4, &[(0, 2, 1), (0, 1, 1), (2, 3, 1), (1, 3, 1)]), 0);
        assert_eq!(t.parent(3), Some(1));
    }

    #[test]
    fn spt_zero_weight_edges_stay_acyclic() {
        let gr = g(4, &[(0, 3, 0), (3, 2, 0), (2, 1, 0), (1, 3, 0)]);
        let t = spt(&gr, 0);
        for v in 0..4 {
            assert_eq!(t.dist(v), Distance::ZERO);
            // Following parents terminates at the root.
            let mut x = v;
            for _ in 0..4 {
                if let Some(p) = t.parent(x) {
                    x = p;
                }
            }
            assert_eq!(x, 0);
        }
    }

    #[test]
    fn union_keeps_minimum_weight() {
        let a = g(3, &[(0, 1, 5), (1, 2, 1)]);
        let b = g(3, &[(0, 1, 3)]);
        let u = union(&[&a, &b]).unwrap();
        assert_eq!(u.weight(0, 1), Some(3));
        assert_eq!(u.m(), 2);
        assert!(union(&[&a, &Graph::empty(4)]).is_err());
    }

    #[test]
    fn violation_rules() {
        // dist(u)=3, dist(v)=7.
        let t = spt(&g(3, &[(0, 1, 3), (0, 2, 7)]), 0);
        assert!(violates(&t, 1, 2, 2));
        assert!(!violates(&t, 1, 2, 4));
        let f = spt(&g(4, &[(0, 1, 3)]), 0);
        assert!(violates(&f, 1, 2, 100));
        assert!(!violates(&f, 2, 3, 0));
    }

    #[test]
    fn tree_distance_through_lca() {
        let gr = g(5, &[(0, 1, 2), (1, 2, 3), (1, 3, 4), (0, 4, 1)]);
        let t = spt(&gr, 0);
        assert_eq!(tree_distance(&t, 2, 3), Distance::finite(7));
        assert_eq!(tree_distance(&t, 2, 4), Distance::finite(6));
        assert_eq!(tree_distance(&t, 0, 3), Distance::finite(6));
    }

    #[test]
    fn tree_round_trips_to_graph() {
        let gr = g(4, &[(0, 1, 2), (1, 2, 3), (0, 2, 9), (2, 3, 1)]);
        let t = spt(&gr, 0);
        let tg = t.to_graph();
        assert_eq!(tg.m(), 3);
        assert_eq!(spt(&tg, 0), t);
    }
}
