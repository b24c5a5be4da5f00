//! Single-pass spanner with stretch at most `2k - 1 + eps`.
//!
//! Edges are grouped into geometric weight buckets with ratio `1 + eps/(2k)`.
//! Inside a bucket the classic unweighted greedy rule applies: an edge is kept
//! iff its endpoints are more than `2k - 1` hops apart among the kept edges of
//! the same bucket. Any rejected edge `(u, v, w)` then has a path of at most
//! `2k - 1` kept edges, each of weight below `w (1 + eps/(2k))`. Zero-weight
//! edges form their own bucket, handled with a spanning forest.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{dijkstra, Edge, Graph};
use crate::stream::{EdgeStream, SpaceLedger, StreamError, StreamMode};

#[derive(Debug, Error)]
pub enum SpannerError {
    #[error("stretch parameter k must be at least 1")]
    BadK,
    #[error("eps must lie in (0, 1), got {0}")]
    BadEps(f64),
    #[error("the spanner pass needs an insertion-only stream")]
    DynamicStream,
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// The spanner `H` together with the parameters it was built for.
#[derive(Clone, Debug)]
pub struct Spanner {
    pub graph: Graph,
    pub k: u32,
    pub eps: f64,
    /// Set when the spanner was built from a materialized copy of a dynamic
    /// stream rather than in a genuine pass.
    pub reference_only: bool,
}

impl Spanner {
    /// Guaranteed stretch `2k - 1 + eps`.
    pub fn stretch_bound(&self) -> f64 {
        (2 * self.k - 1) as f64 + self.eps
    }
}

/// Incremental greedy spanner; feed edges in stream order.
pub struct SpannerBuilder {
    n: usize,
    k: u32,
    eps: f64,
    log_base: f64,
    buckets: HashMap<i64, Vec<Vec<usize>>>,
    zero_forest: Vec<usize>,
    kept: Vec<Edge>,
    // BFS scratch shared by all buckets.
    mark: Vec<u32>,
    stamp: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl SpannerBuilder {
    pub fn new(n: usize, k: u32, eps: f64) -> Result<Self, SpannerError> {
        if k == 0 {
            return Err(SpannerError::BadK);
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(SpannerError::BadEps(eps));
        }
        let bucket_eps = eps / (2 * k) as f64;
        Ok(SpannerBuilder {
            n,
            k,
            eps,
            log_base: (1.0 + bucket_eps).ln(),
            buckets: HashMap::new(),
            zero_forest: (0..n).collect(),
            kept: Vec::new(),
            mark: vec![0; n],
            stamp: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        })
    }

    /// Offers an edge; returns whether it was kept.
    pub fn insert(&mut self, u: usize, v: usize, w: u64) -> bool {
        let keep = if w == 0 {
            let (ru, rv) = (find(&mut self.zero_forest, u), find(&mut self.zero_forest, v));
            if ru != rv {
                self.zero_forest[ru] = rv;
            }
            ru != rv
        } else {
            let b = ((w as f64).ln() / self.log_base).floor() as i64;
            let hops = 2 * self.k as usize - 1;
            let n = self.n;
            let adj = self.buckets.entry(b).or_insert_with(|| vec![Vec::new(); n]);
            let far = !within_hops(adj, u, v, hops, &mut self.mark, &mut self.stamp, &mut self.frontier, &mut self.next);
            if far {
                adj[u].push(v);
                adj[v].push(u);
            }
            far
        };
        if keep {
            self.kept.push(Edge::new(u, v, w));
        }
        keep
    }

    /// Number of edges kept so far.
    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn finish(self) -> Spanner {
        let graph = Graph::new(self.n, self.kept).expect("kept edges are distinct");
        Spanner { graph, k: self.k, eps: self.eps, reference_only: false }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn within_hops(
    adj: &[Vec<usize>],
    s: usize,
    t: usize,
    hops: usize,
    mark: &mut [u32],
    stamp: &mut u32,
    frontier: &mut Vec<usize>,
    next: &mut Vec<usize>,
) -> bool {
    if adj[s].is_empty() || adj[t].is_empty() {
        return false;
    }
    *stamp = stamp.wrapping_add(1);
    if *stamp == 0 {
        mark.iter_mut().for_each(|m| *m = 0);
        *stamp = 1;
    }
    frontier.clear();
    frontier.push(s);
    mark[s] = *stamp;
    for _ in 0..hops {
        next.clear();
        for &x in frontier.iter() {
            for &y in &adj[x] {
                if y == t {
                    return true;
                }
                if mark[y] != *stamp {
                    mark[y] = *stamp;
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        std::mem::swap(frontier, next);
    }
    false
}

/// Builds the spanner in a single pass over an insertion-only stream. Kept
/// edges are charged two words each (endpoint pair and weight), bucket
/// adjacency two words per kept edge, and the BFS scratch `n` words.
pub fn streaming_spanner(
    stream: &EdgeStream,
    k: u32,
    eps: f64,
    ledger: &mut SpaceLedger,
) -> Result<Spanner, SpannerError> {
    if stream.mode() != StreamMode::InsertOnly {
        return Err(SpannerError::DynamicStream);
    }
    let mut b = SpannerBuilder::new(stream.n(), k, eps)?;
    let scratch = stream.n() as u64;
    ledger.charge(scratch);
    for e in stream.begin_pass()? {
        if b.insert(e.u, e.v, e.w) {
            ledger.charge(4);
        }
    }
    let kept = b.len() as u64;
    let spanner = b.finish();
    // The bucket adjacency and scratch are dropped; the edge list stays.
    ledger.release(scratch + 2 * kept);
    Ok(spanner)
}

/// Builds the spanner from an edge sequence already in memory, in that order.
pub fn spanner_from_edges<'a>(
    n: usize,
    edges: impl IntoIterator<Item = &'a Edge>,
    k: u32,
    eps: f64,
) -> Result<Spanner, SpannerError> {
    let mut b = SpannerBuilder::new(n, k, eps)?;
    for e in edges {
        b.insert(e.u, e.v, e.w);
    }
    Ok(b.finish())
}

/// Checks `d_H(x, y) <= bound * d_G(x, y)` for every pair by all-pairs Dijkstra.
pub fn verify_stretch(g: &Graph, h: &Graph, bound: f64) -> bool {
    max_stretch(g, h).is_some_and(|s| s <= bound + 1e-12)
}

/// Largest ratio `d_H / d_G` over connected pairs with positive `d_G`, or `None`
/// if some pair connected in `G` is disconnected (or strictly farther at zero
/// distance) in `H`.
pub fn max_stretch(g: &Graph, h: &Graph) -> Option<f64> {
    let (ag, ah) = (g.adjacency(), h.adjacency());
    let mut worst = 1.0f64;
    for s in 0..g.n() {
        let dg = dijkstra(&ag, s);
        let dh = dijkstra(&ah, s);
        for t in 0..g.n() {
            if dg[t] == u64::MAX {
                continue;
            }
            if dh[t] == u64::MAX {
                return None;
            }
            if dg[t] == 0 {
                if dh[t] != 0 {
                    return None;
                }
                continue;
            }
            worst = worst.max(dh[t] as f64 / dg[t] as f64);
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::EdgeUpdate;

    fn stream(n: usize, edges: &[(usize, usize, u64)]) -> EdgeStream {
        let ups = edges.iter().map(|&(u, v, w)| EdgeUpdate::insert(u, v, w)).collect();
        EdgeStream::from_updates(n, StreamMode::InsertOnly, ups).unwrap()
    }

    #[test]
    fn k1_keeps_every_edge() {
        let s = stream(4, &[(0, 1, 3), (1, 2, 3), (0, 2, 3), (2, 3, 8), (0, 3, 1)]);
        let h = streaming_spanner(&s, 1, 0.5, &mut SpaceLedger::new()).unwrap();
        assert_eq!(h.graph.m(), 5);
    }

    #[test]
    fn triangle_with_k2_drops_one_edge() {
        let s = stream(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let mut ledger = SpaceLedger::new();
        let h = streaming_spanner(&s, 2, 0.5, &mut ledger).unwrap();
        assert_eq!(h.graph.m(), 2);
        assert_eq!(s.pass_count(), 1);
        assert_eq!(ledger.current_words(), 4);
        let g = Graph::new(3, s.updates_unmetered().iter().map(|e| Edge::new(e.u, e.v, e.w))).unwrap();
        assert!(verify_stretch(&g, &h.graph, h.stretch_bound()));
    }

    #[test]
    fn zero_weight_edges_form_a_forest() {
        let s = stream(4, &[(0, 1, 0), (1, 2, 0), (0, 2, 0), (2, 3, 5)]);
        let h = streaming_spanner(&s, 2, 0.5, &mut SpaceLedger::new()).unwrap();
        assert_eq!(h.graph.m(), 3);
        assert_eq!(h.graph.weight(0, 2), None);
    }

    #[test]
    fn different_buckets_do_not_interact() {
        // The heavy edge is alone in its bucket, so it is kept even though a
        // light path exists.
        let s = stream(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 100)]);
        let h = streaming_spanner(&s, 2, 0.5, &mut SpaceLedger::new()).unwrap();
        assert_eq!(h.graph.m(), 3);
    }

    #[test]
    fn stretch_check_on_triangle_minus_edge() {
        let g = Graph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1), Edge::new(0, 2, 1)]).unwrap();
        let h = Graph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1)]).unwrap();
        assert!(verify_stretch(&g, &h, 2.0));
        assert!(!verify_stretch(&g, &h, 1.5));
        assert!(verify_stretch(&g, &g, 1.0));
        assert!(!verify_stretch(&g, &Graph::empty(3), 10.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = stream(2, &[(0, 1, 1)]);
        assert!(streaming_spanner(&s, 0, 0.5, &mut SpaceLedger::new()).is_err());
        assert!(streaming_spanner(&s, 2, 1.0, &mut SpaceLedger::new()).is_err());
        let d = EdgeStream::from_updates(2, StreamMode::Dynamic, vec![]).unwrap();
        assert!(matches!(streaming_spanner(&d, 2, 0.5, &mut SpaceLedger::new()), Err(SpannerError::DynamicStream)));
    }
}
