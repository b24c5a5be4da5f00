//! Seeded random graph and stream families.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{pair_count, pair_from_index, Edge, Graph};
use crate::stream::{EdgeStream, EdgeUpdate, StreamMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph with `m` edges (at least `n - 1`, at most all pairs) and
/// weights uniform in `1..=max_weight`: a random recursive tree plus uniformly
/// chosen extra pairs.
pub fn random_connected_graph(n: usize, m: usize, max_weight: u64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let m = m.clamp(n.saturating_sub(1), pair_count(n));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut pairs = HashSet::with_capacity(m);
    for i in 1..n {
        let j = r.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    add_random_pairs(n, m, &mut pairs, &mut r);
    weigh(n, pairs, max_weight, &mut r)
}

/// Uniform graph with exactly `m` distinct edges (capped at all pairs).
pub fn random_graph(n: usize, m: usize, max_weight: u64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let m = m.min(pair_count(n));
    let mut pairs = HashSet::with_capacity(m);
    add_random_pairs(n, m, &mut pairs, &mut r);
    weigh(n, pairs, max_weight, &mut r)
}

fn add_random_pairs(n: usize, m: usize, pairs: &mut HashSet<(usize, usize)>, r: &mut ChaCha8Rng) {
    let total = pair_count(n);
    if m * 2 > total {
        // Dense: shuffle the missing pairs and take a prefix.
        let mut rest: Vec<usize> = (0..total)
            .filter(|&i| !pairs.contains(&pair_from_index(n, i)))
            .collect();
        rest.shuffle(r);
        for i in rest.into_iter().take(m - pairs.len()) {
            pairs.insert(pair_from_index(n, i));
        }
        return;
    }
    while pairs.len() < m {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
}

fn weigh(n: usize, pairs: HashSet<(usize, usize)>, max_weight: u64, r: &mut ChaCha8Rng) -> Graph {
    let mut pairs: Vec<_> = pairs.into_iter().collect();
    pairs.sort_unstable();
    let edges = pairs.into_iter().map(|(u, v)| Edge::new(u, v, r.gen_range(1..=max_weight)));
    Graph::new(n, edges).expect("generated pairs are distinct")
}

/// Insertion-only stream listing the edges of `g` in a seeded random order.
pub fn shuffled_stream(g: &Graph, seed: u64) -> EdgeStream {
    let mut ups: Vec<EdgeUpdate> = g.edges().iter().map(|e| EdgeUpdate::insert(e.u, e.v, e.w)).collect();
    ups.shuffle(&mut rng(seed));
    EdgeStream::from_updates(g.n(), StreamMode::InsertOnly, ups).expect("graph edges are valid")
}

/// Insertion-only stream listing the edges of `g` in its sorted order.
pub fn sorted_stream(g: &Graph) -> EdgeStream {
    let ups = g.edges().iter().map(|e| EdgeUpdate::insert(e.u, e.v, e.w)).collect();
    EdgeStream::from_updates(g.n(), StreamMode::InsertOnly, ups).expect("graph edges are valid")
}

/// Dynamic stream whose final graph is `keep`: every edge of `keep` is inserted,
/// and extra edges (pairs absent from `keep`) are inserted and later deleted so
/// that deletions make up `deletion_fraction` of the inserted edges. Each
/// deletion follows its insertion; otherwise the order is random.
pub fn dynamic_stream(keep: &Graph, deletion_fraction: f64, max_weight: u64, seed: u64) -> EdgeStream {
    let n = keep.n();
    let mut r = rng(seed);
    let present: HashSet<(usize, usize)> = keep.edges().iter().map(|e| (e.u, e.v)).collect();
    let free = pair_count(n) - present.len();
    let extra = ((keep.m() as f64 * deletion_fraction / (1.0 - deletion_fraction)).round() as usize).min(free);
    let mut doomed = HashSet::new();
    while doomed.len() < extra {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        let p = (a.min(b), a.max(b));
        if a != b && !present.contains(&p) {
            doomed.insert(p);
        }
    }
    let mut doomed: Vec<_> = doomed.into_iter().collect();
    doomed.sort_unstable();
    let mut ups: Vec<EdgeUpdate> = keep.edges().iter().map(|e| EdgeUpdate::insert(e.u, e.v, e.w)).collect();
    let mut deletions = Vec::new();
    for (u, v) in doomed {
        let w = r.gen_range(1..=max_weight);
        ups.push(EdgeUpdate::insert(u, v, w));
        deletions.push(EdgeUpdate::delete(u, v, w));
    }
    ups.shuffle(&mut r);
    // Put each deletion at a random position after its insertion.
    for d in deletions {
        let at = ups.iter().position(|e| e.u == d.u && e.v == d.v).expect("inserted");
        let pos = r.gen_range(at + 1..=ups.len());
        ups.insert(pos, d);
    }
    EdgeStream::from_updates(n, StreamMode::Dynamic, ups).expect("generated updates are valid")
}
