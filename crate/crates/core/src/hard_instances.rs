//! Layered pointer-chasing instances and rook-set utilities.
//!
//! A layered graph has `d` layers of `w` vertices and a perfect matching
//! (a permutation) between consecutive layers. Following the matchings from
//! index `j` of layer 0 reaches index `point(j)` of the last layer. All indices
//! here are 0-based.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::generators::rng;
use crate::graph::{Edge, Graph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("a layered graph needs at least {min} layers, got {got}")]
    TooFewLayers { min: usize, got: usize },
    #[error("matching {0} is not a permutation of 0..w")]
    NotPermutation(usize),
    #[error("layer widths differ")]
    WidthMismatch,
    #[error("depths differ")]
    DepthMismatch,
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("rook set needs {need} free diagonal slots, only {have} available")]
    NotEnoughDiagonal { need: usize, have: usize },
}

/// `d` layers of width `w`; `matchings[i][x]` is the index in layer `i + 1`
/// matched to index `x` of layer `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredGraph {
    w: usize,
    matchings: Vec<Vec<usize>>,
}

impl LayeredGraph {
    pub fn new(w: usize, matchings: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        if w == 0 {
            return Err(InstanceError::Param("width must be positive".into()));
        }
        for (i, m) in matchings.iter().enumerate() {
            let mut seen = vec![false; w];
            if m.len() != w || !m.iter().all(|&x| x < w && !std::mem::replace(&mut seen[x], true)) {
                return Err(InstanceError::NotPermutation(i));
            }
        }
        Ok(LayeredGraph { w, matchings })
    }

    /// Uniformly random matchings.
    pub fn random(d: usize, w: usize, r: &mut impl Rng) -> Result<Self, InstanceError> {
        if d < 1 {
            return Err(InstanceError::TooFewLayers { min: 1, got: d });
        }
        let matchings = (1..d).map(|_| random_permutation(w, r)).collect();
        Self::new(w, matchings)
    }

    pub fn depth(&self) -> usize {
        self.matchings.len() + 1
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn matchings(&self) -> &[Vec<usize>] {
        &self.matchings
    }

    /// Index in the last layer reached from index `j` of the first layer.
    pub fn point(&self, j: usize) -> usize {
        self.matchings.iter().fold(j, |x, m| m[x])
    }

    /// Edges of the graph on `d·w` vertices numbered `layer · w + index`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let w = self.w;
        self.matchings.iter().enumerate().flat_map(move |(i, m)| {
            m.iter().enumerate().map(move |(x, &y)| Edge::new(i * w + x, (i + 1) * w + y, 1))
        })
    }
}

pub fn random_permutation(w: usize, r: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..w).collect();
    p.shuffle(r);
    p
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

/// Product of two layered graphs of equal depth: width `w1·w2`, where pair
/// `(x, y)` is index `x·w2 + y` and moves by both matchings at once.
pub fn product(a: &LayeredGraph, b: &LayeredGraph) -> Result<LayeredGraph, InstanceError> {
    if a.depth() != b.depth() {
        return Err(InstanceError::DepthMismatch);
    }
    let w = a.w * b.w;
    let matchings = a
        .matchings
        .iter()
        .zip(&b.matchings)
        .map(|(ma, mb)| (0..w).map(|i| ma[i / b.w] * b.w + mb[i % b.w]).collect())
        .collect();
    LayeredGraph::new(w, matchings)
}

/// Join of two depth-`d` layered graphs: `g1` followed by an identity matching
/// and `g2` read backwards, giving depth `2d`. `point(join, i) == i` exactly
/// when `point(g1, i) == point(g2, i)`.
pub fn join(g1: &LayeredGraph, g2: &LayeredGraph) -> Result<LayeredGraph, InstanceError> {
    if g1.w != g2.w {
        return Err(InstanceError::WidthMismatch);
    }
    if g1.depth() != g2.depth() {
        return Err(InstanceError::DepthMismatch);
    }
    let mut matchings = g1.matchings.clone();
    matchings.push((0..g1.w).collect());
    matchings.extend(g2.matchings.iter().rev().map(|m| inverse(m)));
    LayeredGraph::new(g1.w, matchings)
}

/// One pointer-chasing instance: two layered graphs whose join's first
/// pointer returns to index 0 iff `b = 1` (always when sampled with `b = 1`,
/// with probability `1/w` when sampled with `b = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpcInstance {
    pub g1: LayeredGraph,
    pub g2: LayeredGraph,
}

impl PpcInstance {
    pub fn joined(&self) -> LayeredGraph {
        join(&self.g1, &self.g2).expect("instance graphs have equal shape")
    }

    /// Whether both graphs send index 0 to the same place.
    pub fn pointers_meet(&self) -> bool {
        self.g1.point(0) == self.g2.point(0)
    }
}

/// Samples from the null distribution (`b = 0`: all matchings uniform) or the
/// planted one (`b = 1`: the last matching of `g2` is uniform among those that
/// send `g2`'s pointer to `point(g1, 0)`).
pub fn sample_ppc(b: bool, d: usize, w: usize, r: &mut impl Rng) -> Result<PpcInstance, InstanceError> {
    if d < 2 {
        return Err(InstanceError::TooFewLayers { min: 2, got: d });
    }
    let g1 = LayeredGraph::random(d, w, r)?;
    let mut g2 = LayeredGraph::random(d, w, r)?;
    if b {
        let target = g1.point(0);
        let cur = g2.matchings[..d - 2].iter().fold(0, |x, m| m[x]);
        let last = &mut g2.matchings[d - 2];
        let at = last.iter().position(|&y| y == target).expect("permutation");
        last.swap(at, cur);
    }
    Ok(PpcInstance { g1, g2 })
}

/// `t` pointer-chasing instances; with `b = 1` one planted instance sits at
/// position `i_star`, all others are null.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrPpcInstance {
    pub instances: Vec<PpcInstance>,
    pub i_star: Option<usize>,
}

pub fn sample_or_ppc(b: bool, t: usize, d: usize, w: usize, seed: u64) -> Result<OrPpcInstance, InstanceError> {
    if t == 0 {
        return Err(InstanceError::Param("t must be positive".into()));
    }
    let mut r = rng(seed);
    let i_star = b.then(|| r.gen_range(0..t));
    let instances = (0..t)
        .map(|i| sample_ppc(Some(i) == i_star, d, w, &mut r))
        .collect::<Result<_, _>>()?;
    Ok(OrPpcInstance { instances, i_star })
}

/// Union of the joined graphs of all instances on `2d·w` vertices numbered
/// `layer · w + index`; coinciding edges appear once. Index 0 of the first
/// layer is vertex 0 and index 0 of the last layer is vertex `(2d-1)·w`.
pub fn collection_graph(inst: &OrPpcInstance) -> Result<Graph, InstanceError> {
    let first = inst.instances.first().ok_or(InstanceError::Param("empty collection".into()))?;
    let (d, w) = (first.g1.depth(), first.g1.width());
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for p in &inst.instances {
        if p.g1.depth() != d || p.g2.depth() != d {
            return Err(InstanceError::DepthMismatch);
        }
        if p.g1.width() != w || p.g2.width() != w {
            return Err(InstanceError::WidthMismatch);
        }
        for e in p.joined().edges() {
            if seen.insert((e.u, e.v)) {
                edges.push(e);
            }
        }
    }
    Ok(Graph::new(2 * d * w, edges).expect("layered edges are valid"))
}

/// Parameters `(t, d, w)` of the hard distribution for `n` vertices, a
/// `p`-pass bound and approximation `α`:
/// `t = ⌊n^{1/(4α(p+2))}⌋`, `d = p + 2`, `w = ⌊n / (2(p+2))⌋`.
pub fn lemma_params(n: usize, p: usize, alpha: f64) -> Result<(usize, usize, usize), InstanceError> {
    if !(alpha >= 1.0) {
        return Err(InstanceError::Param(format!("alpha must be at least 1, got {alpha}")));
    }
    let log_n = (n as f64).log2();
    if p as f64 > log_n / (4.0 * alpha) - 2.0 + 1e-9 {
        return Err(InstanceError::Param(format!(
            "p={p} exceeds log2(n)/(4 alpha) - 2 = {:.3}",
            log_n / (4.0 * alpha) - 2.0
        )));
    }
    let d = p + 2;
    let t = ((n as f64).powf(1.0 / (4.0 * alpha * d as f64)) + 1e-9).floor() as usize;
    let w = n / (2 * d);
    Ok((t, d, w))
}

/// Breadth-first hop distance from `s` to `t`, if connected.
pub fn hop_distance(g: &Graph, s: usize, t: usize) -> Option<usize> {
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; g.n()];
    let mut q = VecDeque::from([s]);
    dist[s] = 0;
    while let Some(x) = q.pop_front() {
        if x == t {
            return Some(dist[x]);
        }
        for &(y, _) in adj.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
        }
    }
    None
}

/// A set of `(row, column)` pairs is a rook set when no two share a row or a column.
pub fn is_rook_set(pairs: &[(usize, usize)]) -> bool {
    let mut rows = HashSet::new();
    let mut cols = HashSet::new();
    pairs.iter().all(|&(i, j)| rows.insert(i) && cols.insert(j))
}

/// Largest rook subset of `pairs`, via maximum bipartite matching
/// (Hopcroft–Karp). Output pairs follow input order.
pub fn find_rook_subset(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let rows: Vec<usize> = dedup_sorted(pairs.iter().map(|p| p.0));
    let cols: Vec<usize> = dedup_sorted(pairs.iter().map(|p| p.1));
    let mut adj = vec![Vec::new(); rows.len()];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let r = rows.binary_search(&i).expect("row");
        let c = cols.binary_search(&j).expect("col");
        adj[r].push((c, k));
    }
    let matched = hopcroft_karp(&adj, cols.len());
    let mut chosen: Vec<usize> = matched.into_iter().flatten().collect();
    chosen.sort_unstable();
    chosen.into_iter().map(|k| pairs[k]).collect()
}

fn dedup_sorted(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Maximum matching; `adj[left]` lists `(right, label)`. Returns, per left
/// vertex, the label of its matched edge.
fn hopcroft_karp(adj: &[Vec<(usize, usize)>], n_right: usize) -> Vec<Option<usize>> {
    const FREE: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![FREE; n_left];
    let mut label_l = vec![None; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut layer = vec![0usize; n_left];
    loop {
        // Breadth-first layering from free left vertices.
        let mut q = VecDeque::new();
        for l in 0..n_left {
            if match_l[l] == FREE {
                layer[l] = 0;
                q.push_back(l);
            } else {
                layer[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = q.pop_front() {
            for &(r, _) in &adj[l] {
                let l2 = match_r[r];
                if l2 == FREE {
                    found = true;
                } else if layer[l2] == usize::MAX {
                    layer[l2] = layer[l] + 1;
                    q.push_back(l2);
                }
            }
        }
        if !found {
            break;
        }
        let mut progress = false;
        for l in 0..n_left {
            if match_l[l] == FREE
                && augment(l, adj, &mut match_l, &mut label_l, &mut match_r, &mut layer)
            {
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    label_l
}

fn augment(
    l: usize,
    adj: &[Vec<(usize, usize)>],
    match_l: &mut [usize],
    label_l: &mut [Option<usize>],
    match_r: &mut [usize],
    layer: &mut [usize],
) -> bool {
    for &(r, label) in &adj[l] {
        let l2 = match_r[r];
        let ok = l2 == usize::MAX
            || (layer[l2] == layer[l] + 1 && augment(l2, adj, match_l, label_l, match_r, layer));
        if ok {
            match_l[l] = r;
            label_l[l] = Some(label);
            match_r[r] = l;
            return true;
        }
    }
    layer[l] = usize::MAX;
    false
}

/// Size of a maximum matching in the bipartite graph with the given
/// `(left, right)` edges.
pub fn max_matching_size(pairs: &[(usize, usize)]) -> usize {
    find_rook_subset(pairs).len()
}

/// Extends a rook set to `target` diagonal pairs `(i, i)` in `0..w` whose row
/// and column are unused by the rook set, taking the smallest free indices.
pub fn extend_with_diagonal(rook: &[(usize, usize)], w: usize, target: usize) -> Result<Vec<(usize, usize)>, InstanceError> {
    if !is_rook_set(rook) {
        return Err(InstanceError::Param("input is not a rook set".into()));
    }
    let used: HashSet<usize> = rook.iter().flat_map(|&(i, j)| [i, j]).collect();
    let free: Vec<(usize, usize)> = (0..w).filter(|i| !used.contains(i)).map(|i| (i, i)).collect();
    if free.len() < target {
        return Err(InstanceError::NotEnoughDiagonal { need: target, have: free.len() });
    }
    Ok(free[..target].to_vec())
}

/// `k` distinct off-diagonal pairs drawn uniformly from `0..k × 0..k`.
pub fn random_off_diagonal_pairs(k: usize, r: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(k);
    while out.len() < k.min(k * k.saturating_sub(1)) {
        let (i, j) = (r.gen_range(0..k), r.gen_range(0..k));
        if i != j && seen.insert((i, j)) {
            out.push((i, j));
        }
    }
    out
}
