//! Smoothness sparsifiers and the deterministic round loop.
//!
//! A reweighted subgraph `H` of an importance-weighted graph `(G, q)` is an
//! ε-smoothness sparsifier with respect to a source `s` when
//!
//! 1. `Σ_{e∈H} q̃_e ≤ (1+ε) Σ_{e∈G} q_e`, and
//! 2. for every acyclic `T ⊆ G`, `Σ_{e∈B(T)∩H} q̃_e ≥ Σ_{e∈B(T)} q_e − ε Σ_{e∈G} q_e`,
//!
//! where `B(T)` are the edges of `G` stretched by the distances from `s` in `T`.
//! Condition 2 says that any tree that stretches a lot of importance in `G`
//! also stretches a lot of importance in `H`, which is what the round loop needs
//! from its per-round sample.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::graph::{dijkstra, pair_index, violates_raw, Adjacency, Edge, Graph, GraphError};
use crate::hash::{hash3, unit};
use crate::spanner::{streaming_spanner, SpannerError};
use crate::sssp::{audit, finish, importance_base, round_tree, Config, SsspError, SsspOutput, TreeStore};
use crate::stream::{EdgeStream, SpaceLedger, StreamError, StreamMode};

/// Largest parent graph [`verify_sparsifier`] accepts (it enumerates all subsets).
pub const MAX_VERIFY_EDGES: usize = 14;
/// Largest parent graph [`deterministic_enumerate`] accepts.
pub const MAX_ENUMERATE_EDGES: usize = 12;

#[derive(Debug, Error)]
pub enum SparsifierError {
    #[error("importance vector has {got} entries for {edges} edges")]
    LengthMismatch { got: usize, edges: usize },
    #[error("importance {0} is negative or not finite")]
    BadImportance(f64),
    #[error("eps must be positive, got {0}")]
    BadEps(f64),
    #[error("edge ({0},{1}) is not an edge of the parent graph")]
    NotInParent(usize, usize),
    #[error("the forest contains a cycle")]
    Cyclic,
    #[error("parent graph has {0} edges; at most {1} are supported")]
    TooLarge(usize, usize),
    #[error("parent graphs overlap on edge ({0},{1})")]
    OverlappingParents(usize, usize),
    #[error("outer sparsifier was not built on the inner sparsifier")]
    NotNested,
    #[error("no qualifying subgraph found among {0} candidates")]
    NoCandidate(u64),
    #[error("source {0} out of range")]
    BadSource(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// A graph with one non-negative importance per edge (aligned with `graph.edges()`).
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceGraph {
    pub graph: Graph,
    pub importances: Vec<f64>,
}

impl ImportanceGraph {
    pub fn new(graph: Graph, importances: Vec<f64>) -> Result<Self, SparsifierError> {
        if importances.len() != graph.m() {
            return Err(SparsifierError::LengthMismatch { got: importances.len(), edges: graph.m() });
        }
        if let Some(&q) = importances.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
            return Err(SparsifierError::BadImportance(q));
        }
        Ok(ImportanceGraph { graph, importances })
    }

    pub fn uniform(graph: Graph) -> Self {
        let m = graph.m();
        ImportanceGraph { graph, importances: vec![1.0; m] }
    }

    pub fn total(&self) -> f64 {
        self.importances.iter().sum()
    }
}

/// A reweighted subgraph together with the edge set of the graph it sparsifies.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessSparsifier {
    pub sub: ImportanceGraph,
    pub eps: f64,
    parent_edges: BTreeSet<(usize, usize)>,
}

impl SmoothnessSparsifier {
    /// Checks that every edge of `sub` is an edge of `parent` with the same weight.
    pub fn new(parent: &ImportanceGraph, sub: ImportanceGraph, eps: f64) -> Result<Self, SparsifierError> {
        if !(eps >= 0.0) {
            return Err(SparsifierError::BadEps(eps));
        }
        for e in sub.graph.edges() {
            if parent.graph.weight(e.u, e.v) != Some(e.w) {
                return Err(SparsifierError::NotInParent(e.u, e.v));
            }
        }
        let parent_edges = parent.graph.edges().iter().map(|e| (e.u, e.v)).collect();
        Ok(SmoothnessSparsifier { sub, eps, parent_edges })
    }

    /// The parent itself with its own importances: a 0-sparsifier.
    pub fn identity(parent: &ImportanceGraph) -> Self {
        let parent_edges = parent.graph.edges().iter().map(|e| (e.u, e.v)).collect();
        SmoothnessSparsifier { sub: parent.clone(), eps: 0.0, parent_edges }
    }

    pub fn parent_edge_count(&self) -> usize {
        self.parent_edges.len()
    }

    /// Words to hold the sparsifier: endpoint pair, weight and importance per edge.
    pub fn words(&self) -> u64 {
        3 * self.sub.graph.m() as u64
    }
}

/// Edges of `g` stretched by the distances from `s` in the forest `t`, as
/// indices into `g.edges()`.
pub fn bad_edges(g: &Graph, t: &Graph, s: usize) -> Result<Vec<usize>, SparsifierError> {
    if s >= g.n() || t.n() != g.n() {
        return Err(SparsifierError::BadSource(s));
    }
    if !is_forest(t) {
        return Err(SparsifierError::Cyclic);
    }
    let d = dijkstra(&t.adjacency(), s);
    Ok(g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| violates_raw(d[e.u], d[e.v], e.w))
        .map(|(i, _)| i)
        .collect())
}

fn is_forest(t: &Graph) -> bool {
    let mut uf: Vec<usize> = (0..t.n()).collect();
    t.edges().iter().all(|e| union(&mut uf, e.u, e.v))
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn union(uf: &mut [usize], a: usize, b: usize) -> bool {
    let (ra, rb) = (find(uf, a), find(uf, b));
    if ra == rb {
        return false;
    }
    uf[ra] = rb;
    true
}

/// Exhaustive checker for one parent graph: enumerates every acyclic edge
/// subset once and keeps the distinct bad-edge sets.
pub struct SparsifierVerifier {
    parent: ImportanceGraph,
    bad_sets: Vec<u32>,
}

impl SparsifierVerifier {
    pub fn new(parent: &ImportanceGraph, s: usize) -> Result<Self, SparsifierError> {
        Self::with_forests_of(parent, &parent.graph, s)
    }

    /// Like [`SparsifierVerifier::new`], but the forests range over `ambient`
    /// instead of the parent. Pieces that are later merged or composed into a
    /// larger graph must hold for the forests of that graph.
    pub fn with_forests_of(parent: &ImportanceGraph, ambient: &Graph, s: usize) -> Result<Self, SparsifierError> {
        let g = &parent.graph;
        if g.m() > MAX_VERIFY_EDGES {
            return Err(SparsifierError::TooLarge(g.m(), MAX_VERIFY_EDGES));
        }
        if ambient.m() > MAX_VERIFY_EDGES {
            return Err(SparsifierError::TooLarge(ambient.m(), MAX_VERIFY_EDGES));
        }
        if s >= g.n() || ambient.n() != g.n() {
            return Err(SparsifierError::BadSource(s));
        }
        let edges = g.edges();
        let mut sets = HashSet::new();
        let mut uf = vec![0usize; g.n()];
        let mut forest = Vec::with_capacity(ambient.m());
        'masks: for mask in 0u32..(1 << ambient.m()) {
            uf.iter_mut().enumerate().for_each(|(i, p)| *p = i);
            forest.clear();
            for (i, e) in ambient.edges().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if !union(&mut uf, e.u, e.v) {
                        continue 'masks;
                    }
                    forest.push(*e);
                }
            }
            let d = dijkstra(&Adjacency::from_edges(g.n(), &forest), s);
            let bad = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| violates_raw(d[e.u], d[e.v], e.w))
                .fold(0u32, |acc, (i, _)| acc | 1 << i);
            sets.insert(bad);
        }
        let mut bad_sets: Vec<u32> = sets.into_iter().collect();
        bad_sets.sort_unstable();
        Ok(SparsifierVerifier { parent: parent.clone(), bad_sets })
    }

    /// Distinct bad-edge sets over all acyclic subgraphs, as bitmasks over the
    /// parent's edges.
    pub fn bad_sets(&self) -> &[u32] {
        &self.bad_sets
    }

    /// Checks both conditions for reweighted importances aligned with the
    /// parent's edges (zero for edges outside the subgraph).
    pub fn check_aligned(&self, q_tilde: &[f64], eps: f64) -> bool {
        let q = &self.parent.importances;
        let total: f64 = q.iter().sum();
        let tol = 1e-9 * total.max(1.0);
        if q_tilde.iter().sum::<f64>() > (1.0 + eps) * total + tol {
            return false;
        }
        self.bad_sets.iter().all(|&b| {
            let (mut kept, mut all) = (0.0, 0.0);
            for i in 0..q.len() {
                if b >> i & 1 == 1 {
                    kept += q_tilde[i];
                    all += q[i];
                }
            }
            kept >= all - eps * total - tol
        })
    }

    pub fn check(&self, cand: &SmoothnessSparsifier) -> Result<bool, SparsifierError> {
        let aligned = align(&self.parent, &cand.sub)?;
        Ok(self.check_aligned(&aligned, cand.eps))
    }
}

fn align(parent: &ImportanceGraph, sub: &ImportanceGraph) -> Result<Vec<f64>, SparsifierError> {
    let pos: HashMap<(usize, usize), usize> =
        parent.graph.edges().iter().enumerate().map(|(i, e)| ((e.u, e.v), i)).collect();
    let mut out = vec![0.0; parent.graph.m()];
    for (e, &q) in sub.graph.edges().iter().zip(&sub.importances) {
        match pos.get(&(e.u, e.v)) {
            Some(&i) if parent.graph.edges()[i].w == e.w => out[i] = q,
            _ => return Err(SparsifierError::NotInParent(e.u, e.v)),
        }
    }
    Ok(out)
}

/// Checks the two sparsifier conditions at the candidate's own ε by exhaustive
/// enumeration of acyclic subgraphs (parents with at most 14 edges).
pub fn verify_sparsifier(
    parent: &ImportanceGraph,
    cand: &SmoothnessSparsifier,
    s: usize,
) -> Result<bool, SparsifierError> {
    SparsifierVerifier::new(parent, s)?.check(cand)
}

/// `10 ε⁻² n log₂ n`: the sampling coefficient of [`sample_sparsifier`].
pub fn sparsifier_coefficient(n: usize, eps: f64) -> f64 {
    let nf = n as f64;
    10.0 / (eps * eps) * nf * nf.log2()
}

/// Keeps each edge with probability `p_e = min(1, coefficient · q_e / Q)` and
/// reweights it to `q_e / p_e`.
pub fn sample_sparsifier(parent: &ImportanceGraph, eps: f64, seed: u64) -> Result<SmoothnessSparsifier, SparsifierError> {
    sample_sparsifier_scaled(parent, eps, seed, 1.0)
}

/// [`sample_sparsifier`] with the coefficient multiplied by `scale`.
pub fn sample_sparsifier_scaled(
    parent: &ImportanceGraph,
    eps: f64,
    seed: u64,
    scale: f64,
) -> Result<SmoothnessSparsifier, SparsifierError> {
    if !(eps > 0.0) {
        return Err(SparsifierError::BadEps(eps));
    }
    let n = parent.graph.n();
    let total = parent.total();
    let coef = sparsifier_coefficient(n, eps) * scale;
    let mut edges = Vec::new();
    let mut q = Vec::new();
    for (e, &qe) in parent.graph.edges().iter().zip(&parent.importances) {
        if qe == 0.0 {
            continue;
        }
        let p = (coef * qe / total).min(1.0);
        if p >= 1.0 || unit(hash3(seed, pair_index(n, e.u, e.v) as u64, 0x5a)) < p {
            edges.push(*e);
            q.push(qe / p);
        }
    }
    let sub = ImportanceGraph::new(Graph::new(n, edges)?, q)?;
    SmoothnessSparsifier::new(parent, sub, eps)
}

/// Union of sparsifiers of edge-disjoint parents: a sparsifier of the union of
/// the parents at the larger of the two ε.
pub fn merge(a: &SmoothnessSparsifier, b: &SmoothnessSparsifier) -> Result<SmoothnessSparsifier, SparsifierError> {
    if let Some(&(u, v)) = a.parent_edges.intersection(&b.parent_edges).next() {
        return Err(SparsifierError::OverlappingParents(u, v));
    }
    let n = a.sub.graph.n().max(b.sub.graph.n());
    let mut pairs: Vec<(Edge, f64)> = a
        .sub
        .graph
        .edges()
        .iter()
        .copied()
        .zip(a.sub.importances.iter().copied())
        .chain(b.sub.graph.edges().iter().copied().zip(b.sub.importances.iter().copied()))
        .collect();
    pairs.sort_by_key(|(e, _)| *e);
    let graph = Graph::new(n, pairs.iter().map(|(e, _)| *e))?;
    let importances = pairs.into_iter().map(|(_, q)| q).collect();
    Ok(SmoothnessSparsifier {
        sub: ImportanceGraph { graph, importances },
        eps: a.eps.max(b.eps),
        parent_edges: a.parent_edges.union(&b.parent_edges).copied().collect(),
    })
}

/// Error of a sparsifier of a sparsifier.
pub fn compose_eps(eps1: f64, eps2: f64) -> f64 {
    eps1 + eps2 + eps1 * eps2
}

/// `outer` sparsifies `inner.sub`; the result sparsifies `inner`'s parent.
pub fn compose(inner: &SmoothnessSparsifier, outer: &SmoothnessSparsifier) -> Result<SmoothnessSparsifier, SparsifierError> {
    let inner_edges: BTreeSet<(usize, usize)> = inner.sub.graph.edges().iter().map(|e| (e.u, e.v)).collect();
    if inner_edges != outer.parent_edges {
        return Err(SparsifierError::NotNested);
    }
    Ok(SmoothnessSparsifier {
        sub: outer.sub.clone(),
        eps: compose_eps(inner.eps, outer.eps),
        parent_edges: inner.parent_edges.clone(),
    })
}

/// Uniform importance `ε² Q / (10 n log₂ n)` given to every candidate edge.
pub fn uniform_importance(parent: &ImportanceGraph, eps: f64) -> f64 {
    parent.total() / sparsifier_coefficient(parent.graph.n(), eps)
}

/// Deterministic sparsifier of a tiny parent. When every edge would be kept
/// with probability one by [`sample_sparsifier`], that sample (the parent with
/// its own importances) is returned. Otherwise the candidates of
/// [`enumerate_uniform`] are searched.
pub fn deterministic_enumerate(parent: &ImportanceGraph, eps: f64, s: usize) -> Result<SmoothnessSparsifier, SparsifierError> {
    let m = parent.graph.m();
    if m > MAX_ENUMERATE_EDGES {
        return Err(SparsifierError::TooLarge(m, MAX_ENUMERATE_EDGES));
    }
    if !(eps > 0.0) {
        return Err(SparsifierError::BadEps(eps));
    }
    let total = parent.total();
    let coef = sparsifier_coefficient(parent.graph.n(), eps);
    if parent.importances.iter().all(|&q| q == 0.0 || coef * q >= total) {
        let mut id = SmoothnessSparsifier::identity(parent);
        id.eps = eps;
        return Ok(id);
    }
    enumerate_uniform(parent, eps, s)
}

/// Searches subgraphs with uniform importances: first the full graph, then all
/// edge subsets in increasing bitmask order. Returns the first that verifies.
pub fn enumerate_uniform(parent: &ImportanceGraph, eps: f64, s: usize) -> Result<SmoothnessSparsifier, SparsifierError> {
    let m = parent.graph.m();
    if m > MAX_ENUMERATE_EDGES {
        return Err(SparsifierError::TooLarge(m, MAX_ENUMERATE_EDGES));
    }
    let verifier = SparsifierVerifier::new(parent, s)?;
    let q = uniform_importance(parent, eps);
    let full = (1u32 << m) - 1;
    let mut tried = 0u64;
    for mask in std::iter::once(full).chain(0..full) {
        tried += 1;
        let aligned: Vec<f64> = (0..m).map(|i| if mask >> i & 1 == 1 { q } else { 0.0 }).collect();
        if verifier.check_aligned(&aligned, eps) {
            let edges: Vec<Edge> =
                (0..m).filter(|i| mask >> i & 1 == 1).map(|i| parent.graph.edges()[i]).collect();
            let k = edges.len();
            let sub = ImportanceGraph::new(Graph::new(parent.graph.n(), edges)?, vec![q; k])?;
            return SmoothnessSparsifier::new(parent, sub, eps);
        }
    }
    Err(SparsifierError::NoCandidate(tried))
}

/// How merged sparsifiers are reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reducer {
    /// [`sample_sparsifier`] with seeds derived from this value.
    Sampled(u64),
    /// [`deterministic_enumerate`]; only for parents of at most 12 edges.
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeReduceOptions {
    /// Edges per leaf segment; defaults to `⌈10 ε⁻² n log₂ n⌉`.
    pub segment_len: Option<usize>,
    pub reducer: Reducer,
    /// Source for the deterministic reducer's verification.
    pub source: usize,
}

#[derive(Clone, Debug)]
pub struct MergeReduceOutput {
    pub sparsifier: SmoothnessSparsifier,
    pub segments: usize,
    pub reductions: usize,
    /// Most sparsifiers held at once.
    pub held_high_water: usize,
    /// ε used for each reduction.
    pub step_eps: f64,
    /// Error bound after composing every level of reductions.
    pub composed_eps: f64,
}

/// One pass of merge-and-reduce: the stream is cut into segments; sparsifiers
/// of equal level are merged and re-sparsified at `ε / (10 log₂ λ)`, where `λ`
/// bounds the number of segments, in a binary-counter pattern, so at most
/// `⌈log₂ segments⌉ + 1` sparsifiers are held at any time.
pub fn merge_reduce_stream(
    stream: &EdgeStream,
    eps: f64,
    opts: &MergeReduceOptions,
    importance: &dyn Fn(usize, usize, u64) -> f64,
    ledger: &mut SpaceLedger,
) -> Result<MergeReduceOutput, SparsifierError> {
    if stream.mode() != StreamMode::InsertOnly {
        return Err(SparsifierError::Stream(StreamError::DeletionInInsertionStream { index: 0 }));
    }
    if !(eps > 0.0) {
        return Err(SparsifierError::BadEps(eps));
    }
    let n = stream.n();
    let seg = opts
        .segment_len
        .unwrap_or_else(|| sparsifier_coefficient(n, eps).ceil() as usize)
        .max(1);
    let max_segments = crate::graph::pair_count(n).div_ceil(seg).max(1);
    let step_eps = if max_segments > 1 { eps / (10.0 * (max_segments as f64).log2()) } else { eps };
    let mut state = MergeState {
        n,
        step_eps,
        reducer: opts.reducer,
        source: opts.source,
        stack: Vec::new(),
        high_water: 0,
        reductions: 0,
        max_level: 0,
    };
    let mut buffer: Vec<(Edge, f64)> = Vec::new();
    let mut segments = 0usize;
    for e in stream.begin_pass()? {
        buffer.push((Edge { u: e.u, v: e.v, w: e.w }, importance(e.u, e.v, e.w)));
        ledger.charge(3);
        if buffer.len() == seg {
            segments += 1;
            state.push_segment(std::mem::take(&mut buffer), ledger)?;
        }
    }
    if !buffer.is_empty() || segments == 0 {
        segments += 1;
        state.push_segment(buffer, ledger)?;
    }
    let sparsifier = state.collapse(ledger)?;
    let levels = state.max_level as i32;
    let composed_eps = (1.0 + step_eps).powi(levels) - 1.0;
    let mut sparsifier = sparsifier;
    sparsifier.eps = composed_eps;
    Ok(MergeReduceOutput {
        sparsifier,
        segments,
        reductions: state.reductions,
        held_high_water: state.high_water,
        step_eps,
        composed_eps,
    })
}

struct MergeState {
    n: usize,
    step_eps: f64,
    reducer: Reducer,
    source: usize,
    stack: Vec<(usize, SmoothnessSparsifier)>,
    high_water: usize,
    reductions: usize,
    max_level: usize,
}

impl MergeState {
    fn push_segment(&mut self, buffer: Vec<(Edge, f64)>, ledger: &mut SpaceLedger) -> Result<(), SparsifierError> {
        // The raw segment is already charged at three words per edge.
        let graph = Graph::new(self.n, buffer.iter().map(|(e, _)| *e))?;
        let mut pairs = buffer;
        pairs.sort_by_key(|(e, _)| *e);
        let g = ImportanceGraph::new(graph, pairs.into_iter().map(|(_, q)| q).collect())?;
        self.stack.push((0, SmoothnessSparsifier::identity(&g)));
        self.high_water = self.high_water.max(self.stack.len());
        while self.stack.len() >= 2 && self.stack[self.stack.len() - 1].0 == self.stack[self.stack.len() - 2].0 {
            self.merge_top(ledger)?;
        }
        Ok(())
    }

    fn merge_top(&mut self, ledger: &mut SpaceLedger) -> Result<(), SparsifierError> {
        let (lb, b) = self.stack.pop().expect("two entries");
        let (la, a) = self.stack.pop().expect("two entries");
        let merged = merge(&a, &b)?;
        let level = la.max(lb) + 1;
        let reduced = self.reduce(&merged)?;
        ledger.release(a.words() + b.words());
        ledger.charge(reduced.words());
        self.reductions += 1;
        self.max_level = self.max_level.max(level);
        self.stack.push((level, reduced));
        Ok(())
    }

    fn reduce(&self, merged: &SmoothnessSparsifier) -> Result<SmoothnessSparsifier, SparsifierError> {
        let inner = merged.sub.clone();
        let outer = match self.reducer {
            Reducer::Sampled(seed) => {
                sample_sparsifier(&inner, self.step_eps, hash3(seed, self.reductions as u64, 0x4ed))?
            }
            Reducer::Deterministic => deterministic_enumerate(&inner, self.step_eps, self.source)?,
        };
        let mut out = compose(merged, &outer)?;
        out.eps = self.step_eps;
        Ok(out)
    }

    fn collapse(&mut self, ledger: &mut SpaceLedger) -> Result<SmoothnessSparsifier, SparsifierError> {
        while self.stack.len() > 1 {
            self.merge_top(ledger)?;
        }
        let (_, s) = self.stack.pop().expect("at least one segment");
        ledger.release(s.words());
        Ok(s)
    }
}

/// Round loop in which each round's sample is a deterministic smoothness
/// sparsifier at `ε / (10 k n^{1/k})`, built by merge-and-reduce in one pass.
/// Passes: one for the spanner plus one per round.
pub fn approx_sssp_derandomized(
    stream: &EdgeStream,
    cfg: &Config,
    segment_len: usize,
) -> Result<SsspOutput, SsspError> {
    let n = stream.n();
    if cfg.source >= n {
        return Err(SsspError::Config(format!("source {} out of range", cfg.source)));
    }
    let start_passes = stream.pass_count();
    let mut ledger = SpaceLedger::new();
    let spanner = streaming_spanner(stream, cfg.k, cfg.eps, &mut ledger).map_err(|e| match e {
        SpannerError::Stream(s) => SsspError::Stream(s),
        other => SsspError::Spanner(other),
    })?;
    let eps_round = cfg.eps / (10.0 * cfg.k as f64 * (n as f64).powf(1.0 / cfg.k as f64));
    let base = importance_base(n, cfg.k);
    let opts = MergeReduceOptions { segment_len: Some(segment_len), reducer: Reducer::Deterministic, source: cfg.source };
    let mut store = TreeStore::new();
    let mut sizes = Vec::with_capacity(cfg.rounds as usize);
    let err = |e: SparsifierError| SsspError::Sampler(e.to_string());
    for _ in 0..cfg.rounds {
        let imp = |u: usize, v: usize, w: u64| base.powi(store.fail_count(u, v, w) as i32);
        let out = merge_reduce_stream(stream, eps_round, &opts, &imp, &mut ledger).map_err(err)?;
        let sample: Vec<Edge> = out.sparsifier.sub.graph.edges().to_vec();
        ledger.charge(2 * sample.len() as u64);
        sizes.push(sample.len());
        round_tree(n, cfg.source, &spanner.graph, &sample, &mut store, &mut ledger);
        ledger.release(2 * sample.len() as u64);
    }
    let a = cfg
        .audit
        .then(|| audit(stream.updates_unmetered().iter().map(|e| (e.u, e.v, e.w)), &store, n, cfg.k));
    let mut out = finish(n, stream.len(), cfg, spanner, store, &mut ledger, a);
    out.metrics.passes = stream.pass_count() - start_passes;
    out.metrics.sample_sizes = sizes;
    Ok(out)
}
