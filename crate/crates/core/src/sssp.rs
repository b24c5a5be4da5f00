//! Multiplicative-weights round loop for (1+ε)-approximate SSSP.
//!
//! Each round samples every edge with probability proportional to its current
//! importance, computes a shortest-path tree of spanner ∪ sample, and multiplies
//! the importance of every edge the tree stretches by `1 + n^{1/k}`. Importances
//! are never stored per edge: the importance of `e` is `(1 + n^{1/k})^f` where `f`
//! counts the stored trees that stretch `e`. The final answer is a shortest-path
//! tree of the union of all round trees.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{
    pair_index, shortest_path_tree, violates_raw, Adjacency, Distance, Edge, Graph, GraphError,
    ShortestPathTree,
};
use crate::hash::{hash3, unit};
use crate::spanner::{spanner_from_edges, streaming_spanner, Spanner, SpannerError};
use crate::stream::{EdgeStream, SpaceLedger, StreamError, StreamMode};

#[derive(Debug, Error)]
pub enum SsspError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Spanner(#[from] SpannerError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("sampler: {0}")]
    Sampler(String),
}

/// Run parameters. Build with [`Config::new`], which validates them and sets
/// the round count to `⌈10k²/ε⌉`.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub k: u32,
    pub eps: f64,
    pub seed: u64,
    pub source: usize,
    pub rounds: u32,
    /// Multiplies the sampling coefficient. `1.0` is the analysed rate; smaller
    /// values thin the samples so that small inputs exercise `p < 1`.
    pub sampling_scale: f64,
    /// Replays the stream without metering after the run to report per-edge
    /// fail counts and the final potential.
    pub audit: bool,
}

impl Config {
    pub fn new(n: usize, k: u32, eps: f64, seed: u64, source: usize) -> Result<Self, SsspError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(SsspError::Config(format!("eps must lie in (0, 1), got {eps}")));
        }
        if k == 0 {
            return Err(SsspError::Config("k must be at least 1".into()));
        }
        let ln_n = (n.max(1) as f64).ln();
        let k_max = (ln_n.ceil() as u32).max(1);
        if k > k_max {
            return Err(SsspError::Config(format!("k={k} exceeds ceil(ln n)={k_max}")));
        }
        if k as f64 > ln_n {
            log::warn!("k={k} is above ln n={ln_n:.3}; the space bound degrades");
        }
        if source >= n {
            return Err(SsspError::Config(format!("source {source} out of range for n={n}")));
        }
        Ok(Config {
            k,
            eps,
            seed,
            source,
            rounds: rounds_for(k, eps),
            sampling_scale: 1.0,
            audit: true,
        })
    }

    pub fn with_sampling_scale(mut self, scale: f64) -> Self {
        self.sampling_scale = scale;
        self
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }
}

/// `⌈10k²/ε⌉`, guarded against floating error at exact quotients.
pub fn rounds_for(k: u32, eps: f64) -> u32 {
    let r = 10.0 * (k as f64).powi(2) / eps;
    (r - 1e-9 * r).ceil() as u32
}

/// `1 + n^{1/k}`: the factor applied to a stretched edge's importance.
pub fn importance_base(n: usize, k: u32) -> f64 {
    1.0 + (n as f64).powf(1.0 / k as f64)
}

/// `(10/ε) · k · n^{1+1/k} · log₂ n`.
pub fn sampling_coefficient(n: usize, k: u32, eps: f64) -> f64 {
    let nf = n as f64;
    10.0 / eps * k as f64 * nf.powf(1.0 + 1.0 / k as f64) * nf.log2()
}

/// Sampling probability `min(1, coefficient · q / Q)`.
pub fn sampling_prob(q: f64, big_q: f64, n: usize, k: u32, eps: f64) -> Result<f64, SsspError> {
    if !(big_q > 0.0) {
        return Err(SsspError::Argument(format!("total importance must be positive, got {big_q}")));
    }
    if !(q >= 0.0) {
        return Err(SsspError::Argument(format!("importance must be non-negative, got {q}")));
    }
    Ok((sampling_coefficient(n, k, eps) * q / big_q).min(1.0))
}

/// Stored round trees. Identical trees share one copy.
#[derive(Clone, Debug, Default)]
pub struct TreeStore {
    distinct: Vec<(Arc<ShortestPathTree>, u32)>,
    rounds: Vec<usize>,
    index: HashMap<u64, Vec<usize>>,
}

impl TreeStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the tree of the next round; returns true if it was new.
    pub fn push(&mut self, t: ShortestPathTree) -> bool {
        let mut h = DefaultHasher::new();
        t.hash(&mut h);
        let key = h.finish();
        let bucket = self.index.entry(key).or_default();
        if let Some(&i) = bucket.iter().find(|&&i| *self.distinct[i].0 == t) {
            self.distinct[i].1 += 1;
            self.rounds.push(i);
            return false;
        }
        let i = self.distinct.len();
        bucket.push(i);
        self.distinct.push((Arc::new(t), 1));
        self.rounds.push(i);
        true
    }

    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn distinct(&self) -> usize {
        self.distinct.len()
    }

    /// Tree of round `r` (0-based).
    pub fn tree(&self, r: usize) -> &Arc<ShortestPathTree> {
        &self.distinct[self.rounds[r]].0
    }

    /// Number of stored trees that stretch `(u, v, w)`.
    #[inline]
    pub fn fail_count(&self, u: usize, v: usize, w: u64) -> u32 {
        let mut f = 0;
        for (t, mult) in &self.distinct {
            let d = t.raw_dists();
            if violates_raw(d[u], d[v], w) {
                f += mult;
            }
        }
        f
    }

    /// Union of all stored trees, with the weights of the tree edges.
    pub fn union_graph(&self, n: usize) -> Graph {
        let mut best: HashMap<(usize, usize), u64> = HashMap::new();
        for (t, _) in &self.distinct {
            for e in t.edges() {
                best.entry((e.u, e.v)).and_modify(|w| *w = (*w).min(e.w)).or_insert(e.w);
            }
        }
        Graph::new(n, best.into_iter().map(|((u, v), w)| Edge { u, v, w })).expect("tree edges are valid")
    }
}

/// Importance of `(u, v, w)` given the stored trees: `(1 + n^{1/k})^f`.
pub fn importance(u: usize, v: usize, w: u64, store: &TreeStore, n: usize, k: u32) -> f64 {
    importance_base(n, k).powi(store.fail_count(u, v, w) as i32)
}

/// Histogram of fail counts, from which the potential and per-edge sampling
/// probabilities are computed without overflow.
#[derive(Clone, Debug, Default)]
pub struct FailHistogram {
    counts: Vec<u64>,
}

impl FailHistogram {
    pub fn add(&mut self, f: u32) {
        let f = f as usize;
        if self.counts.len() <= f {
            self.counts.resize(f + 1, 0);
        }
        self.counts[f] += 1;
    }

    pub fn words(&self) -> u64 {
        self.counts.len() as u64
    }

    fn max_fail(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    /// `Σ_f count[f] · base^{f - f_max}`.
    fn scaled_sum(&self, base: f64) -> f64 {
        let top = self.max_fail() as i32;
        self.counts
            .iter()
            .enumerate()
            .map(|(f, &c)| c as f64 * base.powi(f as i32 - top))
            .sum()
    }

    /// Natural logarithm of the potential `Σ_e base^{f_e}`; `-inf` when empty.
    pub fn ln_potential(&self, base: f64) -> f64 {
        if self.counts.is_empty() {
            return f64::NEG_INFINITY;
        }
        self.max_fail() as f64 * base.ln() + self.scaled_sum(base).ln()
    }
}

/// Per-round sampling rule shared by the explicit and streaming executions.
#[derive(Clone, Debug)]
pub(crate) struct BernoulliRule {
    base: f64,
    coefficient: f64,
    top: i32,
    scaled_total: f64,
    seed: u64,
    round: u32,
    n: usize,
}

impl BernoulliRule {
    pub(crate) fn new(hist: &FailHistogram, n: usize, cfg: &Config, round: u32) -> Self {
        let base = importance_base(n, cfg.k);
        BernoulliRule {
            base,
            coefficient: sampling_coefficient(n, cfg.k, cfg.eps) * cfg.sampling_scale,
            top: hist.max_fail() as i32,
            scaled_total: hist.scaled_sum(base),
            seed: cfg.seed,
            round,
            n,
        }
    }

    pub(crate) fn prob(&self, f: u32) -> f64 {
        (self.coefficient * self.base.powi(f as i32 - self.top) / self.scaled_total).min(1.0)
    }

    pub(crate) fn keep(&self, u: usize, v: usize, f: u32) -> bool {
        let p = self.prob(f);
        p >= 1.0 || unit(hash3(self.seed, self.round as u64, pair_index(self.n, u, v) as u64)) < p
    }
}

/// Potential growth check: every consecutive ratio of the trace is at
/// most `1 + ε/(10k)`. The trace holds natural logarithms of the potentials.
pub fn check_potential_growth(ln_q_trace: &[f64], k: u32, eps: f64) -> bool {
    potential_violations(ln_q_trace, k, eps) == 0
}

/// Number of rounds whose potential grew by more than `1 + ε/(10k)`.
pub fn potential_violations(ln_q_trace: &[f64], k: u32, eps: f64) -> usize {
    let limit = (1.0 + eps / (10.0 * k as f64)).ln() + 1e-12;
    ln_q_trace.windows(2).filter(|w| w[1] - w[0] > limit).count()
}

/// Per-run measurements.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub run_id: String,
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub eps: f64,
    pub rounds: u32,
    /// Passes over the input stream, including the spanner pass when there is one.
    pub passes: u64,
    pub peak_words: u64,
    /// Worst `d_approx / d_exact` over reachable vertices, once evaluated.
    pub max_ratio: Option<f64>,
    /// Natural logarithms of the potential before each round and after the last.
    pub ln_q_trace: Vec<f64>,
    pub rounds_violating_potential: usize,
    /// Per-edge fail counts after the last round, from the audit replay.
    pub fail_counts: Vec<u32>,
    pub max_fail_count: u32,
    pub distinct_trees: usize,
    /// Sampled edges per round.
    pub sample_sizes: Vec<usize>,
    pub spanner_edges: usize,
    pub preserver_edges: usize,
    pub spanner_reference_only: bool,
}

impl Metrics {
    pub const CSV_HEADER: &'static str =
        "run_id,n,m,k,eps,R,passes,peak_words,max_ratio,rounds_violating_potential,max_fail_count";

    pub fn csv_row(&self) -> String {
        let ratio = self.max_ratio.map(|r| format!("{r:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.n,
            self.m,
            self.k,
            self.eps,
            self.rounds,
            self.passes,
            self.peak_words,
            ratio,
            self.rounds_violating_potential,
            self.max_fail_count
        )
    }
}

/// Result of a run: the distance-preserving subgraph, its shortest-path tree
/// from the source, and the measurements.
#[derive(Clone, Debug)]
pub struct SsspOutput {
    pub preserver: Graph,
    pub tree: ShortestPathTree,
    pub trees: TreeStore,
    pub spanner: Spanner,
    pub metrics: Metrics,
}

impl SsspOutput {
    pub fn distance(&self, v: usize) -> Distance {
        self.tree.dist(v)
    }

    /// Compares against exact Dijkstra distances on `g` and records the worst
    /// ratio. Returns `None` if a reachable vertex is unreachable in the output
    /// or a zero distance is overestimated.
    pub fn evaluate(&mut self, g: &Graph) -> Option<f64> {
        let exact = crate::graph::spt(g, self.tree.root());
        let mut worst = 1.0f64;
        for v in 0..g.n() {
            match (exact.dist(v).get(), self.tree.dist(v).get()) {
                (None, None) => {}
                (Some(0), Some(0)) => {}
                (Some(d), Some(a)) if d > 0 => worst = worst.max(a as f64 / d as f64),
                _ => {
                    self.metrics.max_ratio = Some(f64::INFINITY);
                    return None;
                }
            }
        }
        self.metrics.max_ratio = Some(worst);
        Some(worst)
    }
}

/// Space charged for one stored tree (parent and distance per vertex).
pub(crate) fn tree_words(n: usize) -> u64 {
    2 * n as u64
}

/// Space charged while building and searching `H ∪ F`.
pub(crate) fn search_words(n: usize, edges: usize) -> u64 {
    // Offsets, two arcs of (target, weight) per edge, and Dijkstra's distance,
    // settle-order and heap arrays.
    (n as u64 + 1) + 4 * edges as u64 + 3 * n as u64
}

/// Computes the round tree on `H ∪ F` and stores it, with space accounting.
pub(crate) fn round_tree(
    n: usize,
    source: usize,
    spanner: &Graph,
    sample: &[Edge],
    store: &mut TreeStore,
    ledger: &mut SpaceLedger,
) {
    let search = search_words(n, spanner.m() + sample.len());
    ledger.charge(search);
    let adj = Adjacency::from_edges(n, spanner.edges().iter().chain(sample.iter()));
    let t = shortest_path_tree(&adj, source);
    drop(adj);
    if store.push(t) {
        ledger.charge(tree_words(n));
    }
    ledger.charge(1);
    ledger.release(search);
}

/// Result of replaying the input against the stored trees.
#[derive(Clone, Debug, Default)]
pub struct Audit {
    pub fail_counts: Vec<u32>,
    /// `ln Q` before each round and after the last, `rounds + 1` entries.
    pub ln_q_trace: Vec<f64>,
}

/// Replays `edges` against the stored trees in round order.
pub fn audit<I>(edges: I, store: &TreeStore, n: usize, k: u32) -> Audit
where
    I: IntoIterator<Item = (usize, usize, u64)>,
{
    let base = importance_base(n, k);
    let rounds = store.rounds();
    let mut hists = vec![FailHistogram::default(); rounds + 1];
    let mut fail_counts = Vec::new();
    for (u, v, w) in edges {
        let mut f = 0u32;
        hists[0].add(0);
        for r in 0..rounds {
            let d = store.tree(r).raw_dists();
            if violates_raw(d[u], d[v], w) {
                f += 1;
            }
            hists[r + 1].add(f);
        }
        fail_counts.push(f);
    }
    Audit { fail_counts, ln_q_trace: hists.iter().map(|h| h.ln_potential(base)).collect() }
}

/// Finishes a run: final tree on the union of round trees, metrics.
pub(crate) fn finish(
    n: usize,
    m: usize,
    cfg: &Config,
    spanner: Spanner,
    store: TreeStore,
    ledger: &mut SpaceLedger,
    audit: Option<Audit>,
) -> SsspOutput {
    let preserver = store.union_graph(n);
    let search = search_words(n, preserver.m());
    ledger.charge(search);
    let tree = shortest_path_tree(&preserver.adjacency(), cfg.source);
    ledger.release(search);
    let mut metrics = Metrics {
        n,
        m,
        k: cfg.k,
        eps: cfg.eps,
        rounds: cfg.rounds,
        peak_words: ledger.peak_words(),
        distinct_trees: store.distinct(),
        spanner_edges: spanner.graph.m(),
        preserver_edges: preserver.m(),
        spanner_reference_only: spanner.reference_only,
        ..Metrics::default()
    };
    if let Some(a) = audit {
        metrics.rounds_violating_potential = potential_violations(&a.ln_q_trace, cfg.k, cfg.eps);
        metrics.max_fail_count = a.fail_counts.iter().copied().max().unwrap_or(0);
        metrics.ln_q_trace = a.ln_q_trace;
        metrics.fail_counts = a.fail_counts;
    }
    SsspOutput { preserver, tree, trees: store, spanner, metrics }
}

/// Runs the algorithm over a stream. Insertion-only streams use two passes per
/// round (potential, then sampling) after one spanner pass; dynamic streams are
/// handed to [`crate::dynamic::approx_sssp_dynamic`].
pub fn approx_sssp(stream: &EdgeStream, cfg: &Config) -> Result<SsspOutput, SsspError> {
    if stream.mode() == StreamMode::Dynamic {
        return crate::dynamic::approx_sssp_dynamic(stream, cfg, &crate::dynamic::BankConfig::default());
    }
    if cfg.source >= stream.n() {
        return Err(SsspError::Config(format!("source {} out of range", cfg.source)));
    }
    let n = stream.n();
    let start_passes = stream.pass_count();
    let mut ledger = SpaceLedger::new();
    let spanner = streaming_spanner(stream, cfg.k, cfg.eps, &mut ledger)?;
    let mut store = TreeStore::new();
    let mut sizes = Vec::with_capacity(cfg.rounds as usize);
    let mut ln_q = Vec::with_capacity(cfg.rounds as usize + 1);
    let base = importance_base(n, cfg.k);
    for round in 0..cfg.rounds {
        // Pass 1: the potential, kept as a histogram of fail counts.
        let mut hist = FailHistogram::default();
        for e in stream.begin_pass()? {
            hist.add(store.fail_count(e.u, e.v, e.w));
        }
        let hist_words = hist.words();
        ledger.charge(hist_words);
        ln_q.push(hist.ln_potential(base));
        let rule = BernoulliRule::new(&hist, n, cfg, round);
        // Pass 2: sample.
        let mut sample = Vec::new();
        for e in stream.begin_pass()? {
            let f = store.fail_count(e.u, e.v, e.w);
            if rule.keep(e.u, e.v, f) {
                sample.push(Edge { u: e.u, v: e.v, w: e.w });
                ledger.charge(2);
            }
        }
        ledger.release(hist_words);
        sizes.push(sample.len());
        round_tree(n, cfg.source, &spanner.graph, &sample, &mut store, &mut ledger);
        ledger.release(2 * sample.len() as u64);
    }
    let audit = cfg.audit.then(|| {
        let a = audit(stream.updates_unmetered().iter().map(|e| (e.u, e.v, e.w)), &store, n, cfg.k);
        debug_assert!(ln_q.iter().zip(&a.ln_q_trace).all(|(x, y)| x == y || (x - y).abs() <= 1e-9 * x.abs()));
        a
    });
    let mut out = finish(n, stream.len(), cfg, spanner, store, &mut ledger, audit);
    out.metrics.passes = stream.pass_count() - start_passes;
    out.metrics.sample_sizes = sizes;
    if !cfg.audit {
        out.metrics.ln_q_trace = ln_q;
    }
    Ok(out)
}

/// Same algorithm with the whole graph in memory. Importances are kept per edge
/// and edges are visited in the graph's sorted order; on a stream listing the
/// edges in that order it returns the same trees as [`approx_sssp`].
pub fn approx_sssp_explicit(g: &Graph, cfg: &Config) -> Result<SsspOutput, SsspError> {
    if cfg.source >= g.n() {
        return Err(SsspError::Config(format!("source {} out of range", cfg.source)));
    }
    let n = g.n();
    let spanner = spanner_from_edges(n, g.edges(), cfg.k, cfg.eps)?;
    let mut store = TreeStore::new();
    let mut sizes = Vec::with_capacity(cfg.rounds as usize);
    let mut fails = vec![0u32; g.m()];
    let mut ledger = SpaceLedger::new();
    let base = importance_base(n, cfg.k);
    let mut ln_q = Vec::with_capacity(cfg.rounds as usize + 1);
    for round in 0..cfg.rounds {
        let mut hist = FailHistogram::default();
        fails.iter().for_each(|&f| hist.add(f));
        ln_q.push(hist.ln_potential(base));
        let rule = BernoulliRule::new(&hist, n, cfg, round);
        let sample: Vec<Edge> = g
            .edges()
            .iter()
            .zip(&fails)
            .filter(|(e, &f)| rule.keep(e.u, e.v, f))
            .map(|(e, _)| *e)
            .collect();
        sizes.push(sample.len());
        round_tree(n, cfg.source, &spanner.graph, &sample, &mut store, &mut ledger);
        let t = store.tree(round as usize).clone();
        for (e, f) in g.edges().iter().zip(fails.iter_mut()) {
            if crate::graph::violates(&t, e.u, e.v, e.w) {
                *f += 1;
            }
        }
    }
    let mut hist = FailHistogram::default();
    fails.iter().for_each(|&f| hist.add(f));
    ln_q.push(hist.ln_potential(base));
    let audit = Audit { fail_counts: fails, ln_q_trace: ln_q };
    let mut out = finish(n, g.m(), cfg, spanner, store, &mut ledger, Some(audit));
    out.metrics.sample_sizes = sizes;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::spt;
    use crate::stream::EdgeUpdate;

    fn stream_of(g: &Graph) -> EdgeStream {
        let ups = g.edges().iter().map(|e| EdgeUpdate::insert(e.u, e.v, e.w)).collect();
        EdgeStream::from_updates(g.n(), StreamMode::InsertOnly, ups).unwrap()
    }

    fn path_graph() -> Graph {
        Graph::new(4, [Edge::new(0, 1, 2), Edge::new(1, 2, 3), Edge::new(0, 2, 10), Edge::new(2, 3, 1)]).unwrap()
    }

    #[test]
    fn rounds_are_ceilings() {
        assert_eq!(rounds_for(2, 0.1), 400);
        assert_eq!(rounds_for(2, 0.25), 160);
        assert_eq!(rounds_for(2, 0.5), 80);
        assert_eq!(rounds_for(3, 0.1), 900);
        assert_eq!(rounds_for(3, 0.25), 360);
        assert_eq!(rounds_for(1, 0.3), 34);
    }

    #[test]
    fn sampling_probability_examples() {
        assert_eq!(sampling_coefficient(16, 2, 0.5), 10240.0);
        assert_eq!(sampling_prob(1.0, 40960.0, 16, 2, 0.5).unwrap(), 0.25);
        assert_eq!(sampling_prob(1.0, 10240.0, 16, 2, 0.5).unwrap(), 1.0);
        assert!(sampling_prob(1.0, 0.0, 16, 2, 0.5).is_err());
        assert!(sampling_prob(-1.0, 5.0, 16, 2, 0.5).is_err());
    }

    #[test]
    fn importance_grows_per_failure() {
        // Three trees in which vertex 1 sits at distance 0 and vertex 2 at 10.
        let g = Graph::new(16, [Edge::new(0, 1, 0), Edge::new(0, 2, 10)]).unwrap();
        let mut store = TreeStore::new();
        assert_eq!(importance(1, 2, 1, &store, 16, 2), 1.0);
        for _ in 0..3 {
            store.push(spt(&g, 0));
        }
        assert_eq!(store.distinct(), 1);
        assert_eq!(importance(1, 2, 1, &store, 16, 2), 125.0);
        assert_eq!(importance(1, 2, 10, &store, 16, 2), 1.0);
    }

    #[test]
    fn potential_check_examples() {
        let k = 2;
        let eps = 0.5;
        assert!(check_potential_growth(&[5.0f64.ln(); 4], k, eps));
        let ok = (1.0 + eps / (10.0 * k as f64)).ln();
        assert!(check_potential_growth(&[0.0, ok, 2.0 * ok], k, eps));
        let bad = (1.0 + eps / (5.0 * k as f64)).ln();
        assert!(!check_potential_growth(&[0.0, bad], k, eps));
        assert_eq!(potential_violations(&[0.0, bad, bad, 2.0 * bad], k, eps), 2);
    }

    #[test]
    fn histogram_potential_matches_direct_sum() {
        let mut h = FailHistogram::default();
        for f in [0, 0, 3, 1, 3] {
            h.add(f);
        }
        let base = 5.0f64;
        let direct: f64 = [0, 0, 3, 1, 3].iter().map(|&f| base.powi(f)).sum();
        assert!((h.ln_potential(base) - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(Config::new(16, 2, 0.0, 1, 0).is_err());
        assert!(Config::new(16, 2, 1.0, 1, 0).is_err());
        assert!(Config::new(16, 0, 0.5, 1, 0).is_err());
        assert_eq!(Config::new(16, 3, 0.5, 1, 0).unwrap().rounds, 180);
        assert!(Config::new(16, 4, 0.5, 1, 0).is_err());
        assert!(Config::new(16, 2, 0.5, 1, 16).is_err());
    }

    #[test]
    fn pass_count_is_one_plus_two_rounds() {
        let g = path_graph();
        let s = stream_of(&g);
        let cfg = Config::new(4, 1, 0.5, 7, 0).unwrap();
        let out = approx_sssp(&s, &cfg).unwrap();
        assert_eq!(out.metrics.passes, 1 + 2 * cfg.rounds as u64);
        assert_eq!(s.pass_count(), 1 + 2 * 20);
        assert_eq!(out.distance(3), Distance::finite(6));
    }

    #[test]
    fn empty_stream_gives_isolated_vertices() {
        let s = EdgeStream::from_updates(3, StreamMode::InsertOnly, vec![]).unwrap();
        let cfg = Config::new(3, 1, 0.5, 1, 1).unwrap();
        let out = approx_sssp(&s, &cfg).unwrap();
        assert_eq!(out.distance(1), Distance::ZERO);
        assert_eq!(out.distance(0), Distance::INFINITY);
        assert_eq!(out.metrics.passes, 1 + 2 * cfg.rounds as u64);
    }

    #[test]
    fn thinned_sampling_matches_explicit_execution() {
        let g = crate::generators::random_connected_graph(40, 160, 50, 3);
        let s = stream_of(&g);
        let cfg = Config::new(40, 2, 0.5, 11, 0).unwrap().with_sampling_scale(1e-4);
        let a = approx_sssp(&s, &cfg).unwrap();
        let b = approx_sssp_explicit(&g, &cfg).unwrap();
        assert!(a.metrics.distinct_trees > 1, "thinning should produce failures");
        for r in 0..cfg.rounds as usize {
            assert_eq!(a.trees.tree(r), b.trees.tree(r), "round {r}");
        }
        assert_eq!(a.metrics.fail_counts, b.metrics.fail_counts);
        assert_eq!(a.metrics.ln_q_trace.len(), b.metrics.ln_q_trace.len());
        for (x, y) in a.metrics.ln_q_trace.iter().zip(&b.metrics.ln_q_trace) {
            assert!((x - y).abs() < 1e-9);
        }
        assert_eq!(a.tree, b.tree);
    }

    #[test]
    fn full_rate_is_exact_on_small_graphs() {
        let g = crate::generators::random_connected_graph(30, 90, 20, 5);
        let mut out = approx_sssp(&stream_of(&g), &Config::new(30, 2, 0.25, 1, 4).unwrap()).unwrap();
        assert_eq!(out.evaluate(&g), Some(1.0));
        assert_eq!(out.metrics.max_fail_count, 0);
        assert_eq!(out.metrics.distinct_trees, 1);
    }
}
