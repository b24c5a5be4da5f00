//! Exhaustive and Monte Carlo checks of smoothness sparsifiers.

use stream_sssp::derand::{
    bad_edges, compose, compose_eps, deterministic_enumerate, merge, merge_reduce_stream, sample_sparsifier,
    sample_sparsifier_scaled, sparsifier_coefficient, uniform_importance, verify_sparsifier, ImportanceGraph,
    MergeReduceOptions, Reducer, SmoothnessSparsifier, SparsifierVerifier,
};
use stream_sssp::generators::{random_connected_graph, random_graph, sorted_stream};
use stream_sssp::graph::{Edge, Graph};
use stream_sssp::stream::SpaceLedger;

fn weighted(g: Graph, seed: u64) -> ImportanceGraph {
    let q = (0..g.m()).map(|i| 1.0 + ((seed as usize + 3 * i) % 5) as f64).collect();
    ImportanceGraph::new(g, q).unwrap()
}

#[test]
fn sampled_sparsifiers_verify_on_ten_edge_graphs() {
    let mut passed = 0;
    let trials = 1000;
    for seed in 0..trials {
        let parent = weighted(random_connected_graph(6, 10, 9, seed), seed);
        let cand = sample_sparsifier(&parent, 0.5, seed).unwrap();
        passed += verify_sparsifier(&parent, &cand, 0).unwrap() as u64;
    }
    assert!(passed * 100 >= 99 * trials, "{passed}/{trials}");
}

#[test]
fn doubled_importances_break_the_total() {
    let parent = ImportanceGraph::uniform(random_connected_graph(5, 7, 9, 1));
    let doubled = ImportanceGraph::new(parent.graph.clone(), vec![2.0; 7]).unwrap();
    let cand = SmoothnessSparsifier::new(&parent, doubled, 0.5).unwrap();
    assert!(!verify_sparsifier(&parent, &cand, 0).unwrap());
    assert!(verify_sparsifier(&parent, &SmoothnessSparsifier::identity(&parent), 0).unwrap());
}

#[test]
fn sampling_preserves_total_importance_in_expectation() {
    let n = 8;
    let parent = ImportanceGraph::uniform(random_connected_graph(n, 12, 9, 2));
    let total = parent.total();
    let eps = 0.5;
    let scale = 0.4 * total / sparsifier_coefficient(n, eps);
    let p = sparsifier_coefficient(n, eps) * scale / total;
    assert!(p < 1.0);
    let trials = 10_000;
    let mut sum = 0.0;
    for seed in 0..trials {
        let s = sample_sparsifier_scaled(&parent, eps, seed, scale).unwrap();
        sum += s.sub.total();
    }
    let mean = sum / trials as f64;
    // Σ q̃ = Σ_e (q/p)·Bernoulli(p): variance Σ q²(1−p)/p.
    let sigma = (parent.graph.m() as f64 * (1.0 - p) / p / trials as f64).sqrt();
    assert!((mean - total).abs() <= 3.0 * sigma, "mean {mean} vs {total} ± 3·{sigma}");
}

#[test]
fn sampling_preserves_bad_set_importance_in_expectation() {
    let n = 8;
    let g = random_connected_graph(n, 12, 9, 5);
    let parent = weighted(g.clone(), 5);
    // A fixed spanning path of the first few vertices.
    let t = Graph::new(n, g.edges().iter().copied().filter(|e| e.u == 0).take(2)).unwrap();
    let bad = bad_edges(&g, &t, 0).unwrap();
    assert!(!bad.is_empty());
    let want: f64 = bad.iter().map(|&i| parent.importances[i]).sum();
    let eps = 0.5;
    let scale = 0.5 * parent.total() / sparsifier_coefficient(n, eps) / 5.0;
    let probs: Vec<f64> = parent
        .importances
        .iter()
        .map(|q| (sparsifier_coefficient(n, eps) * scale * q / parent.total()).min(1.0))
        .collect();
    let trials = 10_000;
    let mut sum = 0.0;
    for seed in 0..trials {
        let s = sample_sparsifier_scaled(&parent, eps, seed, scale).unwrap();
        for &i in &bad {
            let e = g.edges()[i];
            if let Some(j) = s.sub.graph.edges().iter().position(|f| (f.u, f.v) == (e.u, e.v)) {
                sum += s.sub.importances[j];
            }
        }
    }
    let var: f64 = bad.iter().map(|&i| parent.importances[i].powi(2) * (1.0 - probs[i]) / probs[i]).sum();
    let sigma = (var / trials as f64).sqrt();
    let mean = sum / trials as f64;
    assert!((mean - want).abs() <= 3.0 * sigma, "mean {mean} vs {want} ± 3·{sigma}");
}

fn split(g: &Graph) -> (Graph, Graph) {
    let half = |r: usize| Graph::new(g.n(), g.edges().iter().enumerate().filter(|(i, _)| i % 2 == r).map(|(_, e)| *e)).unwrap();
    (half(0), half(1))
}

#[test]
fn merged_sparsifiers_verify_on_the_union() {
    let eps = 0.5;
    let (mut checked, mut nontrivial) = (0, 0);
    for seed in 0..400 {
        let g = random_connected_graph(6, 10, 9, seed);
        let (ga, gb) = split(&g);
        let (pa, pb) = (weighted(ga, seed), weighted(gb, seed + 1));
        let scale = 0.004;
        let a = sample_sparsifier_scaled(&pa, eps, seed, scale).unwrap();
        let b = sample_sparsifier_scaled(&pb, eps, seed + 7, scale).unwrap();
        let holds = |p: &ImportanceGraph, c: &SmoothnessSparsifier| {
            SparsifierVerifier::with_forests_of(p, &g, 0).unwrap().check(c).unwrap()
        };
        if !(holds(&pa, &a) && holds(&pb, &b)) {
            continue;
        }
        checked += 1;
        nontrivial += (a.sub.graph.m() < pa.graph.m() || b.sub.graph.m() < pb.graph.m()) as usize;
        let m = merge(&a, &b).unwrap();
        let union_edges = pa.graph.edges().iter().chain(pb.graph.edges()).copied();
        let union_q = pa.importances.iter().chain(&pb.importances).copied();
        let mut pairs: Vec<(Edge, f64)> = union_edges.zip(union_q).collect();
        pairs.sort_by_key(|(e, _)| *e);
        let parent = ImportanceGraph::new(
            Graph::new(6, pairs.iter().map(|p| p.0)).unwrap(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .unwrap();
        assert!(verify_sparsifier(&parent, &m, 0).unwrap(), "seed {seed}");
    }
    assert!(checked >= 50 && nontrivial >= 20, "{checked} verified pairs, {nontrivial} non-trivial");
}

#[test]
fn pieces_checked_only_on_their_own_forests_can_merge_badly() {
    // The merge needs each piece to hold for forests that straddle both.
    let eps = 0.5;
    let found = (0..400).any(|seed| {
        let g = random_connected_graph(6, 10, 9, seed);
        let (ga, gb) = split(&g);
        let (pa, pb) = (weighted(ga, seed), weighted(gb, seed + 1));
        let a = sample_sparsifier_scaled(&pa, eps, seed, 0.004).unwrap();
        let b = sample_sparsifier_scaled(&pb, eps, seed + 7, 0.004).unwrap();
        verify_sparsifier(&pa, &a, 0).unwrap()
            && verify_sparsifier(&pb, &b, 0).unwrap()
            && !SparsifierVerifier::with_forests_of(&pa, &g, 0).unwrap().check(&a).unwrap()
    });
    assert!(found);
}

#[test]
fn merging_identities_and_empties() {
    let g = random_connected_graph(6, 10, 9, 3);
    let (ga, gb) = split(&g);
    let (pa, pb) = (ImportanceGraph::uniform(ga), ImportanceGraph::uniform(gb));
    let m = merge(&SmoothnessSparsifier::identity(&pa), &SmoothnessSparsifier::identity(&pb)).unwrap();
    assert_eq!(m.sub, SmoothnessSparsifier::identity(&ImportanceGraph::uniform(g)).sub);
    let empty = ImportanceGraph::uniform(Graph::empty(6));
    let a = sample_sparsifier(&pa, 0.3, 1).unwrap();
    let with_empty = merge(&a, &SmoothnessSparsifier::identity(&empty)).unwrap();
    assert_eq!(with_empty.sub, a.sub);
    assert_eq!(with_empty.parent_edge_count(), a.parent_edge_count());
}

#[test]
fn composed_sparsifiers_verify_against_the_grandparent() {
    let (e1, e2) = (0.4, 0.3);
    let (mut checked, mut nontrivial) = (0, 0);
    for seed in 0..400 {
        let parent = weighted(random_connected_graph(6, 11, 9, seed), seed);
        let inner = sample_sparsifier_scaled(&parent, e1, seed, 0.008).unwrap();
        if !verify_sparsifier(&parent, &inner, 0).unwrap() {
            continue;
        }
        let outer = sample_sparsifier_scaled(&inner.sub, e2, seed ^ 0xff, 0.008).unwrap();
        let outer_holds = SparsifierVerifier::with_forests_of(&inner.sub, &parent.graph, 0).unwrap().check(&outer).unwrap();
        if !outer_holds {
            continue;
        }
        checked += 1;
        nontrivial += (outer.sub.graph.m() < parent.graph.m()) as usize;
        let c = compose(&inner, &outer).unwrap();
        assert!((c.eps - compose_eps(e1, e2)).abs() < 1e-12);
        assert!(verify_sparsifier(&parent, &c, 0).unwrap(), "seed {seed}");
    }
    assert!(checked >= 50 && nontrivial >= 20, "{checked} verified layers, {nontrivial} non-trivial");
}

#[test]
fn two_segments_take_one_merge_and_one_reduction() {
    let g = random_graph(8, 10, 9, 4);
    let stream = sorted_stream(&g);
    let parent = ImportanceGraph::uniform(g);
    let eps = 0.5;
    for reducer in [Reducer::Sampled(3), Reducer::Deterministic] {
        let opts = MergeReduceOptions { segment_len: Some(5), reducer, source: 0 };
        let mut ledger = SpaceLedger::new();
        let out = merge_reduce_stream(&stream, eps, &opts, &|_, _, _| 1.0, &mut ledger).unwrap();
        assert_eq!(out.segments, 2);
        assert_eq!(out.reductions, 1);
        assert!(out.composed_eps <= eps + 1e-12);
        assert!(verify_sparsifier(&parent, &out.sparsifier, 0).unwrap());
    }
}

#[test]
fn merge_reduce_holds_logarithmically_many_sparsifiers() {
    for (m, seg) in [(40, 5), (60, 4), (33, 3), (64, 2), (100, 7)] {
        let g = random_graph(16, m, 9, m as u64);
        let stream = sorted_stream(&g);
        let opts = MergeReduceOptions { segment_len: Some(seg), reducer: Reducer::Sampled(1), source: 0 };
        let out = merge_reduce_stream(&stream, 0.5, &opts, &|_, _, _| 1.0, &mut SpaceLedger::new()).unwrap();
        let bound = (out.segments as f64).log2().ceil() as usize + 1;
        assert_eq!(out.segments, m.div_ceil(seg));
        assert!(out.held_high_water <= bound, "m={m} seg={seg}: held {} > {bound}", out.held_high_water);
        assert_eq!(stream.pass_count(), 1);
    }
}

#[test]
fn enumeration_returns_a_verified_candidate_on_a_triangle() {
    let g = Graph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1), Edge::new(0, 2, 1)]).unwrap();
    let parent = ImportanceGraph::uniform(g);
    let out = deterministic_enumerate(&parent, 0.9, 0).unwrap();
    assert!(verify_sparsifier(&parent, &out, 0).unwrap());
}

/// First passing uniform-importance subgraph: full graph, then masks upwards.
fn first_passing(parent: &ImportanceGraph, eps: f64) -> Option<Vec<usize>> {
    let m = parent.graph.m();
    let q = uniform_importance(parent, eps);
    let verifier = SparsifierVerifier::new(parent, 0).unwrap();
    let full = (1u32 << m) - 1;
    std::iter::once(full).chain(0..full).find_map(|mask| {
        let qt: Vec<f64> = (0..m).map(|i| if mask >> i & 1 == 1 { q } else { 0.0 }).collect();
        verifier.check_aligned(&qt, eps).then(|| (0..m).filter(|i| mask >> i & 1 == 1).collect())
    })
}

#[test]
fn enumeration_agrees_with_a_full_scan() {
    let mut compared = 0;
    for seed in 0..40 {
        let m = 3 + (seed as usize % 6);
        let g = random_graph(7, m, 9, seed);
        // One nearly weightless edge keeps the clamp from covering every edge.
        let q = (0..m).map(|i| if i == 0 { 1e-6 } else { 1.0 + (i % 3) as f64 }).collect();
        let parent = ImportanceGraph::new(g, q).unwrap();
        for eps in [0.2, 0.5, 0.9] {
            let coef = sparsifier_coefficient(7, eps);
            if parent.importances.iter().all(|&q| coef * q >= parent.total()) {
                // The clamp applies, so the identity is returned untouched.
                let out = deterministic_enumerate(&parent, eps, 0).unwrap();
                assert_eq!(out.sub, parent);
                continue;
            }
            compared += 1;
            let want = first_passing(&parent, eps);
            match deterministic_enumerate(&parent, eps, 0) {
                Ok(out) => {
                    let got: Vec<usize> = out
                        .sub
                        .graph
                        .edges()
                        .iter()
                        .map(|e| parent.graph.edges().iter().position(|f| f == e).unwrap())
                        .collect();
                    assert_eq!(Some(got), want);
                    assert!(verify_sparsifier(&parent, &out, 0).unwrap());
                }
                Err(_) => assert_eq!(want, None),
            }
        }
    }
    assert_eq!(compared, 120);
}
