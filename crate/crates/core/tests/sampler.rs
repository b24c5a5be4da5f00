//! Monte Carlo checks of the ℓ1 sampler and the dynamic sampling round.

use std::collections::HashMap;

use stream_sssp::dynamic::{dynamic_sample_round, L1Sampler, SampleOutcome, SamplerBank, SamplerParams};
use stream_sssp::graph::{pair_index, Edge, Graph};
use stream_sssp::sssp::TreeStore;
use stream_sssp::stream::{EdgeStream, EdgeUpdate, SpaceLedger, StreamMode};

#[test]
fn frequencies_follow_magnitudes_on_a_small_vector() {
    // x = (0, 3, 1): index 1 should come back with probability 3/4.
    let eps = 0.1;
    let params = SamplerParams { dim: 3, eps, delta: eps };
    let trials = 100_000;
    let (mut ones, mut successes) = (0u32, 0u32);
    let mut s = L1Sampler::new(params, 0).unwrap();
    for seed in 0..trials {
        s.reset(seed);
        s.update(1, 3, 0).unwrap();
        s.update(2, 1, 0).unwrap();
        match s.query() {
            SampleOutcome::Sampled(x) => {
                assert_ne!(x.index, 0);
                successes += 1;
                ones += (x.index == 1) as u32;
            }
            SampleOutcome::Fail => {}
        }
    }
    let freq = ones as f64 / successes as f64;
    let sigma = (0.75 * 0.25 / successes as f64).sqrt();
    assert!((freq - 0.75).abs() <= eps * 0.75 + 4.0 * sigma, "frequency {freq}");
    assert!(1.0 - successes as f64 / trials as f64 <= eps + 4.0 * (eps * (1.0 - eps) / trials as f64).sqrt());
}

fn stream_of(n: usize, ups: Vec<EdgeUpdate>) -> EdgeStream {
    EdgeStream::from_updates(n, StreamMode::Dynamic, ups).unwrap()
}

#[test]
fn uniform_importances_give_even_multiplicities() {
    // 20 present edges on 8 vertices, a bank of 1000 samplers, ε = 0.5.
    let n = 8;
    let eps = 0.5;
    let lambda = 1000;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).take(20).collect();
    let ups = pairs.iter().map(|&(u, v)| EdgeUpdate::insert(u, v, 1 + (u + v) as u64)).collect();
    let stream = stream_of(n, ups);
    let params = SamplerParams { dim: 28, eps: eps / 10.0, delta: eps / 10.0 };
    let store = TreeStore::new();
    let banks = 20;
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for seed in 0..banks {
        let mut bank = SamplerBank::new(params, lambda, seed).unwrap();
        let mut ledger = SpaceLedger::new();
        // The round dedupes, so count raw bank outcomes instead.
        let _ = dynamic_sample_round(&stream, &store, 2, &mut bank, &mut ledger).unwrap();
        for o in bank.query() {
            if let SampleOutcome::Sampled(s) = o {
                let e = pairs.iter().find(|&&(u, v)| pair_index(n, u, v) == s.index).expect("present edge");
                *counts.entry(*e).or_default() += 1;
            }
        }
    }
    let per_bank = lambda as f64 / 20.0;
    let sigma = (per_bank * (1.0 - 1.0 / 20.0) / banks as f64).sqrt();
    for e in &pairs {
        let mean = counts.get(e).copied().unwrap_or(0) as f64 / banks as f64;
        assert!(
            (mean - per_bank).abs() <= per_bank * eps / 10.0 + 4.0 * sigma,
            "edge {e:?}: mean multiplicity {mean}, want {per_bank}"
        );
    }
}

#[test]
fn deleted_edges_never_sampled() {
    let n = 6;
    let mut ups = vec![EdgeUpdate::insert(0, 1, 4), EdgeUpdate::insert(2, 3, 1), EdgeUpdate::insert(1, 4, 2)];
    ups.push(EdgeUpdate::delete(2, 3, 1));
    ups.push(EdgeUpdate::insert(3, 5, 9));
    let stream = stream_of(n, ups);
    let params = SamplerParams { dim: 15, eps: 0.1, delta: 0.1 };
    let store = TreeStore::new();
    for seed in 0..1000 {
        let mut bank = SamplerBank::new(params, 8, seed).unwrap();
        let f = dynamic_sample_round(&stream, &store, 2, &mut bank, &mut SpaceLedger::new()).unwrap();
        assert!(f.iter().all(|e| (e.u, e.v) != (2, 3)));
        let g = Graph::new(n, [Edge::new(0, 1, 4), Edge::new(1, 4, 2), Edge::new(3, 5, 9)]).unwrap();
        assert!(f.iter().all(|e| g.weight(e.u, e.v) == Some(e.w)));
    }
}

#[test]
fn fully_cancelled_stream_samples_nothing() {
    let ups = vec![EdgeUpdate::insert(0, 1, 4), EdgeUpdate::delete(0, 1, 4)];
    let stream = stream_of(3, ups);
    let params = SamplerParams { dim: 3, eps: 0.1, delta: 0.1 };
    let mut bank = SamplerBank::new(params, 50, 1).unwrap();
    let f = dynamic_sample_round(&stream, &TreeStore::new(), 1, &mut bank, &mut SpaceLedger::new()).unwrap();
    assert!(f.is_empty());
    assert!(bank.query().iter().all(|o| *o == SampleOutcome::Fail));
}
