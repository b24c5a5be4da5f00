//! Multi-pass streaming (1+ε)-approximate single-source shortest paths.
//!
//! The pipeline reads an edge stream several times, keeps a sparse spanner plus a
//! small sample of "important" edges per round, and reweights importances
//! multiplicatively whenever a stored shortest-path tree stretches an edge. The
//! union of the stored trees is an ε-approximate distance preserver for the source.
//!
//! Module map:
//! - [`stream`]: the pass-counting edge stream and the word-level space ledger.
//! - [`graph`]: in-memory graphs, Dijkstra shortest-path trees, tree distances.
//! - [`spanner`]: single-pass 2k-spanner with bucketed greedy admission.
//! - [`sssp`]: the multiplicative-weights round loop for insertion-only streams.
//! - [`dynamic`]: ℓ1 samplers and the insertion/deletion variant of the round loop.
//! - [`derand`]: smoothness sparsifiers, merge-and-reduce and the deterministic variant.
//! - [`hard_instances`]: layered pointer-chasing instances and rook-set utilities.
//! - [`generators`]: random graph and stream families used by tests and benches.

pub mod derand;
pub mod dynamic;
pub mod generators;
pub mod graph;
pub mod hard_instances;
mod hash;
pub mod spanner;
pub mod sssp;
pub mod stream;
