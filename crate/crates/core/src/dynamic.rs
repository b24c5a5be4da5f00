//! ℓ1 sampling sketches and the insertion/deletion variant of the round loop.
//!
//! An [`L1Sampler`] is a linear sketch of an integer vector `x`. Coordinate `i`
//! gets a hashed uniform `u_i` and survives into levels `0..=L` while
//! `u_i < 2^-j`. Each level is an invertible Bloom lookup table (three rows of
//! cells holding sums of value, index·value, a field fingerprint and
//! tag·value), from which sparse vectors are recovered exactly by peeling. A
//! query decodes the densest recoverable level and returns the survivor that
//! minimises `E_i / |x_i|`, where `E_i = -ln(1 - u_i)` is exponential; the
//! minimiser of that race is coordinate `i` with probability `|x_i| / ||x||_1`.
//! Survivors of level `j` are exactly the coordinates with `E_i` below a level
//! threshold, so the race winner is always visible when the winning key falls
//! below that threshold, which is the typical case.
//!
//! Counters wrap instead of failing on overflow; updates with opposite deltas
//! cancel exactly.

use std::collections::HashSet;

use thiserror::Error;

use crate::graph::{pair_count, pair_from_index, pair_index, Edge, Graph};
use crate::hash::{hash3, mix64, unit};
use crate::spanner::spanner_from_edges;
use crate::sssp::{audit, finish, importance_base, round_tree, Config, SsspError, SsspOutput, TreeStore};
use crate::stream::{EdgeStream, Sign, SpaceLedger, StreamMode};

/// Fractional bits of the fixed-point importances fed to samplers.
pub const FRAC_BITS: u32 = 20;

const P61: u64 = (1 << 61) - 1;
const ROWS: usize = 3;
const WORDS_PER_CELL: u64 = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("coordinate {index} outside dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("sketch counter overflow")]
    Overflow,
    #[error("value {0} does not fit the fixed-point range")]
    FixedPoint(String),
    #[error("invalid sampler parameters: {0}")]
    Params(String),
    #[error("sketches with different shapes or seeds cannot be combined")]
    Incompatible,
}

/// Converts a non-negative importance to fixed point with [`FRAC_BITS`] bits.
pub fn to_fixed(q: f64) -> Result<i64, SamplerError> {
    let x = (q * (1u64 << FRAC_BITS) as f64).round();
    if !(0.0..9.2e18).contains(&x) {
        return Err(SamplerError::FixedPoint(format!("{q}")));
    }
    Ok(x as i64)
}

/// Fixed-point value of a non-negative importance reduced modulo 2^62, so that
/// the insertion and deletion of one edge carry exactly opposite deltas even
/// when the importance is out of range. Agrees with [`to_fixed`] below 2^42.
pub fn to_fixed_wrapping(q: f64) -> i64 {
    const MASK: u64 = (1 << 62) - 1;
    if let Ok(x) = to_fixed(q) {
        return (x as u64 & MASK) as i64;
    }
    let x = (q * (1u64 << FRAC_BITS) as f64).round();
    if !x.is_finite() {
        return 0;
    }
    // x is an integer m · 2^e with a 53-bit mantissa m.
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mant = (bits & ((1 << 52) - 1)) | (1 << 52);
    if exp >= 62 {
        0
    } else {
        ((mant << exp) & MASK) as i64
    }
}

/// Target accuracy of a sampler: output distribution within `eps` of
/// `|x_i|/||x||_1` in total variation, failure probability at most `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerParams {
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
}

impl SamplerParams {
    fn validate(&self) -> Result<(), SamplerError> {
        if self.dim == 0 {
            return Err(SamplerError::Params("dimension must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return Err(SamplerError::Params(format!("eps={} delta={}", self.eps, self.delta)));
        }
        Ok(())
    }

    /// Number of nonzero survivors a level is sized to recover.
    pub fn capacity(&self) -> usize {
        let inv = 1.0 / self.eps;
        ((inv * inv.ln()).ceil() as usize).max(4)
    }

    fn width(&self) -> usize {
        self.capacity()
    }

    /// Levels `0..=L` with `L` the first level at which the expected number of
    /// survivors of a full-support vector drops to half the capacity, and at
    /// least two levels so that a level that fails to peel has a fallback.
    fn levels(&self) -> usize {
        let ratio = 2.0 * self.dim as f64 / self.capacity() as f64;
        (ratio.log2().ceil().max(0.0) as usize + 1).max(2)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Cell {
    count: i64,
    key_sum: i128,
    fingerprint: u64,
    tag_sum: i128,
}

impl Cell {
    fn is_zero(&self) -> bool {
        self.count == 0 && self.key_sum == 0 && self.fingerprint == 0 && self.tag_sum == 0
    }

    fn add(&mut self, index: usize, delta: i64, fp: u64, tag: i64) {
        self.count = self.count.wrapping_add(delta);
        self.key_sum = self.key_sum.wrapping_add((index as i128).wrapping_mul(delta as i128));
        self.tag_sum = self.tag_sum.wrapping_add((tag as i128).wrapping_mul(delta as i128));
        self.fingerprint = add_mod(self.fingerprint, mul_mod(field(delta), fp));
    }

    fn combine(&mut self, other: &Cell) {
        self.count = self.count.wrapping_add(other.count);
        self.key_sum = self.key_sum.wrapping_add(other.key_sum);
        self.tag_sum = self.tag_sum.wrapping_add(other.tag_sum);
        self.fingerprint = add_mod(self.fingerprint, other.fingerprint);
    }
}

fn field(x: i64) -> u64 {
    x.rem_euclid(P61 as i64) as u64
}

fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

fn mul_mod(a: u64, b: u64) -> u64 {
    // 2^61 ≡ 1, so fold the high bits onto the low ones.
    let x = a as u128 * b as u128;
    let folded = (x as u64 & P61) + (x >> 61) as u64;
    add_mod(folded & P61, folded >> 61)
}

/// A sampled coordinate. `value` is the recovered `x_i`; `tag` the recovered
/// per-coordinate payload (the edge weight in the round loop).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sample {
    pub index: usize,
    pub value: i64,
    pub tag: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleOutcome {
    Sampled(Sample),
    Fail,
}

/// Linear ℓ1 sampling sketch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L1Sampler {
    params_dim: usize,
    seed: u64,
    width: usize,
    levels: usize,
    cells: Vec<Cell>,
}

struct CoordHash {
    level: usize,
    cols: [usize; ROWS],
    fp: u64,
}

impl L1Sampler {
    pub fn new(params: SamplerParams, seed: u64) -> Result<Self, SamplerError> {
        params.validate()?;
        let (width, levels) = (params.width(), params.levels());
        Ok(L1Sampler {
            params_dim: params.dim,
            seed,
            width,
            levels,
            cells: vec![Cell::default(); levels * ROWS * width],
        })
    }

    pub fn dim(&self) -> usize {
        self.params_dim
    }

    /// Words held by the sketch (one per cell field, two for 128-bit fields).
    pub fn words(&self) -> u64 {
        self.cells.len() as u64 * WORDS_PER_CELL
    }

    /// Clears all cells and switches to a new seed.
    pub fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.cells.iter_mut().for_each(|c| *c = Cell::default());
    }

    fn race_unit(&self, index: usize) -> u64 {
        hash3(self.seed, index as u64, 0x5eed) >> 11
    }

    fn coord(&self, index: usize) -> CoordHash {
        let bits = self.race_unit(index);
        // u < 2^-j iff the top j of the 53 bits are zero.
        let level = ((bits.leading_zeros() - 11) as usize).min(self.levels - 1);
        let h = hash3(self.seed, index as u64, 0xc01);
        let mut cols = [0; ROWS];
        for (r, c) in cols.iter_mut().enumerate() {
            *c = ((h >> (21 * r)) & 0x1F_FFFF) as usize % self.width;
        }
        let fp = mix64(hash3(self.seed, index as u64, 0xf1)) % (P61 - 1) + 1;
        CoordHash { level, cols, fp }
    }

    fn race_key(&self, index: usize) -> f64 {
        let u = unit(self.race_unit(index) << 11);
        -(-u).ln_1p()
    }

    /// Adds `delta` to `x[index]`. `tag` is summed as `tag · delta`, so a
    /// coordinate whose updates all carry the same tag returns it on recovery.
    pub fn update(&mut self, index: usize, delta: i64, tag: i64) -> Result<(), SamplerError> {
        if index >= self.params_dim {
            return Err(SamplerError::IndexOutOfRange { index, dim: self.params_dim });
        }
        if delta == 0 {
            return Ok(());
        }
        let c = self.coord(index);
        for level in 0..=c.level {
            for (r, &col) in c.cols.iter().enumerate() {
                let at = (level * ROWS + r) * self.width + col;
                self.cells[at].add(index, delta, c.fp, tag);
            }
        }
        Ok(())
    }

    /// Adds another sketch of the same shape and seed; the result sketches `x + y`.
    pub fn combine(&mut self, other: &L1Sampler) -> Result<(), SamplerError> {
        if (self.params_dim, self.seed, self.width, self.levels)
            != (other.params_dim, other.seed, other.width, other.levels)
        {
            return Err(SamplerError::Incompatible);
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.combine(b);
        }
        Ok(())
    }

    /// Recovers all nonzero coordinates surviving into `level`, or `None` if
    /// the level holds too many to peel. `cells` is scratch space.
    fn decode(&self, level: usize, cells: &mut Vec<Cell>) -> Option<Vec<Sample>> {
        let start = level * ROWS * self.width;
        cells.clear();
        cells.extend_from_slice(&self.cells[start..start + ROWS * self.width]);
        let mut out = Vec::new();
        let mut queue: Vec<usize> = (0..cells.len()).filter(|&j| cells[j].count != 0).collect();
        while let Some(at) = queue.pop() {
            let Some(s) = self.pure(&cells[at], at) else { continue };
            let c = self.coord(s.index);
            for (r, &col) in c.cols.iter().enumerate() {
                let j = r * self.width + col;
                cells[j].add(s.index, s.value.wrapping_neg(), c.fp, s.tag);
                queue.push(j);
            }
            out.push(s);
        }
        if !cells.iter().all(Cell::is_zero) {
            return None;
        }
        out.sort_unstable_by_key(|s| s.index);
        out.windows(2).all(|w| w[0].index != w[1].index).then_some(out)
    }

    fn pure(&self, cell: &Cell, at: usize) -> Option<Sample> {
        if cell.count == 0 {
            return None;
        }
        let index = match (i64::try_from(cell.key_sum), cell.count) {
            (Ok(key), count) if count != i64::MIN => {
                if key % count != 0 {
                    return None;
                }
                key / count
            }
            _ => {
                let count = cell.count as i128;
                if cell.key_sum % count != 0 {
                    return None;
                }
                i64::try_from(cell.key_sum / count).ok()?
            }
        };
        if index < 0 || index as u64 >= self.params_dim as u64 {
            return None;
        }
        let index = index as usize;
        let c = self.coord(index);
        let (row, col) = (at / self.width, at % self.width);
        if c.cols[row] != col || mul_mod(field(cell.count), c.fp) != cell.fingerprint {
            return None;
        }
        let count = cell.count as i128;
        if cell.tag_sum % count != 0 {
            return None;
        }
        let tag = i64::try_from(cell.tag_sum / count).ok()?;
        Some(Sample { index, value: cell.count, tag })
    }

    /// Draws one coordinate with probability close to `|x_i| / ||x||_1`.
    pub fn query(&self) -> SampleOutcome {
        let mut scratch = Vec::with_capacity(ROWS * self.width);
        for level in 0..self.levels {
            let Some(found) = self.decode(level, &mut scratch) else { continue };
            return found
                .into_iter()
                .map(|s| (self.race_key(s.index) / (s.value as f64).abs(), s))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(SampleOutcome::Fail, |(_, s)| SampleOutcome::Sampled(s));
        }
        SampleOutcome::Fail
    }
}

/// Size and accuracy of the per-round sampler bank. Unset fields take the
/// analysed values: `⌈20 ε⁻¹ k n^{1+1/k} log₂ n⌉` samplers, each an
/// `(ε/10, ε/10)` sampler over all vertex pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BankConfig {
    pub size: Option<usize>,
    pub sampler_eps: Option<f64>,
}

/// `⌈20 ε⁻¹ k n^{1+1/k} log₂ n⌉`.
pub fn bank_size(n: usize, k: u32, eps: f64) -> usize {
    let nf = n as f64;
    (20.0 / eps * k as f64 * nf.powf(1.0 + 1.0 / k as f64) * nf.log2()).ceil() as usize
}

/// Independent samplers sharing one shape.
pub struct SamplerBank {
    samplers: Vec<L1Sampler>,
}

impl SamplerBank {
    pub fn new(params: SamplerParams, size: usize, seed: u64) -> Result<Self, SamplerError> {
        let proto = L1Sampler::new(params, 0)?;
        let samplers = (0..size)
            .map(|i| {
                let mut s = proto.clone();
                s.seed = hash3(seed, i as u64, 0xba4c);
                s
            })
            .collect();
        Ok(SamplerBank { samplers })
    }

    pub fn len(&self) -> usize {
        self.samplers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samplers.is_empty()
    }

    pub fn words(&self) -> u64 {
        self.samplers.iter().map(L1Sampler::words).sum()
    }

    /// Clears every sampler and reseeds the bank.
    pub fn reset(&mut self, seed: u64) {
        for (i, s) in self.samplers.iter_mut().enumerate() {
            s.reset(hash3(seed, i as u64, 0xba4c));
        }
    }

    pub fn update(&mut self, index: usize, delta: i64, tag: i64) -> Result<(), SamplerError> {
        self.samplers.iter_mut().try_for_each(|s| s.update(index, delta, tag))
    }

    /// Applies a block of `(index, delta, tag)` updates, sampler by sampler so
    /// that each sketch stays in cache. Same result as calling
    /// [`SamplerBank::update`] on each in order.
    pub fn update_block(&mut self, block: &[(usize, i64, i64)]) -> Result<(), SamplerError> {
        let Some(first) = self.samplers.first() else { return Ok(()) };
        let dim = first.dim();
        if let Some(&(index, _, _)) = block.iter().find(|u| u.0 >= dim) {
            return Err(SamplerError::IndexOutOfRange { index, dim });
        }
        for s in &mut self.samplers {
            for &(index, delta, tag) in block {
                s.update(index, delta, tag)?;
            }
        }
        Ok(())
    }

    /// Outcomes of all samplers, in bank order.
    pub fn query(&self) -> Vec<SampleOutcome> {
        self.samplers.iter().map(L1Sampler::query).collect()
    }
}

/// Updates buffered between bank sweeps in [`dynamic_sample_round`].
pub const UPDATE_BLOCK: usize = 4096;

/// One round of dynamic sampling: a single pass feeds `x_e = importance(e)` for
/// every vertex pair into the bank (insertions add, deletions subtract), then
/// every sampler is queried. Failed samplers contribute nothing; repeated
/// pairs are kept once. Updates reach the bank in blocks of up to
/// [`UPDATE_BLOCK`], three words each, charged to `ledger`.
///
/// A returned sample is checked against the importance its edge has under the
/// stored trees: an importance beyond the fixed-point range is an overflow
/// error, and a sample whose recovered value disagrees is dropped as a failure.
pub fn dynamic_sample_round(
    stream: &EdgeStream,
    store: &TreeStore,
    k: u32,
    bank: &mut SamplerBank,
    ledger: &mut SpaceLedger,
) -> Result<Vec<Edge>, SsspError> {
    let n = stream.n();
    let base = importance_base(n, k);
    let err = |e: SamplerError| SsspError::Sampler(e.to_string());
    let buffer_words = 3 * stream.len().min(UPDATE_BLOCK) as u64;
    ledger.charge(buffer_words);
    let mut block = Vec::with_capacity(stream.len().min(UPDATE_BLOCK));
    for e in stream.begin_pass()? {
        let q = to_fixed_wrapping(base.powi(store.fail_count(e.u, e.v, e.w) as i32));
        let tag = i64::try_from(e.w).map_err(|_| SsspError::Sampler("weight too large".into()))?;
        let delta = if e.sign == Sign::Insert { q } else { q.wrapping_neg() };
        block.push((pair_index(n, e.u, e.v), delta, tag));
        if block.len() == UPDATE_BLOCK {
            bank.update_block(&block).map_err(err)?;
            block.clear();
        }
    }
    bank.update_block(&block).map_err(err)?;
    ledger.release(buffer_words);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for o in bank.query() {
        let SampleOutcome::Sampled(s) = o else { continue };
        if s.tag < 0 || !seen.insert(s.index) {
            continue;
        }
        let (u, v) = pair_from_index(n, s.index);
        let w = s.tag as u64;
        let expected = to_fixed(base.powi(store.fail_count(u, v, w) as i32)).map_err(|_| err(SamplerError::Overflow))?;
        if s.value == expected {
            out.push(Edge { u, v, w });
        } else {
            seen.remove(&s.index);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Round loop over an insertion/deletion stream: one pass per round, sampling
/// with a bank of ℓ1 samplers instead of two Bernoulli passes.
///
/// The spanner is built from the materialized final graph, which is not a
/// streaming computation; the output marks it `spanner_reference_only`.
pub fn approx_sssp_dynamic(
    stream: &EdgeStream,
    cfg: &Config,
    bank_cfg: &BankConfig,
) -> Result<SsspOutput, SsspError> {
    if stream.mode() != StreamMode::Dynamic {
        return Err(SsspError::Config("dynamic sampling needs a dynamic stream".into()));
    }
    let n = stream.n();
    if cfg.source >= n {
        return Err(SsspError::Config(format!("source {} out of range", cfg.source)));
    }
    let final_edges: Vec<Edge> = stream
        .materialize_final_graph()?
        .into_iter()
        .map(|(u, v, w)| Edge { u, v, w })
        .collect();
    let final_graph = Graph::new(n, final_edges)?;
    let mut spanner = spanner_from_edges(n, final_graph.edges(), cfg.k, cfg.eps)?;
    spanner.reference_only = true;
    let start_passes = stream.pass_count();
    let mut ledger = SpaceLedger::new();
    ledger.charge(2 * spanner.graph.m() as u64);
    let params = SamplerParams {
        dim: pair_count(n).max(1),
        eps: bank_cfg.sampler_eps.unwrap_or(cfg.eps / 10.0),
        delta: bank_cfg.sampler_eps.unwrap_or(cfg.eps / 10.0),
    };
    let size = bank_cfg.size.unwrap_or_else(|| bank_size(n, cfg.k, cfg.eps));
    let err = |e: SamplerError| SsspError::Sampler(e.to_string());
    let mut bank = SamplerBank::new(params, size, 0).map_err(err)?;
    let mut store = TreeStore::new();
    let mut sizes = Vec::with_capacity(cfg.rounds as usize);
    for round in 0..cfg.rounds {
        bank.reset(hash3(cfg.seed, round as u64, 0xd1a));
        ledger.charge(bank.words());
        let sample = dynamic_sample_round(stream, &store, cfg.k, &mut bank, &mut ledger)?;
        ledger.release(bank.words());
        ledger.charge(2 * sample.len() as u64);
        sizes.push(sample.len());
        round_tree(n, cfg.source, &spanner.graph, &sample, &mut store, &mut ledger);
        ledger.release(2 * sample.len() as u64);
    }
    let a = cfg
        .audit
        .then(|| audit(final_graph.edges().iter().map(|e| (e.u, e.v, e.w)), &store, n, cfg.k));
    let mut out = finish(n, final_graph.m(), cfg, spanner, store, &mut ledger, a);
    out.metrics.passes = stream.pass_count() - start_passes;
    out.metrics.sample_sizes = sizes;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize) -> SamplerParams {
        SamplerParams { dim, eps: 0.1, delta: 0.1 }
    }

    fn sketch(x: &[i64], seed: u64) -> L1Sampler {
        let mut s = L1Sampler::new(params(x.len()), seed).unwrap();
        for (i, &v) in x.iter().enumerate() {
            s.update(i, v, 0).unwrap();
        }
        s
    }

    #[test]
    fn fixed_point_conversion() {
        assert_eq!(to_fixed(1.0).unwrap(), 1 << 20);
        assert_eq!(to_fixed(0.5).unwrap(), 1 << 19);
        assert!(to_fixed(-1.0).is_err());
        assert!(to_fixed(1e300).is_err());
    }

    #[test]
    fn huge_updates_that_cancel_leave_no_trace() {
        let mut s = sketch(&[0, 3, 0, 0], 4);
        let big = to_fixed_wrapping(5f64.powi(60));
        s.update(2, big, 9).unwrap();
        s.update(2, big.wrapping_neg(), 9).unwrap();
        s.update(0, i64::MAX, 1).unwrap();
        s.update(0, i64::MAX, 1).unwrap();
        s.update(0, -i64::MAX, 1).unwrap();
        s.update(0, -i64::MAX, 1).unwrap();
        assert_eq!(s, sketch(&[0, 3, 0, 0], 4));
        assert_eq!(to_fixed_wrapping(2.0), 2 << 20);
        assert_eq!(to_fixed_wrapping(2f64.powi(50)), 0);
        assert_eq!(to_fixed_wrapping(2f64.powi(41)), 1 << 61);
        assert_eq!(to_fixed_wrapping(2f64.powi(42)), 0);
        assert_eq!(to_fixed_wrapping(3.0 * 2f64.powi(41)), 1 << 61);
    }

    #[test]
    fn block_updates_match_single_updates() {
        let params = SamplerParams { dim: 30, eps: 0.2, delta: 0.2 };
        let mut a = SamplerBank::new(params, 5, 3).unwrap();
        let mut b = SamplerBank::new(params, 5, 3).unwrap();
        let block: Vec<(usize, i64, i64)> = (0..40).map(|i| (i * 7 % 30, (i as i64 % 5) - 2, i as i64)).collect();
        for &(i, d, t) in &block {
            a.update(i, d, t).unwrap();
        }
        b.update_block(&block).unwrap();
        assert_eq!(a.query(), b.query());
        assert!(a.samplers.iter().zip(&b.samplers).all(|(x, y)| x == y));
        assert!(matches!(b.update_block(&[(30, 1, 0)]), Err(SamplerError::IndexOutOfRange { .. })));
    }

    #[test]
    fn mersenne_product_matches_plain_modulo() {
        let mut x = 7u64;
        for _ in 0..10_000 {
            x = mix64(x);
            let (a, b) = (x % P61, mix64(x ^ 1) % P61);
            assert_eq!(mul_mod(a, b), ((a as u128 * b as u128) % P61 as u128) as u64);
        }
        assert_eq!(mul_mod(P61 - 1, P61 - 1), 1);
        assert_eq!(mul_mod(0, P61 - 1), 0);
    }

    #[test]
    fn zero_vector_fails() {
        assert_eq!(sketch(&[0; 50], 1).query(), SampleOutcome::Fail);
        let mut s = sketch(&[0, 4, 0], 2);
        s.update(1, -4, 0).unwrap();
        assert_eq!(s.query(), SampleOutcome::Fail);
    }

    #[test]
    fn zero_coordinates_are_never_returned() {
        for seed in 0..2000 {
            match sketch(&[0, 3, 1], seed).query() {
                SampleOutcome::Sampled(s) => assert!(s.index == 1 || s.index == 2),
                SampleOutcome::Fail => {}
            }
        }
    }

    #[test]
    fn single_nonzero_coordinate_is_always_returned() {
        let mut x = vec![0i64; 500];
        x[321] = 17;
        for seed in 0..500 {
            match sketch(&x, seed).query() {
                SampleOutcome::Sampled(s) => assert_eq!((s.index, s.value), (321, 17)),
                SampleOutcome::Fail => panic!("seed {seed} failed on a 1-sparse vector"),
            }
        }
    }

    #[test]
    fn sketches_are_linear() {
        let x: Vec<i64> = (0..300).map(|i| (i % 7) as i64 - 2).collect();
        let y: Vec<i64> = (0..300).map(|i| (i % 5) as i64).collect();
        let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let mut a = sketch(&x, 9);
        a.combine(&sketch(&y, 9)).unwrap();
        assert_eq!(a, sketch(&sum, 9));
        assert_eq!(a.combine(&sketch(&y, 10)), Err(SamplerError::Incompatible));
    }

    #[test]
    fn tags_are_recovered() {
        let mut s = L1Sampler::new(params(10), 3).unwrap();
        s.update(4, 5, 77).unwrap();
        s.update(7, 2, 11).unwrap();
        s.update(7, -2, 11).unwrap();
        assert_eq!(s.query(), SampleOutcome::Sampled(Sample { index: 4, value: 5, tag: 77 }));
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = L1Sampler::new(params(10), 3).unwrap();
        assert!(matches!(s.update(10, 1, 0), Err(SamplerError::IndexOutOfRange { .. })));
        assert!(L1Sampler::new(SamplerParams { dim: 0, eps: 0.1, delta: 0.1 }, 0).is_err());
        assert!(L1Sampler::new(SamplerParams { dim: 5, eps: 1.5, delta: 0.1 }, 0).is_err());
    }

    #[test]
    fn sampling_frequencies_follow_magnitudes() {
        let x = [1i64, 0, -2, 3, 0, 4];
        let mut counts = [0usize; 6];
        let trials = 20_000;
        let mut fails = 0;
        for seed in 0..trials {
            match sketch(&x, seed).query() {
                SampleOutcome::Sampled(s) => counts[s.index] += 1,
                SampleOutcome::Fail => fails += 1,
            }
        }
        assert!(fails < trials / 100, "{fails} failures");
        for (i, &c) in counts.iter().enumerate() {
            let p = x[i].abs() as f64 / 10.0;
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((c as f64 / trials as f64 - p).abs() <= 5.0 * sd + 1e-12, "coord {i}: {c}");
        }
    }

    #[test]
    fn bank_size_formula() {
        assert_eq!(bank_size(16, 2, 0.5), 20480);
    }

    #[test]
    fn dynamic_round_loop_uses_one_pass_per_round() {
        let g = crate::generators::random_connected_graph(10, 20, 9, 1);
        let s = crate::generators::dynamic_stream(&g, 0.2, 9, 2);
        let cfg = Config::new(10, 2, 0.5, 3, 0).unwrap().with_rounds(6);
        let bank = BankConfig { size: Some(200), sampler_eps: None };
        let mut out = approx_sssp_dynamic(&s, &cfg, &bank).unwrap();
        assert_eq!(out.metrics.passes, 6);
        assert!(out.metrics.spanner_reference_only);
        assert!(out.evaluate(&g).unwrap() <= 1.5);
    }
}
