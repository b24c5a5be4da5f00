//! `stream-sssp`: generate streams, run the approximate shortest-path pipeline,
//! and run the sampler, sparsifier and benchmark suites. Every output goes
//! under the directory given by `--out`; identical flags give identical files.
//!
//! Exit codes: 0 on success, 2 on invalid flags or input, 1 on runtime failure.
//! `STREAM_SSSP_THREADS` caps the worker pool used by the Monte Carlo suites.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use stream_sssp::derand::{sample_sparsifier_scaled, verify_sparsifier, ImportanceGraph, SparsifierError};
use stream_sssp::dynamic::{approx_sssp_dynamic, BankConfig, L1Sampler, SampleOutcome, SamplerError, SamplerParams};
use stream_sssp::generators::{dynamic_stream, random_connected_graph, rng, shuffled_stream, sorted_stream};
use stream_sssp::graph::{pair_count, Edge, Graph};
use stream_sssp::hard_instances::{collection_graph, lemma_params, sample_or_ppc, InstanceError};
use stream_sssp::sssp::{approx_sssp, Config, Metrics, SsspError, SsspOutput};
use stream_sssp::stream::{EdgeStream, StreamError, StreamMode};

#[derive(Parser)]
#[command(name = "stream-sssp", version, about = "Multi-pass streaming approximate shortest paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random or hard-instance stream plus a JSON sidecar.
    Gen(GenArgs),
    /// Run the pipeline on a stream file and write its metrics.
    Sssp(SsspArgs),
    /// Monte Carlo check of the l1 sampler's output distribution.
    SamplerTest(SamplerArgs),
    /// Exhaustive verification of sampled sparsifiers on small graphs.
    SparsifierTest(SparsifierArgs),
    /// Run the pipeline over a grid of random graphs.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum HardKind {
    /// t pointer-chasing instances, at most one planted.
    Orppc,
    /// A single pointer-chasing instance.
    Ppc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Insert,
    Dynamic,
}

impl From<ModeArg> for StreamMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Insert => StreamMode::InsertOnly,
            ModeArg::Dynamic => StreamMode::Dynamic,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Generate a layered hard instance instead of a random graph.
    #[arg(long, value_enum)]
    hard: Option<HardKind>,
    /// Plant a meeting pointer (1) or not (0).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    b: u8,
    /// Vertex count; for hard instances it sizes t, d, w together with --p and --alpha.
    #[arg(long)]
    n: Option<usize>,
    /// Pass bound the hard instance targets.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    /// Edge count of a random graph.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 100)]
    max_weight: u64,
    /// Fraction of inserted edges that are later deleted; nonzero gives a dynamic stream.
    #[arg(long, default_value_t = 0.0)]
    deletions: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SsspArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    source: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Expected stream mode; defaults to the one in the file header.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Replace sampling by deterministic merge-and-reduce (insertion-only streams).
    #[arg(long)]
    deterministic: bool,
    /// Leaf segment length for --deterministic.
    #[arg(long, default_value_t = 6)]
    segment_len: usize,
    /// Multiplier on the sampling coefficient.
    #[arg(long, default_value_t = 1.0)]
    sampling_scale: f64,
    /// Override the number of rounds.
    #[arg(long)]
    rounds: Option<u32>,
    /// Samplers per round for dynamic streams.
    #[arg(long)]
    bank_size: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SamplerArgs {
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Failure probability target; defaults to --eps.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SparsifierArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Multiplier on the sampling coefficient.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "64,256")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<u32>,
    /// Seeds per grid point.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Edges per vertex.
    #[arg(long, default_value_t = 4)]
    edge_factor: usize,
    #[arg(long, default_value_t = 100)]
    max_weight: u64,
    #[arg(long, default_value_t = 1.0)]
    sampling_scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<StreamError> for Failure {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Io(e) => Failure::Runtime(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<SsspError> for Failure {
    fn from(e: SsspError) -> Self {
        match e {
            SsspError::Config(_) | SsspError::Argument(_) => Failure::Invalid(e.to_string()),
            SsspError::Stream(s) => s.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<SparsifierError> for Failure {
    fn from(e: SparsifierError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on unknown or malformed flags.
    let cli = Cli::parse();
    let result = init_pool().and_then(|()| match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Sssp(a) => sssp(&a),
        Command::SamplerTest(a) => sampler_test(&a),
        Command::SparsifierTest(a) => sparsifier_test(&a),
        Command::Bench(a) => bench(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn init_pool() -> Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("STREAM_SSSP_THREADS") {
        let threads = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| invalid(format!("STREAM_SSSP_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build_global().map_err(|e| Failure::Runtime(e.to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), Failure> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Per-trial seed: a splitmix64 step over the run seed and the trial index.
fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Serialize)]
struct HardSidecar {
    b: u8,
    t: usize,
    d: usize,
    w: usize,
    i_star: Option<usize>,
    seed: u64,
    n: usize,
    m: usize,
    source: usize,
    target: usize,
}

#[derive(Serialize)]
struct RandomSidecar {
    n: usize,
    m: usize,
    max_weight: u64,
    deletions: f64,
    updates: usize,
    seed: u64,
}

fn gen(a: &GenArgs) -> Result<(), Failure> {
    let out = &a.out;
    match a.hard {
        Some(kind) => {
            let (t, d, w) = match (a.t, a.d, a.w, a.n, a.p) {
                (Some(t), Some(d), Some(w), _, _) => (t, d, w),
                (None, None, None, Some(n), Some(p)) => lemma_params(n, p, a.alpha)?,
                _ => return Err(invalid("hard instances need either --n and --p, or all of --t --d --w")),
            };
            let t = match kind {
                HardKind::Orppc => t,
                HardKind::Ppc => 1,
            };
            if t == 0 || d == 0 || w == 0 {
                return Err(invalid(format!("degenerate parameters t={t} d={d} w={w}")));
            }
            let inst = sample_or_ppc(a.b == 1, t, d, w, a.seed)?;
            let g = collection_graph(&inst)?;
            let mut f = create(out, "graph.stream")?;
            sorted_stream(&g).write_to(&mut f)?;
            f.flush()?;
            let side = HardSidecar {
                b: a.b,
                t,
                d,
                w,
                i_star: inst.i_star,
                seed: a.seed,
                n: g.n(),
                m: g.m(),
                source: 0,
                target: (2 * d - 1) * w,
            };
            write_json(out, "graph.json", &side)
        }
        None => {
            let (n, m) = match (a.n, a.m) {
                (Some(n), Some(m)) => (n, m),
                _ => return Err(invalid("random graphs need --n and --m (or pass --hard)")),
            };
            if n < 2 || m + 1 < n || m > pair_count(n) {
                return Err(invalid(format!("need n >= 2 and n-1 <= m <= n(n-1)/2, got n={n} m={m}")));
            }
            if a.max_weight == 0 || a.max_weight > stream_sssp::stream::MAX_WEIGHT {
                return Err(invalid(format!("--max-weight must lie in [1, 2^40], got {}", a.max_weight)));
            }
            if !(0.0..1.0).contains(&a.deletions) {
                return Err(invalid(format!("--deletions must lie in [0, 1), got {}", a.deletions)));
            }
            let g = random_connected_graph(n, m, a.max_weight, a.seed);
            let stream = if a.deletions > 0.0 {
                dynamic_stream(&g, a.deletions, a.max_weight, trial_seed(a.seed, 1))
            } else {
                shuffled_stream(&g, trial_seed(a.seed, 1))
            };
            let mut f = create(out, "graph.stream")?;
            stream.write_to(&mut f)?;
            f.flush()?;
            let side = RandomSidecar {
                n,
                m,
                max_weight: a.max_weight,
                deletions: a.deletions,
                updates: stream.len(),
                seed: a.seed,
            };
            write_json(out, "graph.json", &side)
        }
    }
}

fn final_graph(stream: &EdgeStream) -> Result<Graph, Failure> {
    let edges = stream.materialize_final_graph()?;
    Graph::new(stream.n(), edges.into_iter().map(|(u, v, w)| Edge::new(u, v, w))).map_err(|e| invalid(e.to_string()))
}

fn sssp(a: &SsspArgs) -> Result<(), Failure> {
    let stream = match a.mode {
        Some(m) => EdgeStream::open_as(&a.input, m.into())?,
        None => EdgeStream::open(&a.input)?,
    };
    let n = stream.n();
    let mut cfg = Config::new(n, a.k, a.eps, a.seed, a.source)?;
    if !(a.sampling_scale > 0.0) {
        return Err(invalid(format!("--sampling-scale must be positive, got {}", a.sampling_scale)));
    }
    cfg = cfg.with_sampling_scale(a.sampling_scale);
    if let Some(r) = a.rounds {
        cfg = cfg.with_rounds(r);
    }
    let dynamic = stream.mode() == StreamMode::Dynamic;
    let (mut out, tag): (SsspOutput, &str) = if a.deterministic {
        if dynamic {
            return Err(invalid("--deterministic needs an insertion-only stream"));
        }
        if a.segment_len == 0 {
            return Err(invalid("--segment-len must be positive"));
        }
        (stream_sssp::derand::approx_sssp_derandomized(&stream, &cfg, a.segment_len)?, "det")
    } else if dynamic {
        let bank = BankConfig { size: a.bank_size, sampler_eps: None };
        (approx_sssp_dynamic(&stream, &cfg, &bank)?, "dyn")
    } else {
        (approx_sssp(&stream, &cfg)?, "ins")
    };
    out.evaluate(&final_graph(&stream)?);
    out.metrics.run_id = format!("{tag}-n{n}-k{}-eps{}-seed{}", a.k, a.eps, a.seed);

    let mut f = create(&a.out, "metrics.csv")?;
    writeln!(f, "{}", Metrics::CSV_HEADER)?;
    writeln!(f, "{}", out.metrics.csv_row())?;
    f.flush()?;
    let mut f = create(&a.out, "distances.csv")?;
    writeln!(f, "vertex,distance")?;
    for v in 0..n {
        match out.distance(v).get() {
            Some(d) => writeln!(f, "{v},{d}")?,
            None => writeln!(f, "{v},")?,
        }
    }
    f.flush()?;
    println!("{}", Metrics::CSV_HEADER);
    println!("{}", out.metrics.csv_row());
    Ok(())
}

/// Trials run in this many contiguous chunks, each on its own sampler.
const CHUNKS: u64 = 64;

fn sampler_test(a: &SamplerArgs) -> Result<(), Failure> {
    let delta = a.delta.unwrap_or(a.eps);
    let params = SamplerParams { dim: a.dim, eps: a.eps, delta };
    L1Sampler::new(params, 0)?;
    if a.trials == 0 {
        return Err(invalid("--trials must be positive"));
    }
    // Every fifth coordinate is inserted and then cancelled.
    let mut r = rng(a.seed);
    let x: Vec<i64> = (0..a.dim).map(|_| r.gen_range(1..=100)).collect();
    let live: Vec<bool> = (0..a.dim).map(|i| i % 5 != 0).collect();
    let chunk = a.trials.div_ceil(CHUNKS);
    let parts: Vec<(Vec<u64>, u64)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| -> Result<(Vec<u64>, u64), SamplerError> {
            let mut s = L1Sampler::new(params, 0)?;
            let mut counts = vec![0u64; a.dim];
            let mut fails = 0;
            for t in c * chunk..((c + 1) * chunk).min(a.trials) {
                s.reset(trial_seed(a.seed, t));
                for (i, &v) in x.iter().enumerate() {
                    s.update(i, v, 0)?;
                    if !live[i] {
                        s.update(i, -v, 0)?;
                    }
                }
                match s.query() {
                    SampleOutcome::Sampled(hit) => counts[hit.index] += 1,
                    SampleOutcome::Fail => fails += 1,
                }
            }
            Ok((counts, fails))
        })
        .collect::<Result<_, _>>()?;
    let mut counts = vec![0u64; a.dim];
    let mut fails = 0;
    for (c, f) in parts {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        fails += f;
    }
    let successes = a.trials - fails;
    let norm: i64 = x.iter().zip(&live).filter(|(_, &l)| l).map(|(v, _)| v).sum();
    let tv = if successes == 0 {
        1.0
    } else {
        0.5 * (0..a.dim)
            .map(|i| {
                let want = if live[i] { x[i] as f64 / norm as f64 } else { 0.0 };
                (counts[i] as f64 / successes as f64 - want).abs()
            })
            .sum::<f64>()
    };
    let dead_hits: u64 = (0..a.dim).filter(|&i| !live[i]).map(|i| counts[i]).sum();
    let fail_rate = fails as f64 / a.trials as f64;
    let mut f = create(&a.out, "sampler.csv")?;
    let header = "dim,eps,delta,trials,successes,fail_rate,tv_distance,cancelled_hits";
    let row = format!("{},{},{},{},{},{:.6},{:.6},{}", a.dim, a.eps, delta, a.trials, successes, fail_rate, tv, dead_hits);
    writeln!(f, "{header}\n{row}")?;
    f.flush()?;
    println!("{header}\n{row}");
    Ok(())
}

fn sparsifier_test(a: &SparsifierArgs) -> Result<(), Failure> {
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(invalid(format!("--eps must lie in (0, 1), got {}", a.eps)));
    }
    if !(a.scale > 0.0) {
        return Err(invalid(format!("--scale must be positive, got {}", a.scale)));
    }
    let results: Vec<(bool, usize, usize)> = (0..a.trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, usize, usize), SparsifierError> {
            let seed = trial_seed(a.seed, t);
            let mut r = rng(seed);
            let n = r.gen_range(3..=7usize);
            let m = r.gen_range(n - 1..=pair_count(n).min(12));
            let g = random_connected_graph(n, m, 20, seed);
            let q = (0..g.m()).map(|_| r.gen_range(0.5..10.0)).collect();
            let parent = ImportanceGraph::new(g, q)?;
            let cand = sample_sparsifier_scaled(&parent, a.eps, seed, a.scale)?;
            let kept = cand.sub.graph.m();
            Ok((verify_sparsifier(&parent, &cand, 0)?, parent.graph.m(), kept))
        })
        .collect::<Result<_, _>>()?;
    let verified = results.iter().filter(|r| r.0).count();
    let edges: usize = results.iter().map(|r| r.1).sum();
    let kept: usize = results.iter().map(|r| r.2).sum();
    let rate = if a.trials == 0 { 0.0 } else { verified as f64 / a.trials as f64 };
    let keep_frac = if edges == 0 { 0.0 } else { kept as f64 / edges as f64 };
    let mut f = create(&a.out, "sparsifier.csv")?;
    let header = "trials,eps,scale,verified,rate,kept_fraction";
    let row = format!("{},{},{},{},{:.6},{:.6}", a.trials, a.eps, a.scale, verified, rate, keep_frac);
    writeln!(f, "{header}\n{row}")?;
    f.flush()?;
    println!("{header}\n{row}");
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<(), Failure> {
    let mut grid = Vec::new();
    for &n in &a.n {
        for &eps in &a.eps {
            for &k in &a.k {
                // Validate every grid point before running any of them.
                Config::new(n, k, eps, 0, 0)?;
                let m = (a.edge_factor * n).clamp(n.saturating_sub(1), pair_count(n));
                for s in 0..a.seeds {
                    grid.push((n, m, eps, k, s));
                }
            }
        }
    }
    if !(a.sampling_scale > 0.0) {
        return Err(invalid(format!("--sampling-scale must be positive, got {}", a.sampling_scale)));
    }
    if a.max_weight == 0 || a.max_weight > stream_sssp::stream::MAX_WEIGHT {
        return Err(invalid(format!("--max-weight must lie in [1, 2^40], got {}", a.max_weight)));
    }
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&(n, m, eps, k, s)| -> Result<String, SsspError> {
            let seed = trial_seed(n as u64 ^ ((k as u64) << 32), s ^ eps.to_bits());
            let g = random_connected_graph(n, m, a.max_weight, seed);
            let stream = shuffled_stream(&g, seed ^ 1);
            let cfg = Config::new(n, k, eps, seed, 0)?.with_sampling_scale(a.sampling_scale);
            let mut out = approx_sssp(&stream, &cfg)?;
            out.evaluate(&g);
            out.metrics.run_id = format!("bench-n{n}-k{k}-eps{eps}-seed{s}");
            Ok(out.metrics.csv_row())
        })
        .collect::<Result<_, _>>()?;
    let mut f = create(&a.out, "bench.csv")?;
    writeln!(f, "{}", Metrics::CSV_HEADER)?;
    for row in &rows {
        writeln!(f, "{row}")?;
    }
    f.flush()?;
    println!("wrote {} rows to {}", rows.len(), a.out.join("bench.csv").display());
    Ok(())
}
