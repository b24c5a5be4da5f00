//! Edge streams with pass counting, and the word-level space ledger.
//!
//! Text format, one record per line:
//!
//! ```text
//! n=<vertices> mode=<ins|dyn>
//! # comment
//! <u> <v> <w>          (insertion-only)
//! <u> <v> <w> <+|->    (insertions and deletions)
//! ```

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

/// Largest admissible edge weight.
pub const MAX_WEIGHT: u64 = 1 << 40;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: String },
    #[error("line {line}: weight {weight} exceeds 2^40")]
    WeightTooLarge { line: usize, weight: u64 },
    #[error("line {line}: vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("stream declares mode {found} but {expected} was requested")]
    ModeMismatch { expected: StreamMode, found: StreamMode },
    #[error("deletion in an insertion-only stream at update {index}")]
    DeletionInInsertionStream { index: usize },
    #[error("a pass is already active; only one pass may be open at a time")]
    PassActive,
    #[error("edge ({u},{v}) has net multiplicity {count}; expected 0 or 1")]
    BadMultiplicity { u: usize, v: usize, count: i64 },
    #[error("edge ({u},{v}) deleted with weight {deleted} but inserted with weight {inserted}")]
    WeightMismatch { u: usize, v: usize, inserted: u64, deleted: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamMode {
    InsertOnly,
    Dynamic,
}

impl fmt::Display for StreamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamMode::InsertOnly => "ins",
            StreamMode::Dynamic => "dyn",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Insert,
    Delete,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Insert => 1,
            Sign::Delete => -1,
        }
    }
}

/// One stream record. Endpoints are stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeUpdate {
    pub u: usize,
    pub v: usize,
    pub w: u64,
    pub sign: Sign,
}

impl EdgeUpdate {
    pub fn insert(u: usize, v: usize, w: u64) -> Self {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        EdgeUpdate { u, v, w, sign: Sign::Insert }
    }

    pub fn delete(u: usize, v: usize, w: u64) -> Self {
        EdgeUpdate { sign: Sign::Delete, ..Self::insert(u, v, w) }
    }
}

/// A finite, replayable sequence of edge updates over vertices `0..n`.
///
/// Every full or partial read goes through [`EdgeStream::begin_pass`], which
/// increments the pass counter. At most one pass may be open at a time.
#[derive(Debug)]
pub struct EdgeStream {
    n: usize,
    mode: StreamMode,
    updates: Arc<[EdgeUpdate]>,
    passes: Cell<u64>,
    active: Cell<bool>,
}

impl Clone for EdgeStream {
    /// Clones share the update sequence but start with a fresh pass counter.
    fn clone(&self) -> Self {
        EdgeStream {
            n: self.n,
            mode: self.mode,
            updates: Arc::clone(&self.updates),
            passes: Cell::new(0),
            active: Cell::new(false),
        }
    }
}

impl EdgeStream {
    /// Reads and validates a stream file. The whole file is parsed up front so
    /// that malformed input is rejected before any pass starts.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StreamError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Like [`EdgeStream::open`] but rejects a file whose header declares another mode.
    pub fn open_as(path: impl AsRef<Path>, mode: StreamMode) -> Result<Self, StreamError> {
        let s = Self::open(path)?;
        if s.mode != mode {
            return Err(StreamError::ModeMismatch { expected: mode, found: s.mode });
        }
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, StreamError> {
        let mut header: Option<(usize, StreamMode)> = None;
        let mut updates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let Some((n, mode)) = header else {
                header = Some(parse_header(s, line)?);
                continue;
            };
            updates.push(parse_record(s, line, n, mode)?);
        }
        let (n, mode) = header.ok_or(StreamError::Parse { line: 0, msg: "missing header".into() })?;
        Self::from_updates(n, mode, updates)
    }

    /// Builds a stream from records already in memory. Duplicate insertions of
    /// the same pair in an insertion-only stream keep the first record.
    pub fn from_updates(
        n: usize,
        mode: StreamMode,
        updates: Vec<EdgeUpdate>,
    ) -> Result<Self, StreamError> {
        let mut updates: Vec<EdgeUpdate> = updates
            .into_iter()
            .map(|e| if e.u > e.v { EdgeUpdate { u: e.v, v: e.u, ..e } } else { e })
            .collect();
        for (i, e) in updates.iter().enumerate() {
            let line = i + 1;
            if e.u == e.v {
                return Err(StreamError::SelfLoop { line, vertex: e.u });
            }
            if e.v >= n {
                return Err(StreamError::VertexOutOfRange { line, vertex: e.v, n });
            }
            if e.w > MAX_WEIGHT {
                return Err(StreamError::WeightTooLarge { line, weight: e.w });
            }
            if mode == StreamMode::InsertOnly && e.sign == Sign::Delete {
                return Err(StreamError::DeletionInInsertionStream { index: i });
            }
        }
        if mode == StreamMode::InsertOnly {
            let before = updates.len();
            let mut seen = std::collections::HashSet::with_capacity(before);
            updates.retain(|e| seen.insert((e.u, e.v)));
            if updates.len() < before {
                log::warn!(
                    "dropped {} duplicate insertion(s); the first occurrence of each pair is kept",
                    before - updates.len()
                );
            }
        }
        Ok(EdgeStream {
            n,
            mode,
            updates: updates.into(),
            passes: Cell::new(0),
            active: Cell::new(false),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> StreamMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    /// Number of passes started so far.
    pub fn pass_count(&self) -> u64 {
        self.passes.get()
    }

    /// Starts a pass over the stream.
    pub fn begin_pass(&self) -> Result<Pass<'_>, StreamError> {
        if self.active.get() {
            return Err(StreamError::PassActive);
        }
        self.active.set(true);
        self.passes.set(self.passes.get() + 1);
        Ok(Pass { stream: self, pos: 0 })
    }

    /// Raw access to the records for instrumentation and test oracles.
    /// Does not count as a pass and is never used by the streaming algorithms.
    pub fn updates_unmetered(&self) -> &[EdgeUpdate] {
        &self.updates
    }

    /// Net edge set after all updates, as `(u, v, w)` with `u < v`, sorted.
    /// Instrumentation only: not metered and not a pass.
    pub fn materialize_final_graph(&self) -> Result<Vec<(usize, usize, u64)>, StreamError> {
        let mut net: HashMap<(usize, usize), (i64, u64)> = HashMap::new();
        for e in self.updates.iter() {
            let entry = net.entry((e.u, e.v)).or_insert((0, e.w));
            match e.sign {
                Sign::Insert => {
                    if entry.0 == 0 {
                        entry.1 = e.w;
                    }
                    entry.0 += 1;
                }
                Sign::Delete => {
                    if entry.0 > 0 && entry.1 != e.w {
                        return Err(StreamError::WeightMismatch {
                            u: e.u,
                            v: e.v,
                            inserted: entry.1,
                            deleted: e.w,
                        });
                    }
                    entry.0 -= 1;
                }
            }
        }
        let mut out = Vec::new();
        for (&(u, v), &(count, w)) in &net {
            match count {
                0 => {}
                1 => out.push((u, v, w)),
                _ => return Err(StreamError::BadMultiplicity { u, v, count }),
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Writes the stream in the text format accepted by [`EdgeStream::parse`].
    pub fn write_to(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "n={} mode={}", self.n, self.mode)?;
        for e in self.updates.iter() {
            match self.mode {
                StreamMode::InsertOnly => writeln!(out, "{} {} {}", e.u, e.v, e.w)?,
                StreamMode::Dynamic => {
                    let s = if e.sign == Sign::Insert { '+' } else { '-' };
                    writeln!(out, "{} {} {} {}", e.u, e.v, e.w, s)?
                }
            }
        }
        Ok(())
    }
}

/// An open pass. Dropping it closes the pass.
pub struct Pass<'a> {
    stream: &'a EdgeStream,
    pos: usize,
}

impl Iterator for Pass<'_> {
    type Item = EdgeUpdate;

    fn next(&mut self) -> Option<EdgeUpdate> {
        let e = self.stream.updates.get(self.pos).copied();
        self.pos += 1;
        e
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.stream.updates.len().saturating_sub(self.pos);
        (left, Some(left))
    }
}

impl Drop for Pass<'_> {
    fn drop(&mut self) {
        self.stream.active.set(false);
    }
}

fn parse_header(s: &str, line: usize) -> Result<(usize, StreamMode), StreamError> {
    let err = |msg: &str| StreamError::Parse { line, msg: msg.to_string() };
    let mut n = None;
    let mut mode = None;
    for tok in s.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|_| err("bad vertex count in header"))?);
        } else if let Some(v) = tok.strip_prefix("mode=") {
            mode = Some(match v {
                "ins" => StreamMode::InsertOnly,
                "dyn" => StreamMode::Dynamic,
                _ => return Err(err("mode must be ins or dyn")),
            });
        } else {
            return Err(err("expected header `n=<int> mode=<ins|dyn>`"));
        }
    }
    match (n, mode) {
        (Some(n), Some(mode)) => Ok((n, mode)),
        _ => Err(err("expected header `n=<int> mode=<ins|dyn>`")),
    }
}

fn parse_record(s: &str, line: usize, n: usize, mode: StreamMode) -> Result<EdgeUpdate, StreamError> {
    let err = |msg: String| StreamError::Parse { line, msg };
    let toks: Vec<&str> = s.split_whitespace().collect();
    let expected = if mode == StreamMode::InsertOnly { 3 } else { 4 };
    if toks.len() < 3 {
        return Err(err(format!("expected {expected} fields, found {}", toks.len())));
    }
    let vertex = |t: &str| t.parse::<usize>().map_err(|_| err(format!("bad vertex id `{t}`")));
    let u = vertex(toks[0])?;
    let v = vertex(toks[1])?;
    if u == v {
        return Err(StreamError::SelfLoop { line, vertex: u });
    }
    for x in [u, v] {
        if x >= n {
            return Err(StreamError::VertexOutOfRange { line, vertex: x, n });
        }
    }
    if toks[2].starts_with('-') {
        return Err(StreamError::NegativeWeight { line, weight: toks[2].to_string() });
    }
    let w = toks[2].parse::<u64>().map_err(|_| err(format!("bad weight `{}`", toks[2])))?;
    if w > MAX_WEIGHT {
        return Err(StreamError::WeightTooLarge { line, weight: w });
    }
    if toks.len() != expected {
        return Err(err(format!("expected {expected} fields, found {}", toks.len())));
    }
    let sign = match mode {
        StreamMode::InsertOnly => Sign::Insert,
        StreamMode::Dynamic => match toks[3] {
            "+" => Sign::Insert,
            "-" => Sign::Delete,
            t => return Err(err(format!("bad sign `{t}`"))),
        },
    };
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    Ok(EdgeUpdate { u, v, w, sign })
}

/// Word-granular working-memory accounting.
///
/// Conventions: one word per stored endpoint pair, one per weight, one per tree
/// parent pointer, one per tree distance, one per sketch cell field.
#[derive(Clone, Debug, Default)]
pub struct SpaceLedger {
    current: u64,
    peak: u64,
}

impl SpaceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, words: u64) {
        self.current += words;
        self.peak = self.peak.max(self.current);
    }

    pub fn release(&mut self, words: u64) {
        self.current = self
            .current
            .checked_sub(words)
            .expect("space ledger released more words than it holds");
    }

    pub fn current_words(&self) -> u64 {
        self.current
    }

    pub fn peak_words(&self) -> u64 {
        self.peak
    }
}
