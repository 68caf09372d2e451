//! External R-way merge sort over fixed-width records, with a block ledger.
//!
//! Runs are produced by load-sort-spill with `⌊M / record_size⌋` records per
//! run. Runs are then merged `R` at a time until at most `R` remain; the last
//! merge is streamed to the caller. Every logical `B`-byte block moved to or
//! from a spill file is counted, a trailing partial block counting as one.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use tempfile::{Builder, TempPath};

use crate::edgegen::{make_canonical_edge, EnumStats, K1mers, ReadSet};
use crate::error::{Error, Result};
use crate::graph::BiGraph;
use crate::kmer::{check_k, Kmer};
use crate::record::{EdgeRecord, FixedRecord, MAX_RECORD_SIZE};
use crate::sortdedup::{build_adjacency, DedupStats, Deduper, EdgeList, VertexList};

/// File name prefix of every spill file.
pub const SPILL_PREFIX: &str = "bidb-spill-";
/// Default spill location when no directory is configured.
pub const SPILL_DIR_ENV: &str = "BIDB_SPILL_DIR";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtConfig {
    /// Memory budget `M` in bytes.
    pub mem_bytes: usize,
    /// Block size `B` in bytes.
    pub block_bytes: usize,
    /// Merge fan-in `R`; `None` means `⌊M/B⌋ − 1`.
    pub fan_in: Option<usize>,
    pub spill_dir: Option<PathBuf>,
}

impl ExtConfig {
    pub fn new(mem_bytes: usize, block_bytes: usize) -> ExtConfig {
        ExtConfig {
            mem_bytes,
            block_bytes,
            fan_in: None,
            spill_dir: None,
        }
    }

    pub fn with_fan_in(mut self, r: usize) -> ExtConfig {
        self.fan_in = Some(r);
        self
    }

    pub fn with_spill_dir(mut self, dir: impl Into<PathBuf>) -> ExtConfig {
        self.spill_dir = Some(dir.into());
        self
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
            .unwrap_or_else(|| (self.mem_bytes / self.block_bytes.max(1)).saturating_sub(1))
    }

    /// Records held by one in-memory run.
    pub fn run_capacity(&self, record_size: usize) -> usize {
        self.mem_bytes / record_size
    }

    pub fn validate(&self, record_size: usize) -> Result<()> {
        if record_size > MAX_RECORD_SIZE {
            return Err(Error::Config(format!(
                "record size {record_size} exceeds {MAX_RECORD_SIZE} bytes"
            )));
        }
        if self.block_bytes < record_size {
            return Err(Error::Config(format!(
                "block size {} is smaller than the {record_size}-byte record",
                self.block_bytes
            )));
        }
        let r = self.fan_in();
        if r < 2 {
            return Err(Error::Config(format!("merge fan-in {r} is below 2")));
        }
        if self.mem_bytes < (r + 1) * self.block_bytes {
            return Err(Error::Config(format!(
                "memory {} cannot hold {} merge buffers of {} bytes",
                self.mem_bytes,
                r + 1,
                self.block_bytes
            )));
        }
        Ok(())
    }

    /// Explicit directory, else `$BIDB_SPILL_DIR`, else the system temp dir.
    pub fn resolve_spill_dir(&self) -> PathBuf {
        if let Some(d) = &self.spill_dir {
            return d.clone();
        }
        match std::env::var_os(SPILL_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => std::env::temp_dir(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IoLedger {
    pub n_records: u64,
    pub record_size: u64,
    pub runs_created: u64,
    pub merge_passes: u32,
    pub blocks_read: u64,
    pub blocks_written: u64,
}

impl IoLedger {
    pub fn data_bytes(&self) -> u64 {
        self.n_records * self.record_size
    }

    pub fn total_blocks(&self) -> u64 {
        self.blocks_read + self.blocks_written
    }

    /// Adds another sort's counters; record size becomes a byte-weighted mix.
    pub fn absorb(&mut self, o: &IoLedger) {
        let bytes = self.data_bytes() + o.data_bytes();
        self.n_records += o.n_records;
        self.record_size = if self.n_records == 0 {
            0
        } else {
            bytes / self.n_records
        };
        self.runs_created += o.runs_created;
        self.merge_passes += o.merge_passes;
        self.blocks_read += o.blocks_read;
        self.blocks_written += o.blocks_written;
    }
}

/// Smallest `p` with `r^p >= n`; zero when `n <= 1`.
pub fn ceil_log(r: u64, n: u64) -> u32 {
    let mut p = 0;
    let mut reach = 1u64;
    while reach < n {
        reach = reach.saturating_mul(r);
        p += 1;
    }
    p
}

/// `4 · ⌈data/B⌉ · (⌈log_R runs⌉ + 1)`, the block budget checked per run.
pub fn io_bound(data_bytes: u64, block_bytes: u64, fan_in: u64, runs: u64) -> u64 {
    4 * data_bytes.div_ceil(block_bytes) * (ceil_log(fan_in, runs) as u64 + 1)
}

pub const LEDGER_CSV_HEADER: &str = "mode,n_records,M,B,R,runs,passes,blocks_read,blocks_written";

pub fn ledger_csv_row(mode: &str, l: &IoLedger, cfg: &ExtConfig) -> String {
    format!(
        "{mode},{},{},{},{},{},{},{},{}",
        l.n_records,
        cfg.mem_bytes,
        cfg.block_bytes,
        cfg.fan_in(),
        l.runs_created,
        l.merge_passes,
        l.blocks_read,
        l.blocks_written
    )
}

/// Counts distinct `B`-byte blocks touched by a sequential stream.
#[derive(Clone, Copy, Debug)]
struct BlockCounter {
    block: u64,
    offset: u64,
    counted: u64,
}

impl BlockCounter {
    fn new(block: usize) -> Self {
        BlockCounter {
            block: block as u64,
            offset: 0,
            counted: 0,
        }
    }

    fn advance(&mut self, len: usize) -> u64 {
        self.offset += len as u64;
        let total = self.offset.div_ceil(self.block);
        let delta = total - self.counted;
        self.counted = total;
        delta
    }
}

struct Run {
    path: TempPath,
    records: u64,
}

struct RunWriter {
    path: TempPath,
    w: BufWriter<File>,
    blocks: BlockCounter,
    records: u64,
    buf: [u8; MAX_RECORD_SIZE],
}

impl RunWriter {
    fn create(dir: &Path, block: usize) -> Result<RunWriter> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tmp = Builder::new()
            .prefix(SPILL_PREFIX)
            .tempfile_in(dir)
            .map_err(|e| Error::io(dir, e))?;
        let (file, path) = tmp.into_parts();
        Ok(RunWriter {
            path,
            w: BufWriter::with_capacity(block, file),
            blocks: BlockCounter::new(block),
            records: 0,
            buf: [0; MAX_RECORD_SIZE],
        })
    }

    fn push<T: FixedRecord>(&mut self, rec: &T, ledger: &mut IoLedger) -> Result<()> {
        let b = &mut self.buf[..T::SIZE];
        rec.write_to(b);
        self.w
            .write_all(b)
            .map_err(|e| Error::io(self.path.to_path_buf(), e))?;
        ledger.blocks_written += self.blocks.advance(T::SIZE);
        self.records += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<Run> {
        self.w
            .flush()
            .map_err(|e| Error::io(self.path.to_path_buf(), e))?;
        Ok(Run {
            path: self.path,
            records: self.records,
        })
    }
}

struct RunReader {
    // Keeps the file alive until the reader is dropped.
    path: TempPath,
    r: BufReader<File>,
    remaining: u64,
    blocks: BlockCounter,
    buf: [u8; MAX_RECORD_SIZE],
}

impl RunReader {
    fn open(run: Run, block: usize) -> Result<RunReader> {
        let f = File::open(&run.path).map_err(|e| Error::io(run.path.to_path_buf(), e))?;
        Ok(RunReader {
            r: BufReader::with_capacity(block, f),
            path: run.path,
            remaining: run.records,
            blocks: BlockCounter::new(block),
            buf: [0; MAX_RECORD_SIZE],
        })
    }

    fn next<T: FixedRecord>(&mut self, ledger: &mut IoLedger) -> Result<Option<T>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        let b = &mut self.buf[..T::SIZE];
        self.r
            .read_exact(b)
            .map_err(|e| Error::io(self.path.to_path_buf(), e))?;
        ledger.blocks_read += self.blocks.advance(T::SIZE);
        self.remaining -= 1;
        Ok(Some(T::read_from(b)))
    }
}

fn record_bytes<T: FixedRecord>(r: &T) -> [u8; MAX_RECORD_SIZE] {
    let mut b = [0u8; MAX_RECORD_SIZE];
    r.write_to(&mut b[..T::SIZE]);
    b
}

/// Key order, ties broken by the encoded record bytes.
fn full_cmp<T: FixedRecord, K: Ord>(a: &T, b: &T, key: &impl Fn(&T) -> K) -> Ordering {
    key(a)
        .cmp(&key(b))
        .then_with(|| record_bytes(a).cmp(&record_bytes(b)))
}

struct HeapEntry<T, K> {
    key: K,
    bytes: [u8; MAX_RECORD_SIZE],
    rec: T,
    src: usize,
}

impl<T, K: Ord> PartialEq for HeapEntry<T, K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T, K: Ord> Eq for HeapEntry<T, K> {}

impl<T, K: Ord> PartialOrd for HeapEntry<T, K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T, K: Ord> Ord for HeapEntry<T, K> {
    // Reversed so the std max-heap pops the smallest record.
    fn cmp(&self, other: &Self) -> Ordering {
        (&other.key, &other.bytes, other.src).cmp(&(&self.key, &self.bytes, self.src))
    }
}

struct Merger<T, K> {
    readers: Vec<RunReader>,
    heap: BinaryHeap<HeapEntry<T, K>>,
}

impl<T: FixedRecord, K: Ord> Merger<T, K> {
    fn new(
        runs: Vec<Run>,
        block: usize,
        key: &impl Fn(&T) -> K,
        ledger: &mut IoLedger,
    ) -> Result<Self> {
        let mut m = Merger {
            readers: Vec::with_capacity(runs.len()),
            heap: BinaryHeap::with_capacity(runs.len()),
        };
        for run in runs {
            m.readers.push(RunReader::open(run, block)?);
            let src = m.readers.len() - 1;
            m.refill(src, key, ledger)?;
        }
        Ok(m)
    }

    fn refill(&mut self, src: usize, key: &impl Fn(&T) -> K, ledger: &mut IoLedger) -> Result<()> {
        if let Some(rec) = self.readers[src].next::<T>(ledger)? {
            self.heap.push(HeapEntry {
                key: key(&rec),
                bytes: record_bytes(&rec),
                rec,
                src,
            });
        }
        Ok(())
    }

    fn pop(&mut self, key: &impl Fn(&T) -> K, ledger: &mut IoLedger) -> Result<Option<T>> {
        let Some(top) = self.heap.pop() else {
            return Ok(None);
        };
        self.refill(top.src, key, ledger)?;
        Ok(Some(top.rec))
    }
}

enum Source<T, K> {
    Memory(std::vec::IntoIter<T>),
    Merge(Merger<T, K>),
}

/// Sorted output of [`external_sort`]; the ledger is final once exhausted.
pub struct SortedStream<T, K, F> {
    source: Source<T, K>,
    key: F,
    ledger: IoLedger,
    failed: bool,
}

impl<T: FixedRecord, K: Ord, F: Fn(&T) -> K> SortedStream<T, K, F> {
    pub fn ledger(&self) -> IoLedger {
        self.ledger
    }

    pub fn into_vec(mut self) -> Result<(Vec<T>, IoLedger)> {
        let mut out = Vec::new();
        for r in self.by_ref() {
            out.push(r?);
        }
        Ok((out, self.ledger))
    }
}

impl<T: FixedRecord, K: Ord, F: Fn(&T) -> K> Iterator for SortedStream<T, K, F> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Result<T>> {
        if self.failed {
            return None;
        }
        match &mut self.source {
            Source::Memory(it) => it.next().map(Ok),
            Source::Merge(m) => match m.pop(&self.key, &mut self.ledger) {
                Ok(r) => r.map(Ok),
                Err(e) => {
                    self.failed = true;
                    Some(Err(e))
                }
            },
        }
    }
}

fn spill<T: FixedRecord, K: Ord>(
    buf: &mut Vec<T>,
    dir: &Path,
    block: usize,
    key: &impl Fn(&T) -> K,
    ledger: &mut IoLedger,
) -> Result<Run> {
    buf.sort_unstable_by(|a, b| full_cmp(a, b, key));
    let mut w = RunWriter::create(dir, block)?;
    for r in buf.drain(..) {
        w.push(&r, ledger)?;
    }
    ledger.runs_created += 1;
    w.finish()
}

/// Sorts a stream of records under the memory budget of `cfg`.
pub fn external_sort<T, K, F, I>(input: I, cfg: &ExtConfig, key: F) -> Result<SortedStream<T, K, F>>
where
    T: FixedRecord,
    K: Ord,
    F: Fn(&T) -> K,
    I: IntoIterator<Item = T>,
{
    external_sort_fallible(input.into_iter().map(Ok), cfg, key)
}

/// As [`external_sort`], for inputs that may themselves fail mid-stream.
pub fn external_sort_fallible<T, K, F, I>(
    input: I,
    cfg: &ExtConfig,
    key: F,
) -> Result<SortedStream<T, K, F>>
where
    T: FixedRecord,
    K: Ord,
    F: Fn(&T) -> K,
    I: IntoIterator<Item = Result<T>>,
{
    cfg.validate(T::SIZE)?;
    let cap = cfg.run_capacity(T::SIZE);
    let block = cfg.block_bytes;
    let fan_in = cfg.fan_in();
    let mut ledger = IoLedger {
        record_size: T::SIZE as u64,
        ..IoLedger::default()
    };
    let mut dir: Option<PathBuf> = None;
    let mut runs: Vec<Run> = Vec::new();
    let mut buf: Vec<T> = Vec::new();

    for rec in input {
        let rec = rec?;
        if buf.len() == cap {
            let d = dir.get_or_insert_with(|| cfg.resolve_spill_dir());
            runs.push(spill(&mut buf, d, block, &key, &mut ledger)?);
        }
        if buf.capacity() == 0 {
            buf.reserve_exact(cap.min(1 << 16));
        }
        buf.push(rec);
        ledger.n_records += 1;
    }

    if runs.is_empty() {
        buf.sort_unstable_by(|a, b| full_cmp(a, b, &key));
        ledger.runs_created = u64::from(!buf.is_empty());
        return Ok(SortedStream {
            source: Source::Memory(buf.into_iter()),
            key,
            ledger,
            failed: false,
        });
    }
    let dir = dir.expect("spill directory chosen with the first run");
    if !buf.is_empty() {
        runs.push(spill(&mut buf, &dir, block, &key, &mut ledger)?);
    }
    drop(buf);

    while runs.len() > fan_in {
        ledger.merge_passes += 1;
        let mut next = Vec::with_capacity(runs.len().div_ceil(fan_in));
        let mut it = runs.into_iter().peekable();
        while it.peek().is_some() {
            let group: Vec<Run> = it.by_ref().take(fan_in).collect();
            let mut m = Merger::new(group, block, &key, &mut ledger)?;
            let mut w = RunWriter::create(&dir, block)?;
            while let Some(r) = m.pop(&key, &mut ledger)? {
                w.push(&r, &mut ledger)?;
            }
            next.push(w.finish()?);
        }
        runs = next;
    }
    ledger.merge_passes += 1;
    let m = Merger::new(runs, block, &key, &mut ledger)?;
    Ok(SortedStream {
        source: Source::Merge(m),
        key,
        ledger,
        failed: false,
    })
}

/// Ledger shared by the spools and sorts of one multi-step computation.
pub(crate) type SharedLedger = Rc<RefCell<IoLedger>>;

/// A spilled table that can be scanned any number of times.
pub(crate) struct Spool<T> {
    path: Option<TempPath>,
    len: u64,
    block: usize,
    ledger: SharedLedger,
    _rec: PhantomData<T>,
}

pub(crate) struct SpoolWriter<T> {
    w: Option<RunWriter>,
    dir: PathBuf,
    block: usize,
    ledger: SharedLedger,
    len: u64,
    _rec: PhantomData<T>,
}

impl<T: FixedRecord> SpoolWriter<T> {
    pub(crate) fn new(dir: &Path, block: usize, ledger: &SharedLedger) -> SpoolWriter<T> {
        SpoolWriter {
            w: None,
            dir: dir.to_path_buf(),
            block,
            ledger: ledger.clone(),
            len: 0,
            _rec: PhantomData,
        }
    }

    pub(crate) fn push(&mut self, rec: &T) -> Result<()> {
        if self.w.is_none() {
            self.w = Some(RunWriter::create(&self.dir, self.block)?);
        }
        let w = self.w.as_mut().expect("writer opened above");
        w.push(rec, &mut self.ledger.borrow_mut())?;
        self.len += 1;
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<Spool<T>> {
        let path = match self.w {
            Some(w) => Some(w.finish()?.path),
            None => None,
        };
        Ok(Spool {
            path,
            len: self.len,
            block: self.block,
            ledger: self.ledger,
            _rec: PhantomData,
        })
    }
}

impl<T: FixedRecord> Spool<T> {
    pub(crate) fn len(&self) -> u64 {
        self.len
    }

    pub(crate) fn iter(&self) -> Result<SpoolIter<T>> {
        let r = match &self.path {
            Some(p) => Some(BufReader::with_capacity(
                self.block,
                File::open(p).map_err(|e| Error::io(p.to_path_buf(), e))?,
            )),
            None => None,
        };
        Ok(SpoolIter {
            r,
            path: self.path.as_ref().map(|p| p.to_path_buf()),
            remaining: self.len,
            blocks: BlockCounter::new(self.block),
            ledger: self.ledger.clone(),
            _rec: PhantomData,
        })
    }
}

pub(crate) struct SpoolIter<T> {
    r: Option<BufReader<File>>,
    path: Option<PathBuf>,
    remaining: u64,
    blocks: BlockCounter,
    ledger: SharedLedger,
    _rec: PhantomData<T>,
}

impl<T: FixedRecord> Iterator for SpoolIter<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Result<T>> {
        if self.remaining == 0 {
            return None;
        }
        let r = self.r.as_mut()?;
        let mut buf = [0u8; MAX_RECORD_SIZE];
        let b = &mut buf[..T::SIZE];
        if let Err(e) = r.read_exact(b) {
            self.remaining = 0;
            let p = self.path.clone().unwrap_or_default();
            return Some(Err(Error::io(p, e)));
        }
        self.remaining -= 1;
        self.ledger.borrow_mut().blocks_read += self.blocks.advance(T::SIZE);
        Some(Ok(T::read_from(b)))
    }
}

/// Removes leftover spill files from `dir`; returns how many were removed.
pub fn clean_spill(dir: &Path) -> Result<usize> {
    let mut n = 0;
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(Error::io(dir, e)),
    };
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if !name.to_string_lossy().starts_with(SPILL_PREFIX) {
            continue;
        }
        let p = entry.path();
        if p.is_file() {
            std::fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OocReport {
    pub enumeration: EnumStats,
    pub dedup: DedupStats,
    pub edge_sort: IoLedger,
    pub vertex_sort: IoLedger,
}

impl OocReport {
    pub fn total(&self) -> IoLedger {
        let mut t = self.edge_sort;
        t.absorb(&self.vertex_sort);
        t
    }
}

/// Construction with both sorts replaced by external merges under `cfg`.
pub fn ooc_biconstruct(reads: &ReadSet, k: usize, cfg: &ExtConfig) -> Result<(BiGraph, OocReport)> {
    check_k(k)?;
    let mut windows = K1mers::new(reads.reads(), k)?;
    let records = windows
        .by_ref()
        .map(|z| EdgeRecord::from(&make_canonical_edge(z)));
    let mut sorted = external_sort(records, cfg, EdgeRecord::key)?;
    let enumeration = windows.stats();

    let mut dd = Deduper::default();
    let mut unique = Vec::new();
    for rec in sorted.by_ref() {
        if let Some(e) = dd.push(rec?.to_edge(k)) {
            unique.push(e);
        }
    }
    unique.extend(dd.finish());
    let edge_sort = sorted.ledger();

    let words = unique.iter().flat_map(|e| [e.u.word(), e.v.word()]);
    let mut vsorted = external_sort(words, cfg, |w: &u64| *w)?;
    let mut vertices: Vec<Kmer> = Vec::new();
    for w in vsorted.by_ref() {
        let x = Kmer::from_word(w?, k);
        if vertices.last() != Some(&x) {
            vertices.push(x);
        }
    }
    let vertex_sort = vsorted.ledger();

    let g = build_adjacency(
        &VertexList { k, vertices },
        &EdgeList {
            k,
            edges: unique,
            unique: true,
        },
    )?;
    Ok((
        g,
        OocReport {
            enumeration,
            dedup: dd.stats,
            edge_sort,
            vertex_sort,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::TupleRecord;
    use crate::sortdedup::biconstruct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tuples(n: usize, seed: u64) -> Vec<TupleRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| TupleRecord {
                x: rng.gen_range(0..1000),
                y: rng.gen(),
                payload: rng.gen(),
            })
            .collect()
    }

    fn cfg(dir: &Path, m: usize, b: usize) -> ExtConfig {
        ExtConfig::new(m, b).with_spill_dir(dir)
    }

    #[test]
    fn config_validation() {
        assert!(ExtConfig::new(1 << 20, 16).validate(24).is_err());
        assert!(ExtConfig::new(4096, 4096).validate(24).is_err());
        assert!(ExtConfig::new(4096, 1024).with_fan_in(8).validate(24).is_err());
        assert!(ExtConfig::new(4096, 1024).validate(24).is_ok());
        assert_eq!(ExtConfig::new(1 << 20, 4096).fan_in(), 255);
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(4, 0), 0);
        assert_eq!(ceil_log(4, 1), 0);
        assert_eq!(ceil_log(4, 4), 1);
        assert_eq!(ceil_log(4, 5), 2);
        assert_eq!(ceil_log(255, 100), 1);
    }

    #[test]
    fn fits_in_memory() {
        let dir = tempfile::tempdir().unwrap();
        let data = tuples(100, 1);
        let s = external_sort(data.clone(), &cfg(dir.path(), 1 << 16, 1024), |t| t.x).unwrap();
        let (out, l) = s.into_vec().unwrap();
        assert_eq!((l.runs_created, l.merge_passes, l.total_blocks()), (1, 0, 0));
        let mut oracle = data;
        oracle.sort_by_key(|t| (t.x, record_bytes(t)));
        assert_eq!(out, oracle);
    }

    #[test]
    fn empty_input() {
        let dir = tempfile::tempdir().unwrap();
        let s = external_sort(Vec::<u64>::new(), &cfg(dir.path(), 4096, 512), |w| *w).unwrap();
        let (out, l) = s.into_vec().unwrap();
        assert!(out.is_empty());
        assert_eq!(l.runs_created, 0);
    }

    #[test]
    fn multi_pass_matches_in_memory_sort() {
        let dir = tempfile::tempdir().unwrap();
        // 3 buffers of 256 bytes: R = 2, 32 tuples per run
        let c = cfg(dir.path(), 768, 256);
        assert_eq!(c.fan_in(), 2);
        let data = tuples(1000, 2);
        let (out, l) = external_sort(data.clone(), &c, |t| t.x)
            .unwrap()
            .into_vec()
            .unwrap();
        let mut oracle = data;
        oracle.sort_by_key(|t| (t.x, record_bytes(t)));
        assert_eq!(out, oracle);
        let runs = 1000u64.div_ceil(32);
        assert_eq!(l.runs_created, runs);
        assert_eq!(l.merge_passes, ceil_log(2, runs));
        assert!(l.total_blocks() <= io_bound(l.data_bytes(), 256, 2, runs));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn block_counts_for_one_pass() {
        let dir = tempfile::tempdir().unwrap();
        // 480 records in 4 runs of 120; a run is 960 bytes, 4 blocks of 256
        let c = cfg(dir.path(), 960, 256).with_fan_in(2);
        let data: Vec<u64> = (0..480u64).rev().collect();
        let s = external_sort(data, &c, |w| *w).unwrap();
        let (out, l) = s.into_vec().unwrap();
        assert_eq!(out, (0..480).collect::<Vec<_>>());
        assert_eq!(l.runs_created, 4);
        assert_eq!(l.merge_passes, 2);
        // 4 runs of 4 blocks, then 2 merged runs of 8 blocks each way
        assert_eq!(l.blocks_written, 4 * 4 + 2 * 8);
        assert_eq!(l.blocks_read, 4 * 4 + 2 * 8);
    }

    #[test]
    fn ooc_graph_equals_in_memory() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seqs: Vec<Vec<u8>> = (0..200)
            .map(|_| (0..40).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect())
            .collect();
        let rs = ReadSet::from_seqs(seqs.iter().map(|s| s.as_slice()));
        let (g_mem, _) = biconstruct(&rs, 5).unwrap();
        let (g_ooc, rep) = ooc_biconstruct(&rs, 5, &cfg(dir.path(), 8192, 512)).unwrap();
        assert_eq!(g_mem, g_ooc);
        assert!(rep.edge_sort.merge_passes >= 1);
        let (g_fit, rep) = ooc_biconstruct(&rs, 5, &cfg(dir.path(), 1 << 22, 4096)).unwrap();
        assert_eq!(g_mem, g_fit);
        assert_eq!(rep.total().merge_passes, 0);
    }

    #[test]
    fn clean_spill_removes_prefixed_files_only() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(format!("{SPILL_PREFIX}abc")), b"x").unwrap();
        std::fs::write(dir.path().join("keep.txt"), b"x").unwrap();
        assert_eq!(clean_spill(dir.path()).unwrap(), 1);
        assert!(dir.path().join("keep.txt").exists());
        assert_eq!(clean_spill(&dir.path().join("missing")).unwrap(), 0);
    }

    #[test]
    fn spill_failure_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let c = cfg(&blocker.join("sub"), 768, 256);
        let err = match external_sort(tuples(200, 3), &c, |t| t.x) {
            Err(e) => e,
            Ok(_) => panic!("spill into a file path must fail"),
        };
        assert!(err.to_string().contains("file"), "{err}");
    }
}
