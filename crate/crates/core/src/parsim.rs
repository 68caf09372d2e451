//! Partitioned construction with counted record routing, and an emulation
//! of the candidate-edge strategy that floods `|Σ|` messages per vertex side.
//!
//! Workers own contiguous slices of the reads. Each enumerates its
//! `(k+1)`-mers, merges duplicates locally, and routes every record to the
//! owner of its `u` endpoint. Owners merge what they receive; concatenating
//! owner outputs in key order gives the same edge list as the sequential
//! build. A record delivered to its own worker is not a message.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::mpsc;
use std::thread;

use crate::edgegen::{canonical_edges, make_canonical_edge, BiEdge, EnumStats, Orientation, ReadSet};
use crate::error::{Error, Result};
use crate::graph::BiGraph;
use crate::kmer::{check_k, Kmer, Strand, ALPHABET};
use crate::sortdedup::{build_adjacency, collect_vertices, radix_sort_edges, Deduper, EdgeList};

/// Deterministic owner of every edge record, by its `u` word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub p: usize,
}

impl PartitionPlan {
    pub fn new(p: usize) -> Result<PartitionPlan> {
        if p == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        Ok(PartitionPlan { p })
    }

    pub fn owner_of_word(&self, word: u64) -> usize {
        // splitmix64 finaliser
        let mut z = word.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z % self.p as u64) as usize
    }

    pub fn owner(&self, e: &BiEdge) -> usize {
        self.owner_of_word(e.u.word())
    }
}

/// Exact routed-record counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageLedger {
    pub p: usize,
    pub sent: Vec<u64>,
    pub received: Vec<u64>,
    pub total_messages: u64,
    pub alphabet_size: u32,
    pub n_symbols: u64,
    pub n_k1mers: u64,
}

impl MessageLedger {
    fn new(p: usize) -> MessageLedger {
        MessageLedger {
            p,
            sent: vec![0; p],
            received: vec![0; p],
            alphabet_size: ALPHABET.len() as u32,
            ..MessageLedger::default()
        }
    }

    fn route(&mut self, from: usize, to: usize, n: u64) {
        if from != to {
            self.sent[from] += n;
            self.received[to] += n;
            self.total_messages += n;
        }
    }
}

/// How the `p` workers are executed. Ledgers and graphs do not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Threads,
    Simulated,
}

struct Outbox {
    batches: Vec<Vec<BiEdge>>,
    stats: EnumStats,
}

fn combine(mut records: Vec<BiEdge>, k: usize) -> Vec<BiEdge> {
    if records.len() > 1 {
        records = radix_sort_edges(records, k).0;
    }
    let mut d = Deduper::default();
    let mut out = Vec::with_capacity(records.len());
    for e in records {
        out.extend(d.push(e));
    }
    out.extend(d.finish());
    out
}

fn produce(reads: &[Vec<u8>], k: usize, plan: PartitionPlan) -> Result<Outbox> {
    let (records, stats) = canonical_edges(reads, k)?;
    let mut batches = vec![Vec::new(); plan.p];
    for e in combine(records, k) {
        batches[plan.owner(&e)].push(e);
    }
    Ok(Outbox { batches, stats })
}

/// Merges the batches an owner received, in sender order.
fn absorb(inbox: Vec<Vec<BiEdge>>, k: usize) -> Vec<BiEdge> {
    combine(inbox.into_iter().flatten().collect(), k)
}

/// Builds the graph with `p` workers; equal to [`crate::biconstruct`].
pub fn par_biconstruct(reads: &ReadSet, k: usize, p: usize) -> Result<(BiGraph, MessageLedger)> {
    par_biconstruct_with(reads, k, p, ExecMode::Threads)
}

pub fn par_biconstruct_with(
    reads: &ReadSet,
    k: usize,
    p: usize,
    mode: ExecMode,
) -> Result<(BiGraph, MessageLedger)> {
    check_k(k)?;
    let plan = PartitionPlan::new(p)?;
    let parts = reads.partition(p);
    let mut ledger = MessageLedger::new(p);
    ledger.n_symbols = reads.n_symbols();

    let owned: Vec<Vec<BiEdge>> = match mode {
        ExecMode::Simulated => {
            let mut inboxes: Vec<Vec<Vec<BiEdge>>> = vec![Vec::new(); p];
            for (w, part) in parts.iter().enumerate() {
                let out = produce(part, k, plan)?;
                ledger.n_k1mers += out.stats.k1mers;
                for (o, batch) in out.batches.into_iter().enumerate() {
                    ledger.route(w, o, batch.len() as u64);
                    inboxes[o].push(batch);
                }
            }
            inboxes.into_iter().map(|b| absorb(b, k)).collect()
        }
        ExecMode::Threads => {
            let (senders, receivers): (Vec<_>, Vec<_>) =
                (0..p).map(|_| mpsc::channel::<(usize, Vec<BiEdge>)>()).unzip();
            thread::scope(|s| -> Result<Vec<Vec<BiEdge>>> {
                let workers: Vec<_> = parts
                    .iter()
                    .enumerate()
                    .map(|(w, part)| {
                        let senders = senders.clone();
                        s.spawn(move || -> Result<(EnumStats, Vec<u64>)> {
                            let out = produce(part, k, plan)?;
                            let mut counts = vec![0; plan.p];
                            for (o, batch) in out.batches.into_iter().enumerate() {
                                counts[o] = batch.len() as u64;
                                senders[o].send((w, batch)).expect("owner alive");
                            }
                            Ok((out.stats, counts))
                        })
                    })
                    .collect();
                drop(senders);
                let owners: Vec<_> = receivers
                    .into_iter()
                    .map(|rx| {
                        s.spawn(move || {
                            let mut got: Vec<(usize, Vec<BiEdge>)> = rx.iter().collect();
                            got.sort_by_key(|(w, _)| *w);
                            absorb(got.into_iter().map(|(_, b)| b).collect(), k)
                        })
                    })
                    .collect();
                for (w, h) in workers.into_iter().enumerate() {
                    let (stats, counts) = h.join().expect("worker panicked")?;
                    ledger.n_k1mers += stats.k1mers;
                    for (o, n) in counts.into_iter().enumerate() {
                        ledger.route(w, o, n);
                    }
                }
                Ok(owners
                    .into_iter()
                    .map(|h| h.join().expect("owner panicked"))
                    .collect())
            })?
        }
    };

    // Owners hold disjoint key sets; one more sort restores global key order.
    let all: Vec<BiEdge> = owned.into_iter().flatten().collect();
    let edges = if all.len() > 1 { radix_sort_edges(all, k).0 } else { all };
    let unique = EdgeList {
        k,
        edges,
        unique: true,
    };
    let (vertices, _) = collect_vertices(&unique);
    Ok((build_adjacency(&vertices, &unique)?, ledger))
}

/// Candidate pairs the flooding strategy emits for one oriented k-mer:
/// the `|Σ|` right extensions `(x, x[1..]c)` then the `|Σ|` left extensions
/// `(c x[..k-1], x)`.
pub fn ja_candidates(x: Kmer) -> Vec<(Kmer, Kmer)> {
    let k = x.len();
    let mask = (1u64 << (2 * k)) - 1;
    let mut out = Vec::with_capacity(2 * ALPHABET.len());
    for c in 0..ALPHABET.len() as u64 {
        out.push((x, Kmer::from_word(((x.word() << 2) | c) & mask, k)));
    }
    for c in 0..ALPHABET.len() as u64 {
        out.push((Kmer::from_word((c << (2 * (k - 1))) | (x.word() >> 2), k), x));
    }
    out
}

/// The `(k+1)`-mer spelled by two k-mers overlapping by `k-1`.
fn join(a: Kmer, b: Kmer) -> Kmer {
    Kmer::from_word((a.word() << 2) | (b.word() & 3), a.len() + 1)
}

/// Emulates candidate flooding: every vertex sends `|Σ|` candidate edges per
/// side to the owner of the other endpoint, and an edge is kept when both
/// endpoint molecules exist. Multiplicities are 1 since no read is consulted.
pub fn ja_emulate(reads: &ReadSet, k: usize, p: usize) -> Result<(BiGraph, MessageLedger)> {
    check_k(k)?;
    let plan = PartitionPlan::new(p)?;
    let mut ledger = MessageLedger::new(p);
    ledger.n_symbols = reads.n_symbols();

    let mut verts: Vec<Kmer> = Vec::new();
    for r in reads.reads() {
        if r.len() <= k {
            continue;
        }
        for w in r.windows(k) {
            verts.push(Kmer::pack(w)?.canonicalize().kmer);
        }
    }
    verts.sort_unstable();
    verts.dedup();
    let exists = |x: Kmer| verts.binary_search(&x.canonicalize().kmer).is_ok();

    let mut keys: BTreeSet<(Kmer, Kmer, u8, u8)> = BTreeSet::new();
    for &x in &verts {
        let from = plan.owner_of_word(x.word());
        for (a, b) in ja_candidates(x) {
            let other = if a == x { b } else { a };
            // flooded candidates count even when addressed to their sender
            let to = plan.owner_of_word(other.canonicalize().kmer.word());
            ledger.sent[from] += 1;
            ledger.received[to] += 1;
            ledger.total_messages += 1;
            if exists(other) {
                let e = make_canonical_edge(join(a, b));
                keys.insert((e.u, e.v, e.o1.bit(), e.o2.bit()));
            }
        }
    }
    let edges = keys
        .into_iter()
        .map(|(u, v, o1, o2)| {
            BiEdge::new(
                u,
                v,
                Orientation::from_bit(o1),
                Orientation::from_bit(o2),
            )
        })
        .collect();
    let list = EdgeList {
        k,
        edges,
        unique: true,
    };
    let (vertices, _) = collect_vertices(&list);
    Ok((build_adjacency(&vertices, &list)?, ledger))
}

/// Edges of `g` whose endpoint labels and heads have no counterpart in `reference`.
pub fn spurious_edges(g: &BiGraph, reference: &BiGraph) -> u64 {
    let keyset = |h: &BiGraph| -> BTreeSet<(String, String, u8, u8)> {
        h.edges()
            .iter()
            .map(|e| {
                (
                    h.label(e.u).oriented(Strand::Pos),
                    h.label(e.v).oriented(Strand::Pos),
                    e.o1.bit(),
                    e.o2.bit(),
                )
            })
            .collect()
    };
    let r = keyset(reference);
    keyset(g).iter().filter(|e| !r.contains(*e)).count() as u64
}

pub const LEDGER_CSV_HEADER: &str = "mode,p,n_symbols,n_k1mers,messages_sent,spurious_edges";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub mode: &'static str,
    pub p: usize,
    pub n_symbols: u64,
    pub n_k1mers: u64,
    pub messages_sent: u64,
    pub spurious_edges: u64,
}

/// Runs both drivers and counts spurious edges against the sequential build.
pub fn compare_ja(reads: &ReadSet, k: usize, p: usize) -> Result<Vec<ComparisonRow>> {
    let (reference, report) = crate::biconstruct(reads, k)?;
    let (par, pl) = par_biconstruct(reads, k, p)?;
    let (ja, jl) = ja_emulate(reads, k, p)?;
    let row = |mode, l: &MessageLedger, g: &BiGraph| ComparisonRow {
        mode,
        p,
        n_symbols: l.n_symbols,
        n_k1mers: report.enumeration.k1mers,
        messages_sent: l.total_messages,
        spurious_edges: spurious_edges(g, &reference),
    };
    Ok(vec![row("par", &pl, &par), row("ja", &jl, &ja)])
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(LEDGER_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.mode, r.p, r.n_symbols, r.n_k1mers, r.messages_sent, r.spurious_edges
        );
    }
    s
}
