//! Sorting, duplicate merging, vertex collection and adjacency construction.
//!
//! The sort is an LSD radix sort with 8-bit digits over the fixed-width key
//! `(u, v, o1, o2)`; its pass count is `(k + 1) / 2` and depends only on `k`.
//! Every stage bumps a touch counter once per record it reads or moves, so
//! the linear-work claim can be checked on counters instead of wall clock.

use crate::edgegen::{canonical_edges, BiEdge, EnumStats, ReadSet};
use crate::error::{Error, Result};
use crate::graph::{BiGraph, Edge};
use crate::kmer::{check_k, Kmer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SortStats {
    pub passes: u32,
    pub record_touches: u64,
}

impl SortStats {
    fn add(&mut self, other: SortStats) {
        self.passes += other.passes;
        self.record_touches += other.record_touches;
    }
}

/// Number of 8-bit digits in the edge sort key for vertex length `k`.
pub fn edge_key_digits(k: usize) -> u32 {
    (4 * k as u32 + 2).div_ceil(8)
}

fn lsd_radix<T: Copy>(items: Vec<T>, digits: u32, key: impl Fn(&T) -> u128) -> (Vec<T>, SortStats) {
    let mut stats = SortStats::default();
    if items.is_empty() {
        return (items, stats);
    }
    let mut src = items;
    let mut dst = src.clone();
    for d in 0..digits {
        let shift = 8 * d;
        let mut counts = [0usize; 256];
        for it in &src {
            counts[((key(it) >> shift) & 0xFF) as usize] += 1;
        }
        let mut sum = 0;
        for c in counts.iter_mut() {
            let n = *c;
            *c = sum;
            sum += n;
        }
        for it in &src {
            let b = ((key(it) >> shift) & 0xFF) as usize;
            dst[counts[b]] = *it;
            counts[b] += 1;
        }
        std::mem::swap(&mut src, &mut dst);
        stats.passes += 1;
        stats.record_touches += 2 * src.len() as u64;
    }
    (src, stats)
}

/// Stable LSD radix sort of edge records by `(u, v, o1, o2)`.
pub fn radix_sort_edges(edges: Vec<BiEdge>, k: usize) -> (Vec<BiEdge>, SortStats) {
    lsd_radix(edges, edge_key_digits(k), BiEdge::sort_key)
}

/// Edges in key order; `unique` once duplicates have been merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub k: usize,
    pub edges: Vec<BiEdge>,
    pub unique: bool,
}

impl EdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// First index where the key order is broken, if any.
    pub fn first_unsorted(&self) -> Option<usize> {
        self.edges
            .windows(2)
            .position(|w| w[0].sort_key() > w[1].sort_key())
            .map(|i| i + 1)
    }
}

/// Sorted, duplicate-free canonical vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexList {
    pub k: usize,
    pub vertices: Vec<Kmer>,
}

impl VertexList {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rank(&self, kmer: Kmer) -> Option<u32> {
        self.vertices.binary_search(&kmer).ok().map(|i| i as u32)
    }
}

pub fn sort_edges(records: impl IntoIterator<Item = BiEdge>, k: usize) -> (EdgeList, SortStats) {
    let (edges, stats) = radix_sort_edges(records.into_iter().collect(), k);
    (
        EdgeList {
            k,
            edges,
            unique: false,
        },
        stats,
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DedupStats {
    pub input: u64,
    pub output: u64,
    /// Merges that hit the 32-bit multiplicity ceiling.
    pub saturated: u64,
    /// Endpoint pairs carrying more than one orientation pair.
    pub multi_orientation_pairs: u64,
    pub record_touches: u64,
}

/// Streaming duplicate merger over key-sorted records.
#[derive(Default)]
pub(crate) struct Deduper {
    cur: Option<BiEdge>,
    last_pair: Option<(Kmer, Kmer)>,
    pair_orientations: u32,
    pub(crate) stats: DedupStats,
}

impl Deduper {
    /// Feeds one record; returns a finished unique record when the key changes.
    pub(crate) fn push(&mut self, e: BiEdge) -> Option<BiEdge> {
        self.stats.input += 1;
        self.stats.record_touches += 1;
        match &mut self.cur {
            Some(c) if c.same_key(&e) => {
                let (m, over) = c.multiplicity.overflowing_add(e.multiplicity);
                if over {
                    c.multiplicity = u32::MAX;
                    self.stats.saturated += 1;
                } else {
                    c.multiplicity = m;
                }
                None
            }
            _ => {
                let done = self.cur.replace(e);
                self.note_pair(&e);
                if done.is_some() {
                    self.stats.output += 1;
                }
                done
            }
        }
    }

    fn note_pair(&mut self, e: &BiEdge) {
        let pair = (e.u, e.v);
        if self.last_pair == Some(pair) {
            self.pair_orientations += 1;
            if self.pair_orientations == 2 {
                self.stats.multi_orientation_pairs += 1;
            }
        } else {
            self.last_pair = Some(pair);
            self.pair_orientations = 1;
        }
    }

    pub(crate) fn finish(&mut self) -> Option<BiEdge> {
        let done = self.cur.take();
        if done.is_some() {
            self.stats.output += 1;
        }
        done
    }
}

/// Merges equal keys, summing multiplicities (saturating at `u32::MAX`).
pub fn dedup_count(sorted: EdgeList) -> Result<(EdgeList, DedupStats)> {
    if let Some(i) = sorted.first_unsorted() {
        return Err(Error::Unsorted(i));
    }
    let mut d = Deduper::default();
    let mut out = Vec::with_capacity(sorted.edges.len());
    for e in sorted.edges {
        if let Some(done) = d.push(e) {
            out.push(done);
        }
    }
    out.extend(d.finish());
    Ok((
        EdgeList {
            k: sorted.k,
            edges: out,
            unique: true,
        },
        d.stats,
    ))
}

/// Sorted, unique endpoints of `edges`.
pub fn collect_vertices(edges: &EdgeList) -> (VertexList, SortStats) {
    let k = edges.k;
    let mut words: Vec<u64> = Vec::with_capacity(2 * edges.len());
    for e in &edges.edges {
        words.push(e.u.word());
        words.push(e.v.word());
    }
    let mut stats = SortStats {
        passes: 0,
        record_touches: edges.len() as u64,
    };
    let digits = (2 * k as u32).div_ceil(8);
    let (mut sorted, s) = lsd_radix(words, digits, |&w| w as u128);
    stats.add(s);
    stats.record_touches += sorted.len() as u64;
    sorted.dedup();
    (
        VertexList {
            k,
            vertices: sorted.into_iter().map(|w| Kmer::from_word(w, k)).collect(),
        },
        stats,
    )
}

/// Rewrites unique edges over dense vertex ids and builds the half-edge lists.
pub fn build_adjacency(vertices: &VertexList, edges: &EdgeList) -> Result<BiGraph> {
    if !edges.unique {
        return Err(Error::NotUnique);
    }
    let rank = |x: Kmer| {
        vertices
            .rank(x)
            .ok_or_else(|| Error::DanglingEndpoint(x.decode()))
    };
    let mut out = Vec::with_capacity(edges.len());
    for e in &edges.edges {
        out.push(Edge {
            u: rank(e.u)?,
            v: rank(e.v)?,
            o1: e.o1,
            o2: e.o2,
            multiplicity: e.multiplicity,
        });
    }
    BiGraph::from_kmers(vertices.k, vertices.vertices.clone(), out)
}

/// Per-stage record-touch counters for one construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub enumerate_touches: u64,
    pub edge_sort: SortStats,
    pub dedup_touches: u64,
    pub vertex_sort: SortStats,
    pub adjacency_touches: u64,
}

impl WorkCounters {
    pub fn total_touches(&self) -> u64 {
        self.enumerate_touches
            + self.edge_sort.record_touches
            + self.dedup_touches
            + self.vertex_sort.record_touches
            + self.adjacency_touches
    }

    pub fn total_passes(&self) -> u32 {
        self.edge_sort.passes + self.vertex_sort.passes
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub enumeration: EnumStats,
    pub dedup: DedupStats,
    pub work: WorkCounters,
}

/// Sequential in-memory construction: generate, sort, merge, collect, link.
pub fn biconstruct(reads: &ReadSet, k: usize) -> Result<(BiGraph, BuildReport)> {
    check_k(k)?;
    let (records, enumeration) = canonical_edges(reads.reads(), k)?;
    let (sorted, edge_sort) = sort_edges(records, k);
    let (unique, dedup) = dedup_count(sorted)?;
    let (vertices, vertex_sort) = collect_vertices(&unique);
    let g = build_adjacency(&vertices, &unique)?;
    let work = WorkCounters {
        enumerate_touches: enumeration.k1mers,
        edge_sort,
        dedup_touches: dedup.record_touches,
        vertex_sort,
        adjacency_touches: 2 * unique.len() as u64,
    };
    Ok((
        g,
        BuildReport {
            enumeration,
            dedup,
            work,
        },
    ))
}
