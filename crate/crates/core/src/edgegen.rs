//! Canonical bi-directed edge generation from `(k+1)`-mers.

use std::fmt;

use crate::error::Result;
use crate::kmer::{check_k, encode_base, reverse_complement_str, Kmer, Strand};

/// Arrow head of a bi-directed edge at one endpoint.
///
/// Traversing an edge out of a vertex whose head is `Fwd` leaves that vertex
/// on its positive strand; `Rev` leaves on the negative strand. At the far
/// endpoint `Fwd` means the walk arrives on the positive strand.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Orientation {
    Fwd,
    Rev,
}

impl Orientation {
    #[inline]
    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Fwd => Orientation::Rev,
            Orientation::Rev => Orientation::Fwd,
        }
    }

    #[inline]
    pub fn strand(self) -> Strand {
        match self {
            Orientation::Fwd => Strand::Pos,
            Orientation::Rev => Strand::Neg,
        }
    }

    #[inline]
    pub fn from_strand(s: Strand) -> Orientation {
        match s {
            Strand::Pos => Orientation::Fwd,
            Strand::Neg => Orientation::Rev,
        }
    }

    #[inline]
    pub fn bit(self) -> u8 {
        match self {
            Orientation::Fwd => 0,
            Orientation::Rev => 1,
        }
    }

    #[inline]
    pub fn from_bit(b: u8) -> Orientation {
        if b & 1 == 0 {
            Orientation::Fwd
        } else {
            Orientation::Rev
        }
    }

    pub fn glyph(self) -> char {
        match self {
            Orientation::Fwd => '▷',
            Orientation::Rev => '◁',
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.glyph())
    }
}

/// Smaller of the two equivalent orientation pairs of a self-loop.
#[inline]
pub(crate) fn self_loop_orientations(o1: Orientation, o2: Orientation) -> (Orientation, Orientation) {
    let alt = (o2.flip(), o1.flip());
    if alt < (o1, o2) {
        alt
    } else {
        (o1, o2)
    }
}

/// A canonical bi-directed edge record.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BiEdge {
    pub u: Kmer,
    pub v: Kmer,
    /// Head at `u`.
    pub o1: Orientation,
    /// Head at `v`.
    pub o2: Orientation,
    pub multiplicity: u32,
}

impl BiEdge {
    pub fn new(u: Kmer, v: Kmer, o1: Orientation, o2: Orientation) -> BiEdge {
        BiEdge {
            u,
            v,
            o1,
            o2,
            multiplicity: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.u.len()
    }

    #[inline]
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    /// The same bi-directed edge written from the other endpoint.
    #[inline]
    pub fn reversed(&self) -> BiEdge {
        BiEdge {
            u: self.v,
            v: self.u,
            o1: self.o2.flip(),
            o2: self.o1.flip(),
            multiplicity: self.multiplicity,
        }
    }

    /// Picks the stored representative: `u <= v`, and for self-loops the
    /// smaller orientation pair.
    pub fn normalized(&self) -> BiEdge {
        if self.u > self.v {
            self.reversed()
        } else if self.u == self.v {
            let (o1, o2) = self_loop_orientations(self.o1, self.o2);
            BiEdge { o1, o2, ..*self }
        } else {
            *self
        }
    }

    /// Fixed-width sort key `(u, v, o1, o2)`, occupying the low `4k + 2` bits.
    #[inline]
    pub fn sort_key(&self) -> u128 {
        let k = self.k() as u32;
        ((self.u.word() as u128) << (2 * k + 2))
            | ((self.v.word() as u128) << 2)
            | ((self.o1.bit() as u128) << 1)
            | self.o2.bit() as u128
    }

    #[inline]
    pub fn same_key(&self, other: &BiEdge) -> bool {
        self.u == other.u && self.v == other.v && self.o1 == other.o1 && self.o2 == other.o2
    }
}

impl fmt::Display for BiEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}) x{}",
            self.u, self.v, self.o1, self.o2, self.multiplicity
        )
    }
}

/// Maps one `(k+1)`-mer to its canonical edge.
///
/// With `x = z[..k]`, `y = z[1..]` the four cases of whether `x` and `y` are
/// canonical decide the heads; when `x̂ > ŷ` the edge is written from `ŷ`
/// with both heads flipped and swapped. For self-loops (`x̂ = ŷ`) the two
/// equivalent writings are reduced to the smaller orientation pair so the
/// result does not depend on which strand the window was read from.
pub fn make_canonical_edge(z: Kmer) -> BiEdge {
    use Orientation::{Fwd, Rev};
    let k = z.len() - 1;
    let x = z.prefix(k);
    let y = z.suffix(k);
    let cx = x.canonicalize();
    let cy = y.canonicalize();
    let (xh, yh) = (cx.kmer, cy.kmer);
    let le = xh <= yh;
    let edge = match (cx.strand_of_original, cy.strand_of_original) {
        (Strand::Pos, Strand::Pos) => {
            if le {
                BiEdge::new(xh, yh, Fwd, Fwd)
            } else {
                BiEdge::new(yh, xh, Rev, Rev)
            }
        }
        (Strand::Neg, Strand::Pos) => {
            if le {
                BiEdge::new(xh, yh, Rev, Fwd)
            } else {
                BiEdge::new(yh, xh, Rev, Fwd)
            }
        }
        (Strand::Pos, Strand::Neg) => {
            if le {
                BiEdge::new(xh, yh, Fwd, Rev)
            } else {
                BiEdge::new(yh, xh, Fwd, Rev)
            }
        }
        (Strand::Neg, Strand::Neg) => {
            if le {
                BiEdge::new(xh, yh, Rev, Rev)
            } else {
                BiEdge::new(yh, xh, Fwd, Fwd)
            }
        }
    };
    if edge.is_self_loop() {
        edge.normalized()
    } else {
        edge
    }
}

/// Input reads, split at ambiguous symbols into clean `ACGT` fragments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReadSet {
    reads: Vec<Vec<u8>>,
    /// Records that contained at least one ambiguous symbol.
    pub split_records: usize,
    /// Fragments produced from split records.
    pub split_fragments: usize,
    /// Reads removed by [`ReadSet::filter_short`].
    pub skipped_short: usize,
}

impl ReadSet {
    pub fn new() -> ReadSet {
        ReadSet::default()
    }

    /// Builds a read set from clean or ambiguous sequences.
    pub fn from_seqs<I, S>(seqs: I) -> ReadSet
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut rs = ReadSet::new();
        for s in seqs {
            rs.push(s.as_ref());
        }
        rs
    }

    /// Adds one record. Lower case is folded; any non-`ACGT` symbol splits
    /// the record, and empty pieces are dropped.
    pub fn push(&mut self, seq: &[u8]) {
        let upper: Vec<u8> = seq.iter().map(|b| b.to_ascii_uppercase()).collect();
        if upper.iter().all(|&b| encode_base(b).is_some()) {
            if !upper.is_empty() {
                self.reads.push(upper);
            }
            return;
        }
        self.split_records += 1;
        for piece in upper.split(|&b| encode_base(b).is_none()) {
            if !piece.is_empty() {
                self.split_fragments += 1;
                self.reads.push(piece.to_vec());
            }
        }
    }

    /// Drops reads shorter than `min_len`, counting them.
    pub fn filter_short(&mut self, min_len: usize) {
        let before = self.reads.len();
        self.reads.retain(|r| r.len() >= min_len);
        self.skipped_short += before - self.reads.len();
    }

    pub fn reads(&self) -> &[Vec<u8>] {
        &self.reads
    }

    /// `N`, the number of accepted reads.
    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    /// `n`, the total number of symbols over accepted reads.
    pub fn n_symbols(&self) -> u64 {
        self.reads.iter().map(|r| r.len() as u64).sum()
    }

    pub fn reverse_complements(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        self.reads.iter().map(|r| reverse_complement_str(r))
    }

    /// Splits into at most `p` contiguous slices of near-equal read count.
    pub fn partition(&self, p: usize) -> Vec<&[Vec<u8>]> {
        let p = p.max(1);
        let n = self.reads.len();
        (0..p)
            .map(|i| &self.reads[i * n / p..(i + 1) * n / p])
            .collect()
    }
}

/// Counters from one enumeration pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// `(k+1)`-mers emitted, over reads and their reverse complements.
    pub k1mers: u64,
    /// Reads too short to hold one `(k+1)`-mer.
    pub skipped_short: u64,
}

/// Streams every `(k+1)`-mer of each read, then of its reverse complement.
pub struct K1mers<'a> {
    reads: &'a [Vec<u8>],
    k: usize,
    next_read: usize,
    buf: Vec<u8>,
    rc_pending: bool,
    pos: usize,
    word: u64,
    stats: EnumStats,
}

impl<'a> K1mers<'a> {
    pub fn new(reads: &'a [Vec<u8>], k: usize) -> Result<K1mers<'a>> {
        check_k(k)?;
        Ok(K1mers {
            reads,
            k,
            next_read: 0,
            buf: Vec::new(),
            rc_pending: false,
            pos: 0,
            word: 0,
            stats: EnumStats::default(),
        })
    }

    pub fn stats(&self) -> EnumStats {
        self.stats
    }

    fn load(&mut self) -> bool {
        let w = self.k + 1;
        loop {
            if self.rc_pending {
                self.rc_pending = false;
                self.buf = reverse_complement_str(&self.reads[self.next_read - 1]);
            } else {
                let Some(r) = self.reads.get(self.next_read) else {
                    return false;
                };
                self.next_read += 1;
                if r.len() < w {
                    self.stats.skipped_short += 1;
                    continue;
                }
                self.buf.clear();
                self.buf.extend_from_slice(r);
                self.rc_pending = true;
            }
            self.word = 0;
            for &b in &self.buf[..w - 1] {
                self.word = (self.word << 2) | encode_base(b).expect("ReadSet holds ACGT only");
            }
            self.pos = w - 1;
            return true;
        }
    }
}

impl Iterator for K1mers<'_> {
    type Item = Kmer;

    fn next(&mut self) -> Option<Kmer> {
        while self.pos >= self.buf.len() {
            if !self.load() {
                return None;
            }
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        self.word = (self.word << 2) | encode_base(b).expect("ReadSet holds ACGT only");
        self.stats.k1mers += 1;
        Some(Kmer::from_word(self.word, self.k + 1))
    }
}

/// Streams the `(k+1)`-mers of `R*` for a read set.
pub fn enumerate_k1mers(reads: &ReadSet, k: usize) -> Result<K1mers<'_>> {
    K1mers::new(reads.reads(), k)
}

/// Enumerates and maps every `(k+1)`-mer of `reads` to its canonical edge.
pub fn canonical_edges(reads: &[Vec<u8>], k: usize) -> Result<(Vec<BiEdge>, EnumStats)> {
    let mut it = K1mers::new(reads, k)?;
    let edges: Vec<BiEdge> = it.by_ref().map(make_canonical_edge).collect();
    Ok((edges, it.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmer::ALPHABET;
    use proptest::prelude::*;
    use Orientation::{Fwd, Rev};

    fn km(s: &str) -> Kmer {
        Kmer::pack(s.as_bytes()).unwrap()
    }

    fn edge(z: &str) -> BiEdge {
        make_canonical_edge(km(z))
    }

    fn tuple(e: &BiEdge) -> (String, String, Orientation, Orientation) {
        (e.u.decode(), e.v.decode(), e.o1, e.o2)
    }

    #[test]
    fn case_table_examples() {
        let atgg = edge("ATGG");
        assert_eq!(tuple(&atgg), ("ATG".into(), "CCA".into(), Fwd, Rev));
        let ccat = edge("CCAT");
        assert_eq!(atgg, ccat);
        assert_eq!(tuple(&edge("GGAC")), ("GAC".into(), "GGA".into(), Rev, Rev));
    }

    #[test]
    fn enumerates_read_and_reverse_complement() {
        let rs = ReadSet::from_seqs(["ATGG"]);
        let got: Vec<String> = enumerate_k1mers(&rs, 3).unwrap().map(|z| z.decode()).collect();
        assert_eq!(got, ["ATGG", "CCAT"]);
    }

    #[test]
    fn short_reads_are_skipped() {
        let rs = ReadSet::from_seqs(["ATG"]);
        let mut it = enumerate_k1mers(&rs, 3).unwrap();
        assert_eq!(it.next(), None);
        assert_eq!(it.stats().skipped_short, 1);
    }

    #[test]
    fn figure_reads_give_twelve_windows() {
        let rs = ReadSet::from_seqs(["ATGG", "CCAT", "GGAC", "GTTC", "TGGA", "TGGT"]);
        let mut it = enumerate_k1mers(&rs, 3).unwrap();
        assert_eq!(it.by_ref().count(), 12);
        assert_eq!(it.stats().k1mers, 12);
    }

    #[test]
    fn read_set_splits_ambiguous_symbols() {
        let rs = ReadSet::from_seqs(["ACGTNNacgtA", "GGG"]);
        assert_eq!(rs.reads(), &[b"ACGT".to_vec(), b"ACGTA".to_vec(), b"GGG".to_vec()]);
        assert_eq!(rs.split_records, 1);
        assert_eq!(rs.split_fragments, 2);
        assert_eq!(rs.n_symbols(), 12);
    }

    #[test]
    fn homopolymer_self_loop_is_strand_symmetric() {
        let a = edge("AAAA");
        let t = edge("TTTT");
        assert_eq!(a, t);
        assert!(a.is_self_loop());
        assert_eq!((a.o1, a.o2), (Fwd, Fwd));
    }

    fn dna(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(proptest::sample::select(ALPHABET.to_vec()), len)
    }

    fn window() -> impl Strategy<Value = Vec<u8>> {
        (1usize..=15).prop_flat_map(|h| dna(2 * h + 2..=2 * h + 2))
    }

    proptest! {
        #[test]
        fn rc_symmetry(z in window()) {
            let z = Kmer::pack(&z).unwrap();
            prop_assert_eq!(make_canonical_edge(z), make_canonical_edge(z.reverse_complement()));
        }

        #[test]
        fn endpoints_are_canonical_and_ordered(z in window()) {
            let e = make_canonical_edge(Kmer::pack(&z).unwrap());
            prop_assert!(e.u <= e.v);
            prop_assert!(e.u.is_canonical());
            prop_assert!(e.v.is_canonical());
            prop_assert_eq!(e.normalized(), e);
            prop_assert_eq!(e.reversed().normalized(), e);
            prop_assert_eq!(e.reversed().reversed(), e);
        }

        #[test]
        fn edge_spells_its_window(z in window()) {
            // Walking u -> v on the strands named by the heads reproduces z or rc(z).
            let zk = Kmer::pack(&z).unwrap();
            let e = make_canonical_edge(zk);
            let k = e.k();
            let a = e.u.oriented(e.o1.strand());
            let b = e.v.oriented(e.o2.strand());
            prop_assert_eq!(a.suffix(k - 1), b.prefix(k - 1));
            let mut s = a.decode();
            s.push(b.base(k - 1) as char);
            prop_assert!(s == zk.decode() || s == zk.reverse_complement().decode());
        }
    }
}
