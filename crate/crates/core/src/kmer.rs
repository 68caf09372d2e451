//! 2-bit packed DNA words.
//!
//! Symbols are packed most-significant first with `A=00, C=01, G=10, T=11`,
//! so comparing two packed words of equal length is the same as comparing
//! the decoded strings lexicographically. That property is what lets the
//! edge sorter run a plain radix sort over raw words.
//!
//! Vertex k-mers must have odd `k` in `3..=MAX_K`. The odd length guarantees
//! that no k-mer equals its own reverse complement. Edge windows of length
//! `k + 1` (up to 32 symbols) use [`Kmer::pack`], which skips the parity rule.
//! Values of `k` above `MAX_K` would need a multi-word representation; the
//! sort key and record layouts assume one 64-bit word per endpoint.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported vertex length. A `(k+1)`-mer still fits one `u64`.
pub const MAX_K: usize = 31;

/// Longest word [`Kmer::pack`] accepts.
pub const MAX_WORD_LEN: usize = 32;

pub const ALPHABET: [u8; 4] = [b'A', b'C', b'G', b'T'];

#[inline]
pub fn encode_base(b: u8) -> Option<u64> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

#[inline]
pub fn decode_base(code: u64) -> u8 {
    ALPHABET[(code & 3) as usize]
}

#[inline]
pub fn complement_base(b: u8) -> u8 {
    match b {
        b'A' => b'T',
        b'C' => b'G',
        b'G' => b'C',
        b'T' => b'A',
        other => other,
    }
}

/// Reverse complement of an ASCII DNA string.
pub fn reverse_complement_str(s: &[u8]) -> Vec<u8> {
    s.iter().rev().map(|&b| complement_base(b)).collect()
}

/// Validates a vertex length.
pub fn check_k(k: usize) -> Result<()> {
    if k % 2 == 1 && (3..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidK(k))
    }
}

#[inline]
fn mask(len: usize) -> u64 {
    if len >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * len)) - 1
    }
}

/// Which strand of its molecule a k-mer spells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strand {
    /// The canonical (lexicographically smaller) strand.
    Pos,
    Neg,
}

impl Strand {
    #[inline]
    pub fn flip(self) -> Strand {
        match self {
            Strand::Pos => Strand::Neg,
            Strand::Neg => Strand::Pos,
        }
    }

    #[inline]
    pub fn index(self) -> u32 {
        match self {
            Strand::Pos => 0,
            Strand::Neg => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Strand::Pos => '+',
            Strand::Neg => '-',
        }
    }
}

/// A packed DNA word of up to 32 symbols.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kmer {
    word: u64,
    len: u8,
}

impl Kmer {
    /// Packs a vertex k-mer. `s.len()` must be odd and within `3..=MAX_K`.
    pub fn encode(s: &[u8]) -> Result<Kmer> {
        check_k(s.len())?;
        Kmer::pack(s)
    }

    /// Packs a word of any length in `1..=32` without the parity rule.
    pub fn pack(s: &[u8]) -> Result<Kmer> {
        if s.is_empty() || s.len() > MAX_WORD_LEN {
            return Err(Error::InvalidK(s.len()));
        }
        let mut word = 0u64;
        for (offset, &b) in s.iter().enumerate() {
            let code = encode_base(b).ok_or(Error::InvalidSymbol {
                offset,
                symbol: b as char,
            })?;
            word = (word << 2) | code;
        }
        Ok(Kmer {
            word,
            len: s.len() as u8,
        })
    }

    /// Builds a word from its packed form. Bits above `2 * len` are cleared.
    #[inline]
    pub fn from_word(word: u64, len: usize) -> Kmer {
        debug_assert!((1..=MAX_WORD_LEN).contains(&len));
        Kmer {
            word: word & mask(len),
            len: len as u8,
        }
    }

    #[inline]
    pub fn word(self) -> u64 {
        self.word
    }

    #[inline]
    pub fn len(self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Symbol at position `i` (0-based, leftmost first).
    #[inline]
    pub fn base(self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        decode_base(self.word >> (2 * (self.len() - 1 - i)))
    }

    pub fn decode(self) -> String {
        let bytes: Vec<u8> = (0..self.len()).map(|i| self.base(i)).collect();
        String::from_utf8(bytes).expect("ACGT is ASCII")
    }

    /// First `len` symbols.
    #[inline]
    pub fn prefix(self, len: usize) -> Kmer {
        debug_assert!(len >= 1 && len <= self.len());
        Kmer::from_word(self.word >> (2 * (self.len() - len)), len)
    }

    /// Last `len` symbols.
    #[inline]
    pub fn suffix(self, len: usize) -> Kmer {
        debug_assert!(len >= 1 && len <= self.len());
        Kmer::from_word(self.word, len)
    }

    /// Reverse complement via complement-then-reverse of the 2-bit groups.
    #[inline]
    pub fn reverse_complement(self) -> Kmer {
        let mut x = !self.word;
        x = ((x >> 2) & 0x3333_3333_3333_3333) | ((x & 0x3333_3333_3333_3333) << 2);
        x = ((x >> 4) & 0x0F0F_0F0F_0F0F_0F0F) | ((x & 0x0F0F_0F0F_0F0F_0F0F) << 4);
        x = x.swap_bytes();
        Kmer::from_word(x >> (64 - 2 * self.len()), self.len())
    }

    #[inline]
    pub fn canonicalize(self) -> CanonicalKmer {
        let rc = self.reverse_complement();
        if self <= rc {
            CanonicalKmer {
                kmer: self,
                strand_of_original: Strand::Pos,
            }
        } else {
            CanonicalKmer {
                kmer: rc,
                strand_of_original: Strand::Neg,
            }
        }
    }

    #[inline]
    pub fn is_canonical(self) -> bool {
        self <= self.reverse_complement()
    }

    /// The word as read on `strand`, taking `self` as the positive strand.
    #[inline]
    pub fn oriented(self, strand: Strand) -> Kmer {
        match strand {
            Strand::Pos => self,
            Strand::Neg => self.reverse_complement(),
        }
    }
}

impl fmt::Display for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.decode())
    }
}

impl fmt::Debug for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kmer({})", self.decode())
    }
}

/// A k-mer reduced to its canonical form, remembering where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalKmer {
    pub kmer: Kmer,
    pub strand_of_original: Strand,
}

/// The vertex unit: a canonical k-mer together with its reverse complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Molecule {
    pub canonical: Kmer,
    pub complement: Kmer,
}

impl Molecule {
    pub fn of(kmer: Kmer) -> Molecule {
        let canonical = kmer.canonicalize().kmer;
        Molecule {
            canonical,
            complement: canonical.reverse_complement(),
        }
    }
}

/// All `|s| - k + 1` windows of `s`, left to right, duplicates kept.
pub fn spectrum(s: &[u8], k: usize) -> Result<Vec<Kmer>> {
    check_k(k)?;
    if s.len() < k {
        return Err(Error::TooShort { len: s.len(), k });
    }
    let first = Kmer::encode(&s[..k])?;
    let mut out = Vec::with_capacity(s.len() - k + 1);
    out.push(first);
    let mut word = first.word();
    for (i, &b) in s.iter().enumerate().skip(k) {
        let code = encode_base(b).ok_or(Error::InvalidSymbol {
            offset: i,
            symbol: b as char,
        })?;
        word = (word << 2) | code;
        out.push(Kmer::from_word(word, k));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_rc(s: &str) -> String {
        String::from_utf8(reverse_complement_str(s.as_bytes())).unwrap()
    }

    fn km(s: &str) -> Kmer {
        Kmer::encode(s.as_bytes()).unwrap()
    }

    #[test]
    fn round_trips() {
        assert_eq!(km("AAA").decode(), "AAA");
        assert_eq!(km("ATG").decode(), "ATG");
        assert_eq!(km("AAGTA").decode(), "AAGTA");
    }

    #[test]
    fn rejects_even_and_out_of_range_k() {
        assert!(matches!(Kmer::encode(b"AAGT"), Err(Error::InvalidK(4))));
        assert!(matches!(Kmer::encode(b"A"), Err(Error::InvalidK(1))));
        let long = vec![b'A'; 33];
        assert!(matches!(Kmer::encode(&long), Err(Error::InvalidK(33))));
    }

    #[test]
    fn invalid_symbol_carries_offset() {
        match Kmer::encode(b"ACNGT") {
            Err(Error::InvalidSymbol { offset, symbol }) => {
                assert_eq!(offset, 2);
                assert_eq!(symbol, 'N');
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(km("AAGTA").reverse_complement().decode(), "TACTT");
        assert_eq!(km("AAA").reverse_complement().decode(), "TTT");
        assert_eq!(naive_rc("ATGCA"), "TGCAT");
        assert_eq!(km("ATGCA").reverse_complement().decode(), "TGCAT");
        let w = Kmer::pack(&[b'G'; 32]).unwrap();
        assert_eq!(w.reverse_complement().decode(), "C".repeat(32));
    }

    #[test]
    fn canonicalize_examples() {
        let c = km("GGA").canonicalize();
        assert_eq!(c.kmer.decode(), "GGA");
        assert_eq!(c.strand_of_original, Strand::Pos);
        let c = km("TGG").canonicalize();
        assert_eq!(c.kmer.decode(), "CCA");
        assert_eq!(c.strand_of_original, Strand::Neg);
        let m = Molecule::of(km("TCC"));
        assert_eq!(m.canonical.decode(), "GGA");
        assert_eq!(m.complement.decode(), "TCC");
    }

    #[test]
    fn spectrum_examples() {
        let s: Vec<String> = spectrum(b"ATGG", 3).unwrap().iter().map(|k| k.decode()).collect();
        assert_eq!(s, ["ATG", "TGG"]);
        assert_eq!(spectrum(b"ATG", 3).unwrap().len(), 1);
        let s: Vec<String> = spectrum(b"ATGGACCAT", 3)
            .unwrap()
            .iter()
            .map(|k| k.decode())
            .collect();
        assert_eq!(s, ["ATG", "TGG", "GGA", "GAC", "ACC", "CCA", "CAT"]);
        assert!(matches!(spectrum(b"AT", 3), Err(Error::TooShort { len: 2, k: 3 })));
    }

    #[test]
    fn prefix_and_suffix() {
        let z = Kmer::pack(b"ATGG").unwrap();
        assert_eq!(z.prefix(3).decode(), "ATG");
        assert_eq!(z.suffix(3).decode(), "TGG");
    }

    fn dna(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = String> {
        proptest::collection::vec(proptest::sample::select(vec!['A', 'C', 'G', 'T']), len)
            .prop_map(|v| v.into_iter().collect())
    }

    fn odd_kmer() -> impl Strategy<Value = String> {
        (1usize..=15).prop_flat_map(|h| dna(2 * h + 1..=2 * h + 1))
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(s in odd_kmer()) {
            prop_assert_eq!(km(&s).decode(), s);
        }

        #[test]
        fn rc_matches_string_oracle_and_is_involution(s in odd_kmer()) {
            let x = km(&s);
            prop_assert_eq!(x.reverse_complement().decode(), naive_rc(&s));
            prop_assert_eq!(x.reverse_complement().reverse_complement(), x);
            prop_assert_ne!(x, x.reverse_complement());
        }

        #[test]
        fn canonical_form_is_strand_stable(s in odd_kmer()) {
            let x = km(&s);
            let a = x.canonicalize();
            let b = x.reverse_complement().canonicalize();
            prop_assert_eq!(a.kmer, b.kmer);
            prop_assert_ne!(a.strand_of_original, b.strand_of_original);
            prop_assert!(a.kmer <= a.kmer.reverse_complement());
        }

        #[test]
        fn packed_order_is_string_order((a, b) in (1usize..=15).prop_flat_map(|h| (dna(2*h+1..=2*h+1), dna(2*h+1..=2*h+1)))) {
            prop_assert_eq!(km(&a).cmp(&km(&b)), a.cmp(&b));
        }
    }
}
