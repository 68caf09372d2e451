#![allow(dead_code)]

use bidb::ReadSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_seq(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
}

/// `n` reads with lengths drawn from `lens`.
pub fn random_reads(rng: &mut ChaCha8Rng, n: usize, lens: std::ops::RangeInclusive<usize>) -> ReadSet {
    ReadSet::from_seqs((0..n).map(|_| {
        let len = rng.gen_range(lens.clone());
        random_seq(rng, len)
    }))
}

/// Reads of length `len` totalling about `symbols` symbols.
pub fn reads_of_size(seed: u64, symbols: usize, len: usize) -> ReadSet {
    let mut r = rng(seed);
    ReadSet::from_seqs((0..symbols.div_ceil(len)).map(|_| random_seq(&mut r, len)))
}

/// Reads sampled from one random genome, so chains and repeats show up.
pub fn genome_reads(rng: &mut ChaCha8Rng, genome: usize, n: usize, len: usize) -> ReadSet {
    let g = random_seq(rng, genome.max(len));
    ReadSet::from_seqs((0..n).map(|_| {
        let s = rng.gen_range(0..=g.len() - len);
        let piece = g[s..s + len].to_vec();
        if rng.gen_bool(0.5) {
            bidb::kmer::reverse_complement_str(&piece)
        } else {
            piece
        }
    }))
}
