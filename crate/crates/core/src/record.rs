//! Fixed-width little-endian records shared by edge files and spill files.
//!
//! Edge record, 24 bytes:
//!
//! | offset | size | field                                      |
//! |--------|------|--------------------------------------------|
//! | 0      | 8    | packed canonical `u`                       |
//! | 8      | 8    | packed canonical `v`                       |
//! | 16     | 1    | flags: bit0 `o1`, bit1 `o2`, bit2 self-loop |
//! | 17     | 4    | multiplicity                               |
//! | 21     | 3    | reserved, zero                             |
//!
//! Files start with a 16-byte header: magic `BDBE`, version `u16`, `k` as
//! `u16`, record count `u64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::edgegen::{BiEdge, Orientation};
use crate::error::{Error, Result};
use crate::kmer::{check_k, Kmer};

pub const EDGE_MAGIC: [u8; 4] = *b"BDBE";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_SIZE: usize = 16;
/// Largest record size the sorter accepts.
pub const MAX_RECORD_SIZE: usize = 32;

/// A record with a fixed on-disk width.
pub trait FixedRecord: Sized {
    const SIZE: usize;
    fn write_to(&self, out: &mut [u8]);
    fn read_from(buf: &[u8]) -> Self;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeRecord {
    pub u: u64,
    pub v: u64,
    pub flags: u8,
    pub multiplicity: u32,
}

const FLAG_O1: u8 = 1;
const FLAG_O2: u8 = 2;
const FLAG_SELF: u8 = 4;

impl EdgeRecord {
    /// Sort key: `(u, v, o1, o2)`.
    pub fn key(&self) -> (u64, u64, u8) {
        (self.u, self.v, ((self.flags & FLAG_O1) << 1) | ((self.flags & FLAG_O2) >> 1))
    }

    pub fn to_edge(&self, k: usize) -> BiEdge {
        BiEdge {
            u: Kmer::from_word(self.u, k),
            v: Kmer::from_word(self.v, k),
            o1: Orientation::from_bit(self.flags & FLAG_O1),
            o2: Orientation::from_bit((self.flags & FLAG_O2) >> 1),
            multiplicity: self.multiplicity,
        }
    }
}

impl From<&BiEdge> for EdgeRecord {
    fn from(e: &BiEdge) -> Self {
        let mut flags = e.o1.bit() | (e.o2.bit() << 1);
        if e.is_self_loop() {
            flags |= FLAG_SELF;
        }
        EdgeRecord {
            u: e.u.word(),
            v: e.v.word(),
            flags,
            multiplicity: e.multiplicity,
        }
    }
}

impl FixedRecord for EdgeRecord {
    const SIZE: usize = 24;

    fn write_to(&self, out: &mut [u8]) {
        out[0..8].copy_from_slice(&self.u.to_le_bytes());
        out[8..16].copy_from_slice(&self.v.to_le_bytes());
        out[16] = self.flags;
        out[17..21].copy_from_slice(&self.multiplicity.to_le_bytes());
        out[21..24].fill(0);
    }

    fn read_from(buf: &[u8]) -> Self {
        EdgeRecord {
            u: u64::from_le_bytes(buf[0..8].try_into().unwrap()),
            v: u64::from_le_bytes(buf[8..16].try_into().unwrap()),
            flags: buf[16],
            multiplicity: u32::from_le_bytes(buf[17..21].try_into().unwrap()),
        }
    }
}

/// Generic `(x, y, payload)` record used by the out-of-core list ranker.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleRecord {
    pub x: u64,
    pub y: u64,
    pub payload: u64,
}

impl FixedRecord for TupleRecord {
    const SIZE: usize = 24;

    fn write_to(&self, out: &mut [u8]) {
        out[0..8].copy_from_slice(&self.x.to_le_bytes());
        out[8..16].copy_from_slice(&self.y.to_le_bytes());
        out[16..24].copy_from_slice(&self.payload.to_le_bytes());
    }

    fn read_from(buf: &[u8]) -> Self {
        TupleRecord {
            x: u64::from_le_bytes(buf[0..8].try_into().unwrap()),
            y: u64::from_le_bytes(buf[8..16].try_into().unwrap()),
            payload: u64::from_le_bytes(buf[16..24].try_into().unwrap()),
        }
    }
}

impl FixedRecord for u64 {
    const SIZE: usize = 8;

    fn write_to(&self, out: &mut [u8]) {
        out[..8].copy_from_slice(&self.to_le_bytes());
    }

    fn read_from(buf: &[u8]) -> Self {
        u64::from_le_bytes(buf[..8].try_into().unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FileHeader {
    pub version: u16,
    pub k: u16,
    pub count: u64,
}

impl FileHeader {
    pub fn new(k: usize, count: u64) -> Self {
        FileHeader {
            version: FORMAT_VERSION,
            k: k as u16,
            count,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_SIZE] {
        let mut b = [0u8; HEADER_SIZE];
        b[0..4].copy_from_slice(&EDGE_MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6..8].copy_from_slice(&self.k.to_le_bytes());
        b[8..16].copy_from_slice(&self.count.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_SIZE]) -> Option<Self> {
        if b[0..4] != EDGE_MAGIC {
            return None;
        }
        Some(FileHeader {
            version: u16::from_le_bytes([b[4], b[5]]),
            k: u16::from_le_bytes([b[6], b[7]]),
            count: u64::from_le_bytes(b[8..16].try_into().unwrap()),
        })
    }
}

pub fn write_edge_file(path: &Path, k: usize, edges: &[BiEdge]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut buf = [0u8; EdgeRecord::SIZE];
    let res = (|| {
        w.write_all(&FileHeader::new(k, edges.len() as u64).to_bytes())?;
        for e in edges {
            EdgeRecord::from(e).write_to(&mut buf);
            w.write_all(&buf)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_edge_file(path: &Path) -> Result<(usize, Vec<BiEdge>)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut hb = [0u8; HEADER_SIZE];
    r.read_exact(&mut hb).map_err(|e| Error::io(path, e))?;
    let h = FileHeader::from_bytes(&hb).ok_or_else(|| Error::format(path, 0, "bad edge file magic"))?;
    if h.version != FORMAT_VERSION {
        return Err(Error::format(path, 0, format!("unsupported version {}", h.version)));
    }
    let k = h.k as usize;
    check_k(k)?;
    let mut edges = Vec::with_capacity(h.count.min(1 << 24) as usize);
    let mut buf = [0u8; EdgeRecord::SIZE];
    for i in 0..h.count {
        r.read_exact(&mut buf)
            .map_err(|_| Error::format(path, i as usize + 1, "truncated edge record"))?;
        edges.push(EdgeRecord::read_from(&buf).to_edge(k));
    }
    Ok((k, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgegen::make_canonical_edge;

    #[test]
    fn edge_record_layout() {
        let mut e = make_canonical_edge(Kmer::pack(b"ATGG").unwrap());
        e.multiplicity = 0x0102_0304;
        let mut buf = [0xAAu8; 24];
        EdgeRecord::from(&e).write_to(&mut buf);
        assert_eq!(&buf[0..8], &e.u.word().to_le_bytes());
        assert_eq!(&buf[8..16], &e.v.word().to_le_bytes());
        // o1 = Fwd (0), o2 = Rev (1), not a self-loop
        assert_eq!(buf[16], 0b010);
        assert_eq!(&buf[17..21], &[4, 3, 2, 1]);
        assert_eq!(&buf[21..24], &[0, 0, 0]);
        assert_eq!(EdgeRecord::read_from(&buf).to_edge(3), e);
    }

    #[test]
    fn record_key_follows_edge_order() {
        let edges: Vec<BiEdge> = ["ATGG", "ATGT", "CATG", "ACAT", "ATGC", "GCAT"]
            .iter()
            .map(|s| make_canonical_edge(Kmer::pack(s.as_bytes()).unwrap()))
            .collect();
        for a in &edges {
            for b in &edges {
                let (ra, rb) = (EdgeRecord::from(a), EdgeRecord::from(b));
                assert_eq!(ra.key().cmp(&rb.key()), a.sort_key().cmp(&b.sort_key()));
            }
        }
    }

    #[test]
    fn self_loop_flag() {
        let e = make_canonical_edge(Kmer::pack(b"AAAA").unwrap());
        assert_eq!(EdgeRecord::from(&e).flags & FLAG_SELF, FLAG_SELF);
    }

    #[test]
    fn header_round_trip() {
        let h = FileHeader::new(31, 12345);
        let b = h.to_bytes();
        assert_eq!(&b[0..4], b"BDBE");
        assert_eq!(FileHeader::from_bytes(&b), Some(h));
        let mut bad = b;
        bad[0] = b'X';
        assert_eq!(FileHeader::from_bytes(&bad), None);
    }

    #[test]
    fn edge_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.bin");
        let edges: Vec<BiEdge> = ["ATGG", "GGAC", "AAAA"]
            .iter()
            .map(|s| make_canonical_edge(Kmer::pack(s.as_bytes()).unwrap()))
            .collect();
        write_edge_file(&p, 3, &edges).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 + 3 * 24);
        assert_eq!(read_edge_file(&p).unwrap(), (3, edges));
    }

    #[test]
    fn tuple_round_trip() {
        let t = TupleRecord { x: 1, y: u64::MAX, payload: 42 };
        let mut buf = [0u8; 24];
        t.write_to(&mut buf);
        assert_eq!(TupleRecord::read_from(&buf), t);
    }
}
