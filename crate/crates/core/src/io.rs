//! Read ingestion, GFA and native graph files, and summary statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::edgegen::{Orientation, ReadSet};
use crate::error::{Error, Result};
use crate::graph::{BiGraph, Edge, NodeLabel};
use crate::kmer::{Kmer, Strand};

fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let head = r.fill_buf().map_err(|e| Error::io(path, e))?;
    if head.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(r))))
    } else {
        Ok(Box::new(r))
    }
}

struct Lines<'a> {
    r: Box<dyn BufRead>,
    path: &'a Path,
    line: usize,
    buf: Vec<u8>,
}

impl Lines<'_> {
    /// Next line without its terminator, or `None` at end of input.
    fn next(&mut self) -> Result<Option<&[u8]>> {
        self.buf.clear();
        let n = self
            .r
            .read_until(b'\n', &mut self.buf)
            .map_err(|e| Error::io(self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
            self.buf.pop();
        }
        Ok(Some(&self.buf))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.path, self.line, msg)
    }
}

fn check_sequence(lines: &Lines<'_>, seq: &[u8]) -> Result<()> {
    match seq.iter().find(|b| !(b.is_ascii_alphabetic() || **b == b'-' || **b == b'*')) {
        Some(&b) => Err(lines.err(format!("invalid sequence character {:?}", b as char))),
        None => Ok(()),
    }
}

fn read_fasta(lines: &mut Lines<'_>, first: Vec<u8>, out: &mut ReadSet) -> Result<usize> {
    let mut records = 0;
    let mut seq: Option<Vec<u8>> = None;
    let mut cur = Some(first);
    while let Some(l) = cur {
        if l.first() == Some(&b'>') {
            if let Some(s) = seq.take() {
                out.push(&s);
            }
            records += 1;
            seq = Some(Vec::new());
        } else if !l.is_empty() {
            let Some(s) = seq.as_mut() else {
                return Err(lines.err("sequence before the first header"));
            };
            check_sequence(lines, &l)?;
            s.extend_from_slice(&l);
        }
        cur = lines.next()?.map(|l| l.to_vec());
    }
    if let Some(s) = seq {
        out.push(&s);
    }
    Ok(records)
}

fn read_fastq(lines: &mut Lines<'_>, first: Vec<u8>, out: &mut ReadSet) -> Result<usize> {
    let mut records = 0;
    let mut cur = Some(first);
    while let Some(h) = cur {
        if h.is_empty() {
            cur = lines.next()?.map(|l| l.to_vec());
            continue;
        }
        if h[0] != b'@' {
            return Err(lines.err("expected '@' record header"));
        }
        let seq = lines
            .next()?
            .map(|l| l.to_vec())
            .ok_or_else(|| lines.err("record ends after its header"))?;
        check_sequence(lines, &seq)?;
        match lines.next()? {
            Some(l) if l.first() == Some(&b'+') => {}
            _ => return Err(lines.err("expected '+' separator line")),
        }
        let qual_len = lines
            .next()?
            .map(|l| l.len())
            .ok_or_else(|| lines.err("record ends before its quality line"))?;
        if qual_len != seq.len() {
            return Err(lines.err(format!(
                "quality length {qual_len} differs from sequence length {}",
                seq.len()
            )));
        }
        out.push(&seq);
        records += 1;
        cur = lines.next()?.map(|l| l.to_vec());
    }
    Ok(records)
}

/// Counters from [`read_sequences`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub files: usize,
    /// FASTA or FASTQ records seen.
    pub records: usize,
}

/// Loads FASTA or FASTQ files, plain or gzip, detected from their content.
pub fn read_sequences<P: AsRef<Path>>(paths: &[P]) -> Result<(ReadSet, IngestStats)> {
    let mut rs = ReadSet::new();
    let mut stats = IngestStats::default();
    for p in paths {
        let path = p.as_ref();
        let mut lines = Lines {
            r: open_text(path)?,
            path,
            line: 0,
            buf: Vec::new(),
        };
        stats.files += 1;
        let first = loop {
            match lines.next()? {
                None => break None,
                Some(l) if l.iter().all(u8::is_ascii_whitespace) => continue,
                Some(l) => break Some(l.to_vec()),
            }
        };
        let Some(first) = first else { continue };
        stats.records += match first[0] {
            b'>' => read_fasta(&mut lines, first, &mut rs)?,
            b'@' => read_fastq(&mut lines, first, &mut rs)?,
            _ => return Err(lines.err("neither FASTA ('>') nor FASTQ ('@') input")),
        };
    }
    Ok((rs, stats))
}

fn glyph(o: Orientation) -> char {
    match o.strand() {
        Strand::Pos => '+',
        Strand::Neg => '-',
    }
}

/// GFA 1 text: a header, one `S` line per node in id order, then one `L`
/// line per edge. Segment names are the positive-strand labels; an edge's
/// heads become the segment orientations, so `L u + v -` reads "u, then the
/// reverse complement of v, overlapping by k-1".
pub fn gfa_string(g: &BiGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "H\tVN:Z:1.0\tKM:i:{}", g.k());
    for (v, l) in g.labels().iter().enumerate() {
        let name = l.as_string();
        let _ = writeln!(
            s,
            "S\t{name}\t{name}\tLN:i:{}\tMC:i:{}\tKC:i:{}",
            name.len(),
            g.member_count(v as u32),
            g.node_multiplicity(v as u32)
        );
    }
    for e in g.edges() {
        let _ = writeln!(
            s,
            "L\t{}\t{}\t{}\t{}\t{}M\tRC:i:{}",
            g.label(e.u).as_string(),
            glyph(e.o1),
            g.label(e.v).as_string(),
            glyph(e.o2),
            g.k() - 1,
            e.multiplicity
        );
    }
    s
}

pub fn write_gfa(g: &BiGraph, path: &Path) -> Result<()> {
    std::fs::write(path, gfa_string(g)).map_err(|e| Error::io(path, e))
}

fn label_of(seq: &str, k: usize) -> Result<NodeLabel> {
    if seq.len() == k {
        Ok(NodeLabel::Kmer(Kmer::pack(seq.as_bytes())?))
    } else {
        Ok(NodeLabel::Seq(seq.to_string()))
    }
}

fn tag<'a>(fields: &[&'a str], name: &str) -> Option<&'a str> {
    fields.iter().find_map(|f| f.strip_prefix(name))
}

/// Parses GFA written by [`write_gfa`] back into a graph.
pub fn read_gfa(path: &Path) -> Result<BiGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::format(path, line, msg);
    let mut k = None;
    let mut segs: Vec<(String, u32, u64)> = Vec::new();
    let mut links: Vec<(usize, String, Orientation, String, Orientation, u32)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let f: Vec<&str> = line.split('\t').collect();
        let ori = |s: &str| match s {
            "+" => Ok(Orientation::Fwd),
            "-" => Ok(Orientation::Rev),
            _ => Err(bad(n, "orientation must be + or -")),
        };
        let num = |s: Option<&str>, default: u64| -> Result<u64> {
            s.map_or(Ok(default), |v| v.parse().map_err(|_| bad(n, "bad integer tag")))
        };
        match f[0] {
            "" => {}
            "H" => {
                let km = tag(&f, "KM:i:").ok_or_else(|| bad(n, "header lacks KM:i"))?;
                k = Some(km.parse::<usize>().map_err(|_| bad(n, "bad KM:i"))?);
            }
            "S" if f.len() >= 3 => {
                segs.push((
                    f[2].to_string(),
                    num(tag(&f, "MC:i:"), 1)? as u32,
                    num(tag(&f, "KC:i:"), 0)?,
                ));
            }
            "L" if f.len() >= 6 => {
                let m = num(tag(&f, "RC:i:"), 1)?;
                links.push((n, f[1].to_string(), ori(f[2])?, f[3].to_string(), ori(f[4])?, m as u32));
            }
            "S" | "L" => return Err(bad(n, "too few fields")),
            _ => {}
        }
    }
    let k = k.ok_or_else(|| bad(1, "missing header"))?;
    let mut nodes = Vec::with_capacity(segs.len());
    for (seq, mc, kc) in segs {
        nodes.push((label_of(&seq, k)?, mc, kc));
    }
    nodes.sort_by(|a, b| a.0.cmp_label(&b.0));
    let id = |name: &str| {
        let probe = NodeLabel::Seq(name.to_string());
        nodes
            .binary_search_by(|(l, _, _)| l.cmp_label(&probe))
            .map(|i| i as u32)
    };
    let mut edges = Vec::with_capacity(links.len());
    for (n, a, o1, b, o2, m) in links {
        let u = id(&a).map_err(|_| bad(n, "link names an unknown segment"))?;
        let v = id(&b).map_err(|_| bad(n, "link names an unknown segment"))?;
        edges.push(
            Edge {
                u,
                v,
                o1,
                o2,
                multiplicity: m,
            }
            .normalized(),
        );
    }
    edges.sort_by_key(|e| e.key());
    let (labels, rest): (Vec<_>, Vec<_>) = nodes.into_iter().map(|(l, m, c)| (l, (m, c))).unzip();
    let (mcs, kcs) = rest.into_iter().unzip();
    BiGraph::from_parts(k, labels, mcs, kcs, edges)
}

pub const GRAPH_MAGIC: [u8; 4] = *b"BDBG";
pub const GRAPH_VERSION: u16 = 1;

/// Native little-endian graph file: header, node table, edge table.
///
/// Header: magic, version u16, k u16, node count u64, edge count u64.
/// Node: member count u32, multiplicity u64, label length u32, label bytes.
/// Edge: u u32, v u32, heads u8 (bit 0 head at u, bit 1 head at v),
/// multiplicity u32.
pub fn write_graph(g: &BiGraph, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut put = |b: &[u8]| w.write_all(b).map_err(|e| Error::io(path, e));
    put(&GRAPH_MAGIC)?;
    put(&GRAPH_VERSION.to_le_bytes())?;
    put(&(g.k() as u16).to_le_bytes())?;
    put(&(g.node_count() as u64).to_le_bytes())?;
    put(&(g.edge_count() as u64).to_le_bytes())?;
    for (v, l) in g.labels().iter().enumerate() {
        let s = l.as_string();
        put(&g.member_count(v as u32).to_le_bytes())?;
        put(&g.node_multiplicity(v as u32).to_le_bytes())?;
        put(&(s.len() as u32).to_le_bytes())?;
        put(s.as_bytes())?;
    }
    for e in g.edges() {
        put(&e.u.to_le_bytes())?;
        put(&e.v.to_le_bytes())?;
        put(&[e.o1.bit() | (e.o2.bit() << 1)])?;
        put(&e.multiplicity.to_le_bytes())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<BiGraph> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut off = 0usize;
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut b = vec![0; n];
        r.read_exact(&mut b)
            .map_err(|_| Error::format(path, off, "truncated graph file"))?;
        off += n;
        Ok(b)
    };
    let u16_at = |b: &[u8]| u16::from_le_bytes([b[0], b[1]]);
    let u32_of = |b: Vec<u8>| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let u64_of = |b: Vec<u8>| u64::from_le_bytes(b.try_into().expect("8 bytes"));
    let head = take(8)?;
    if head[..4] != GRAPH_MAGIC {
        return Err(Error::format(path, 0, "not a graph file"));
    }
    if u16_at(&head[4..6]) != GRAPH_VERSION {
        return Err(Error::format(path, 4, "unsupported graph file version"));
    }
    let k = u16_at(&head[6..8]) as usize;
    let n = u64_of(take(8)?) as usize;
    let m = u64_of(take(8)?) as usize;
    let (mut labels, mut mcs, mut kcs) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        mcs.push(u32_of(take(4)?));
        kcs.push(u64_of(take(8)?));
        let len = u32_of(take(4)?) as usize;
        let s = String::from_utf8(take(len)?).map_err(|_| Error::format(path, 0, "label is not ASCII"))?;
        labels.push(label_of(&s, k)?);
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = u32_of(take(4)?);
        let v = u32_of(take(4)?);
        let flags = take(1)?[0];
        let multiplicity = u32_of(take(4)?);
        edges.push(Edge {
            u,
            v,
            o1: Orientation::from_bit(flags & 1),
            o2: Orientation::from_bit((flags >> 1) & 1),
            multiplicity,
        });
    }
    BiGraph::from_parts(k, labels, mcs, kcs, edges)
}

/// Counts and histograms of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphStats {
    pub k: usize,
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: usize,
    pub total_multiplicity: u64,
    /// Half-edges per node.
    pub degree: BTreeMap<usize, u64>,
    pub edge_multiplicity: BTreeMap<u32, u64>,
    pub label_length: BTreeMap<usize, u64>,
}

impl GraphStats {
    pub fn of(g: &BiGraph) -> GraphStats {
        let mut s = GraphStats {
            k: g.k(),
            nodes: g.node_count(),
            edges: g.edge_count(),
            total_multiplicity: g.total_multiplicity(),
            ..GraphStats::default()
        };
        for v in 0..g.node_count() as u32 {
            *s.degree.entry(g.half_edges(v).len()).or_default() += 1;
            *s.label_length.entry(g.label(v).len()).or_default() += 1;
        }
        for e in g.edges() {
            s.self_loops += e.is_self_loop() as usize;
            *s.edge_multiplicity.entry(e.multiplicity).or_default() += 1;
        }
        s
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k\t{}", self.k);
        let _ = writeln!(s, "nodes\t{}", self.nodes);
        let _ = writeln!(s, "edges\t{}", self.edges);
        let _ = writeln!(s, "self_loops\t{}", self.self_loops);
        let _ = writeln!(s, "total_multiplicity\t{}", self.total_multiplicity);
        let mut hist = |name: &str, h: Vec<(String, u64)>| {
            let _ = writeln!(s, "# {name}");
            for (k, n) in h {
                let _ = writeln!(s, "{k}\t{n}");
            }
        };
        hist("degree", self.degree.iter().map(|(k, n)| (k.to_string(), *n)).collect());
        hist(
            "edge_multiplicity",
            self.edge_multiplicity.iter().map(|(k, n)| (k.to_string(), *n)).collect(),
        );
        hist(
            "label_length",
            self.label_length.iter().map(|(k, n)| (k.to_string(), *n)).collect(),
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::simplify;
    use crate::biconstruct;
    use flate2::write::GzEncoder;
    use flate2::Compression;

    const FIG2_FA: &str = ">r1\nATGG\n>r2\nCCAT\n>r3\nGGAC\n>r4\nGTTC\n>r5\nTGGA\n>r6\nTGGT\n";

    fn put(dir: &Path, name: &str, data: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, data).unwrap();
        p
    }

    #[test]
    fn fasta_figure_reads() {
        let d = tempfile::tempdir().unwrap();
        let (rs, st) = read_sequences(&[put(d.path(), "a.fa", FIG2_FA.as_bytes())]).unwrap();
        assert_eq!((rs.len(), rs.n_symbols(), st.records), (6, 24, 6));
    }

    #[test]
    fn multiline_fasta_and_crlf() {
        let d = tempfile::tempdir().unwrap();
        let p = put(d.path(), "a.fa", b">x desc\r\nACG\r\ntta\r\n\r\n>y\nGG\n");
        let (rs, _) = read_sequences(&[p]).unwrap();
        assert_eq!(rs.reads(), [b"ACGTTA".to_vec(), b"GG".to_vec()]);
    }

    #[test]
    fn empty_file() {
        let d = tempfile::tempdir().unwrap();
        let (rs, st) = read_sequences(&[put(d.path(), "e.fa", b"")]).unwrap();
        assert!(rs.is_empty());
        assert_eq!(st.records, 0);
    }

    #[test]
    fn ambiguous_symbols_split() {
        let d = tempfile::tempdir().unwrap();
        let (rs, _) = read_sequences(&[put(d.path(), "n.fa", b">a\nACGNNTTG\n")]).unwrap();
        assert_eq!(rs.reads(), [b"ACG".to_vec(), b"TTG".to_vec()]);
        assert_eq!((rs.split_records, rs.split_fragments), (1, 2));
    }

    #[test]
    fn fastq_and_gzip_match_fasta() {
        let d = tempfile::tempdir().unwrap();
        let fq = b"@r1\nATGG\n+\nIIII\n@r2\nCCAT\n+r2\nIIII\n";
        let mut gz = GzEncoder::new(Vec::new(), Compression::default());
        gz.write_all(fq).unwrap();
        let gz = gz.finish().unwrap();
        let (a, _) = read_sequences(&[put(d.path(), "a.fq", fq)]).unwrap();
        let (b, _) = read_sequences(&[put(d.path(), "a.fq.gz", &gz)]).unwrap();
        let (c, _) = read_sequences(&[put(d.path(), "c.fa", b">1\nATGG\n>2\nCCAT\n")]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn malformed_input_names_file_and_line() {
        let d = tempfile::tempdir().unwrap();
        let p = put(d.path(), "bad.fq", b"@r1\nACGT\n+\nIII\n");
        let e = read_sequences(&[&p]).unwrap_err().to_string();
        assert!(e.contains("bad.fq") && e.contains(":4"), "{e}");
        let p = put(d.path(), "bad.fa", b"ACGT\n");
        assert!(read_sequences(&[&p]).is_err());
        let p = put(d.path(), "bad2.fa", b">a\nAC1T\n");
        let e = read_sequences(&[&p]).unwrap_err().to_string();
        assert!(e.contains(":2"), "{e}");
        assert!(read_sequences(&[d.path().join("missing.fa")]).is_err());
    }

    #[test]
    fn gfa_edge_line() {
        let g = biconstruct(&ReadSet::from_seqs(["ATGG"]), 3).unwrap().0;
        // ATG then TGG, stored from CCA's molecule as (ATG, CCA, F, R)
        let s = gfa_string(&g);
        assert!(s.lines().any(|l| l == "L\tATG\t+\tCCA\t-\t2M\tRC:i:2"), "{s}");
        assert!(s.starts_with("H\tVN:Z:1.0\tKM:i:3\n"));
    }

    #[test]
    fn empty_graph_is_header_only() {
        let g = BiGraph::from_kmers(5, vec![], vec![]).unwrap();
        assert_eq!(gfa_string(&g), "H\tVN:Z:1.0\tKM:i:5\n");
    }

    #[test]
    fn round_trips() {
        let d = tempfile::tempdir().unwrap();
        let rs = ReadSet::from_seqs(["ACGTTGCAAGGCTTACGGA", "GGCTTACCATTA", "ACGGTAGC"]);
        for g in [biconstruct(&rs, 5).unwrap().0, simplify(&biconstruct(&rs, 5).unwrap().0)] {
            let p = d.path().join("g.gfa");
            write_gfa(&g, &p).unwrap();
            assert_eq!(read_gfa(&p).unwrap(), g);
            let p = d.path().join("g.bdbg");
            write_graph(&g, &p).unwrap();
            assert_eq!(read_graph(&p).unwrap(), g);
        }
    }

    #[test]
    fn truncated_graph_file() {
        let d = tempfile::tempdir().unwrap();
        let p = put(d.path(), "t.bdbg", b"BDBG\x01\x00\x03\x00\x05");
        assert!(read_graph(&p).is_err());
    }

    #[test]
    fn stats_histograms() {
        let g = biconstruct(&ReadSet::from_seqs(["ATGG", "CCAT", "GGAC"]), 3).unwrap().0;
        let s = GraphStats::of(&g);
        assert_eq!(s.nodes, g.node_count());
        assert_eq!(s.degree.values().sum::<u64>(), s.nodes as u64);
        assert!(s.render().contains("# degree"));
    }
}
