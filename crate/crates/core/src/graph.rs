//! The bi-directed graph model.
//!
//! Vertices are identified by dense ids, assigned by the lexicographic rank
//! of their positive-strand label. Every edge is stored once in canonical
//! form (`u <= v`) and appears as a half-edge in both endpoints' lists, the
//! far side mirrored as `(v, u, flip(o2), flip(o1))`.
//!
//! A walk leaves a vertex on the strand named by the head at that vertex and
//! enters the next vertex on the strand named by the far head. It is valid
//! when every intermediate vertex is left on the strand it was entered on.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::edgegen::{self_loop_orientations, Orientation, ReadSet};
use crate::error::{Error, Result};
use crate::kmer::{check_k, reverse_complement_str, Kmer, Strand};

/// Positive-strand label of a node: a k-mer, or a longer compacted chain.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NodeLabel {
    Kmer(Kmer),
    Seq(String),
}

impl NodeLabel {
    pub fn len(&self) -> usize {
        match self {
            NodeLabel::Kmer(k) => k.len(),
            NodeLabel::Seq(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_string(&self) -> String {
        match self {
            NodeLabel::Kmer(k) => k.decode(),
            NodeLabel::Seq(s) => s.clone(),
        }
    }

    pub fn as_kmer(&self) -> Option<Kmer> {
        match self {
            NodeLabel::Kmer(k) => Some(*k),
            NodeLabel::Seq(_) => None,
        }
    }

    /// The label as read on `strand`.
    pub fn oriented(&self, strand: Strand) -> String {
        match (self, strand) {
            (NodeLabel::Kmer(k), s) => k.oriented(s).decode(),
            (NodeLabel::Seq(s), Strand::Pos) => s.clone(),
            (NodeLabel::Seq(s), Strand::Neg) => {
                String::from_utf8(reverse_complement_str(s.as_bytes())).expect("ASCII")
            }
        }
    }

    /// Lexicographic order of the decoded labels.
    pub fn cmp_label(&self, other: &NodeLabel) -> Ordering {
        match (self, other) {
            (NodeLabel::Kmer(a), NodeLabel::Kmer(b)) if a.len() == b.len() => a.cmp(b),
            _ => self.as_string().cmp(&other.as_string()),
        }
    }
}

/// A stored bi-directed edge over vertex ids.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub o1: Orientation,
    pub o2: Orientation,
    pub multiplicity: u32,
}

impl Edge {
    #[inline]
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    #[inline]
    pub fn reversed(&self) -> Edge {
        Edge {
            u: self.v,
            v: self.u,
            o1: self.o2.flip(),
            o2: self.o1.flip(),
            multiplicity: self.multiplicity,
        }
    }

    pub fn normalized(&self) -> Edge {
        if self.u > self.v {
            self.reversed()
        } else if self.u == self.v {
            let (o1, o2) = self_loop_orientations(self.o1, self.o2);
            Edge { o1, o2, ..*self }
        } else {
            *self
        }
    }

    #[inline]
    pub fn key(&self) -> (u32, u32, Orientation, Orientation) {
        (self.u, self.v, self.o1, self.o2)
    }
}

/// One endpoint's view of an edge.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct HalfEdge {
    pub nbr: u32,
    /// Head at the owning vertex.
    pub o_self: Orientation,
    /// Head at the neighbour.
    pub o_nbr: Orientation,
    /// Index into [`BiGraph::edges`].
    pub edge: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BiGraph {
    k: usize,
    labels: Vec<NodeLabel>,
    member_counts: Vec<u32>,
    multiplicities: Vec<u64>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    half: Vec<HalfEdge>,
}

impl BiGraph {
    pub fn empty(k: usize) -> BiGraph {
        BiGraph {
            k,
            labels: Vec::new(),
            member_counts: Vec::new(),
            multiplicities: Vec::new(),
            edges: Vec::new(),
            offsets: vec![0],
            half: Vec::new(),
        }
    }

    /// Assembles a graph from sorted labels and canonical, sorted, unique edges.
    ///
    /// `member_counts` and `multiplicities` are per-node payload (1 and 0 for
    /// plain k-mer vertices).
    pub fn from_parts(
        k: usize,
        labels: Vec<NodeLabel>,
        member_counts: Vec<u32>,
        multiplicities: Vec<u64>,
        edges: Vec<Edge>,
    ) -> Result<BiGraph> {
        check_k(k)?;
        let n = labels.len();
        if member_counts.len() != n || multiplicities.len() != n {
            return Err(Error::Config("node payload length mismatch".into()));
        }
        for (i, w) in labels.windows(2).enumerate() {
            if w[0].cmp_label(&w[1]) != Ordering::Less {
                return Err(Error::Unsorted(i + 1));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u as usize >= n {
                return Err(Error::UnknownVertex(e.u));
            }
            if e.v as usize >= n {
                return Err(Error::UnknownVertex(e.v));
            }
            if e.normalized() != *e {
                return Err(Error::Unsorted(i));
            }
            if i > 0 && edges[i - 1].key() >= e.key() {
                return Err(Error::Unsorted(i));
            }
        }
        // Half-edges bucketed by owner with one counting pass.
        let mut offsets = vec![0usize; n + 1];
        for e in &edges {
            offsets[e.u as usize + 1] += 1;
            offsets[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let placeholder = HalfEdge {
            nbr: 0,
            o_self: Orientation::Fwd,
            o_nbr: Orientation::Fwd,
            edge: 0,
        };
        let mut half = vec![placeholder; 2 * edges.len()];
        for (i, e) in edges.iter().enumerate() {
            half[fill[e.u as usize]] = HalfEdge {
                nbr: e.v,
                o_self: e.o1,
                o_nbr: e.o2,
                edge: i as u32,
            };
            fill[e.u as usize] += 1;
            half[fill[e.v as usize]] = HalfEdge {
                nbr: e.u,
                o_self: e.o2.flip(),
                o_nbr: e.o1.flip(),
                edge: i as u32,
            };
            fill[e.v as usize] += 1;
        }
        Ok(BiGraph {
            k,
            labels,
            member_counts,
            multiplicities,
            edges,
            offsets,
            half,
        })
    }

    /// A graph whose nodes are all plain k-mers.
    pub fn from_kmers(k: usize, vertices: Vec<Kmer>, edges: Vec<Edge>) -> Result<BiGraph> {
        let n = vertices.len();
        let labels = vertices.into_iter().map(NodeLabel::Kmer).collect();
        BiGraph::from_parts(k, labels, vec![1; n], vec![0; n], edges)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn label(&self, v: u32) -> &NodeLabel {
        &self.labels[v as usize]
    }

    pub fn member_count(&self, v: u32) -> u32 {
        self.member_counts[v as usize]
    }

    pub fn member_counts(&self) -> &[u32] {
        &self.member_counts
    }

    /// Total multiplicity of edges absorbed into a node by compaction.
    pub fn node_multiplicity(&self, v: u32) -> u64 {
        self.multiplicities[v as usize]
    }

    pub fn node_multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn half_edges(&self, v: u32) -> &[HalfEdge] {
        &self.half[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn contains(&self, v: u32) -> bool {
        (v as usize) < self.labels.len()
    }

    /// Id of the vertex whose molecule contains `kmer`, if any.
    pub fn find_kmer(&self, kmer: Kmer) -> Option<u32> {
        let c = NodeLabel::Kmer(kmer.canonicalize().kmer);
        self.labels
            .binary_search_by(|l| l.cmp_label(&c))
            .ok()
            .map(|i| i as u32)
    }

    /// Id of the node with positive-strand label `label`.
    pub fn find_label(&self, label: &str) -> Option<u32> {
        let probe = NodeLabel::Seq(label.to_string());
        self.labels
            .binary_search_by(|l| l.cmp_label(&probe))
            .ok()
            .map(|i| i as u32)
    }

    /// Edge index for a canonical key, if present.
    pub fn find_edge(&self, u: u32, v: u32, o1: Orientation, o2: Orientation) -> Option<u32> {
        let probe = Edge {
            u,
            v,
            o1,
            o2,
            multiplicity: 0,
        }
        .normalized();
        self.edges
            .binary_search_by(|e| e.key().cmp(&probe.key()))
            .ok()
            .map(|i| i as u32)
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.edges.iter().map(|e| e.multiplicity as u64).sum()
    }
}

/// Leaving `from` on `strand` along `e` towards `to`: the entry strand at
/// `to`, or `None` when the edge cannot be taken on that strand.
pub fn traverse(e: &Edge, from: u32, to: u32, strand: Strand) -> Option<Strand> {
    if e.u == from && e.v == to && e.o1.strand() == strand {
        return Some(e.o2.strand());
    }
    if e.v == from && e.u == to && e.o2.flip().strand() == strand {
        return Some(e.o1.flip().strand());
    }
    None
}

/// Vertex, edge, vertex, ... with the strand the first vertex is read on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub first_strand: Strand,
    pub vertices: Vec<u32>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<u32>,
}

impl Walk {
    pub fn single(v: u32, strand: Strand) -> Walk {
        Walk {
            first_strand: strand,
            vertices: vec![v],
            edges: Vec::new(),
        }
    }
}

fn check_structure(g: &BiGraph, w: &Walk) -> Result<()> {
    if w.vertices.is_empty() || w.edges.len() + 1 != w.vertices.len() {
        return Err(Error::NonIncidentWalk(0));
    }
    for &v in &w.vertices {
        if !g.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    for (i, &ei) in w.edges.iter().enumerate() {
        let e = g.edges.get(ei as usize).ok_or(Error::NonIncidentWalk(i))?;
        let (a, b) = (w.vertices[i], w.vertices[i + 1]);
        if !((e.u == a && e.v == b) || (e.u == b && e.v == a)) {
            return Err(Error::NonIncidentWalk(i));
        }
    }
    Ok(())
}

/// Strand of every vertex along the walk, or `None` if it is not valid.
pub fn walk_strands(g: &BiGraph, w: &Walk) -> Result<Option<Vec<Strand>>> {
    check_structure(g, w)?;
    let mut strands = Vec::with_capacity(w.vertices.len());
    let mut cur = w.first_strand;
    strands.push(cur);
    for (i, &ei) in w.edges.iter().enumerate() {
        let e = &g.edges[ei as usize];
        match traverse(e, w.vertices[i], w.vertices[i + 1], cur) {
            Some(next) => cur = next,
            None => return Ok(None),
        }
        strands.push(cur);
    }
    Ok(Some(strands))
}

/// Whether every intermediate vertex is left on the strand it was entered on.
/// Structural problems (non-incident steps, unknown ids) are errors.
pub fn is_valid_walk(g: &BiGraph, w: &Walk) -> Result<bool> {
    Ok(walk_strands(g, w)?.is_some())
}

/// Concatenates oriented labels along a valid walk, overlapping by `k - 1`.
pub fn spell_walk(g: &BiGraph, w: &Walk) -> Result<String> {
    let strands = walk_strands(g, w)?.ok_or(Error::InvalidWalk)?;
    let overlap = g.k() - 1;
    let mut out = g.label(w.vertices[0]).oriented(strands[0]);
    for (v, s) in w.vertices.iter().zip(&strands).skip(1) {
        let lab = g.label(*v).oriented(*s);
        out.push_str(&lab[overlap..]);
    }
    Ok(out)
}

/// Which transformed-degree of `v⁺` to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// In-degree of `v⁺`.
    PosIn,
    /// Out-degree of `v⁺`.
    PosOut,
}

/// Degree of `v⁺` in the strand-doubled directed graph.
///
/// A half-edge whose head at `v` is `Fwd` leaves `v⁺`; one whose head is
/// `Rev` leaves `v⁻`, and its mirror arc enters `v⁺`.
pub fn degree(g: &BiGraph, v: u32, side: Side) -> Result<usize> {
    if !g.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    let want = match side {
        Side::PosOut => Orientation::Fwd,
        Side::PosIn => Orientation::Rev,
    };
    Ok(g.half_edges(v).iter().filter(|h| h.o_self == want).count())
}

type StrEdgeKey = (String, String, Orientation, Orientation);

fn str_canonical(x: &[u8]) -> (Vec<u8>, Strand) {
    let rc = reverse_complement_str(x);
    if x <= rc.as_slice() {
        (x.to_vec(), Strand::Pos)
    } else {
        (rc, Strand::Neg)
    }
}

fn str_edge_rep(a: Vec<u8>, b: Vec<u8>, o1: Orientation, o2: Orientation) -> StrEdgeKey {
    let fwd = (
        String::from_utf8(a.clone()).unwrap(),
        String::from_utf8(b.clone()).unwrap(),
        o1,
        o2,
    );
    let rev = (
        String::from_utf8(b).unwrap(),
        String::from_utf8(a).unwrap(),
        o2.flip(),
        o1.flip(),
    );
    fwd.min(rev)
}

/// Builds the graph straight from its definition, on strings.
///
/// Every k-mer of every read and reverse complement becomes a molecule;
/// every pair of k-mers adjacent in one of those strings adds one
/// occurrence of the edge between their molecules, with heads naming the
/// strands the two k-mers spell. Meant for small inputs and as a test
/// oracle for the sort-based construction.
pub fn brute_force_build(reads: &ReadSet, k: usize) -> Result<BiGraph> {
    check_k(k)?;
    let mut vertices: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut edges: BTreeMap<StrEdgeKey, u32> = BTreeMap::new();
    for read in reads.reads() {
        if read.len() < k {
            continue;
        }
        for z in [read.clone(), reverse_complement_str(read)] {
            let windows: Vec<&[u8]> = z.windows(k).collect();
            for w in &windows {
                vertices.insert(str_canonical(w).0);
            }
            for pair in windows.windows(2) {
                let (xh, sx) = str_canonical(pair[0]);
                let (yh, sy) = str_canonical(pair[1]);
                let key = str_edge_rep(
                    xh,
                    yh,
                    Orientation::from_strand(sx),
                    Orientation::from_strand(sy),
                );
                let m = edges.entry(key).or_insert(0);
                *m = m.saturating_add(1);
            }
        }
    }
    let verts: Vec<Vec<u8>> = vertices.into_iter().collect();
    let id = |s: &str| -> u32 {
        verts
            .binary_search_by(|v| v.as_slice().cmp(s.as_bytes()))
            .expect("endpoint is a vertex") as u32
    };
    let mut out_edges: Vec<Edge> = edges
        .into_iter()
        .map(|((a, b, o1, o2), m)| Edge {
            u: id(&a),
            v: id(&b),
            o1,
            o2,
            multiplicity: m,
        })
        .collect();
    out_edges.sort_by_key(|e| e.key());
    let kmers = verts
        .iter()
        .map(|v| Kmer::encode(v))
        .collect::<Result<Vec<_>>>()?;
    BiGraph::from_kmers(k, kmers, out_edges)
}
