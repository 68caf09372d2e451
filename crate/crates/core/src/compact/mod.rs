//! Chain compaction through the strand-doubled directed graph.
//!
//! Every vertex `v` becomes two directed nodes, `v⁺ = 2v` and `v⁻ = 2v + 1`.
//! An edge `(u, v, o1, o2)` gives the arc `u^{s(o1)} → v^{s(o2)}` and its
//! twin `v^{¬s(o2)} → u^{¬s(o1)}`, where `s(Fwd) = +`. A directed path then
//! reads as a strand-consistent bi-directed walk, and the twin path is the
//! same walk read backwards on the other strand.
//!
//! Linear stretches are found by keeping the arcs whose two endpoints have
//! in- and out-degree at most one, then ranking the resulting paths. Cycles
//! among those arcs are broken by dropping every arc whose mirror-symmetric
//! key equals the smallest key on the cycle, so a cycle and its twin break
//! at twin arcs and still spell reverse-complementary chains.

mod ooc;
mod parallel;

use std::collections::{BTreeSet, HashMap};

use crate::edgegen::Orientation;
use crate::error::{Error, Result};
use crate::extsort::ExtConfig;
use crate::graph::{spell_walk, BiGraph, Edge, NodeLabel, Walk};
use crate::kmer::{reverse_complement_str, Strand};

pub use ooc::{ooc_list_rank, OocRankReport};
pub use parallel::{rank_parallel, ParallelStats};

/// Index of a strand-specific copy of a vertex.
pub type TNode = u64;

pub fn tnode(v: u32, s: Strand) -> TNode {
    2 * v as u64 + s.index() as u64
}

pub fn tnode_base(x: TNode) -> u32 {
    (x >> 1) as u32
}

pub fn tnode_strand(x: TNode) -> Strand {
    if x & 1 == 0 {
        Strand::Pos
    } else {
        Strand::Neg
    }
}

/// The same node read on the other strand.
pub fn twin_node(x: TNode) -> TNode {
    x ^ 1
}

/// Orientation-free key of an arc: the smaller of it and its twin.
pub fn sym_key(from: TNode, to: TNode) -> (TNode, TNode) {
    (from, to).min((to ^ 1, from ^ 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub from: TNode,
    pub to: TNode,
    /// Index of the source edge in the graph.
    pub edge: u32,
    pub self_loop: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transformed {
    pub node_count: usize,
    /// Sorted by `(from, to, edge)`.
    pub arcs: Vec<Arc>,
    pub in_degree: Vec<u32>,
    pub out_degree: Vec<u32>,
}

pub fn list_ranking_transform(g: &BiGraph) -> Transformed {
    let n = 2 * g.node_count();
    let mut arcs = Vec::with_capacity(2 * g.edge_count());
    for (i, e) in g.edges().iter().enumerate() {
        let (s1, s2) = (e.o1.strand(), e.o2.strand());
        let self_loop = e.is_self_loop();
        arcs.push(Arc {
            from: tnode(e.u, s1),
            to: tnode(e.v, s2),
            edge: i as u32,
            self_loop,
        });
        arcs.push(Arc {
            from: tnode(e.v, s2.flip()),
            to: tnode(e.u, s1.flip()),
            edge: i as u32,
            self_loop,
        });
    }
    arcs.sort_unstable();
    let mut in_degree = vec![0u32; n];
    let mut out_degree = vec![0u32; n];
    for a in &arcs {
        out_degree[a.from as usize] += 1;
        in_degree[a.to as usize] += 1;
    }
    Transformed {
        node_count: n,
        arcs,
        in_degree,
        out_degree,
    }
}

/// Arcs restricted to the linear regions of the transform.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    /// Sorted by `(from, to)`; no node has more than one arc in or out.
    pub arcs: Vec<Arc>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn pairs(&self) -> Vec<(TNode, TNode)> {
        self.arcs.iter().map(|a| (a.from, a.to)).collect()
    }
}

pub fn find_candidates(t: &Transformed) -> CandidateSet {
    let linear = |x: TNode| t.in_degree[x as usize] <= 1 && t.out_degree[x as usize] <= 1;
    CandidateSet {
        arcs: t
            .arcs
            .iter()
            .filter(|a| !a.self_loop && linear(a.from) && linear(a.to))
            .copied()
            .collect(),
    }
}

/// Maximal directed paths of a candidate set, each as its node sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedPaths {
    /// Sorted; every path has at least two nodes.
    pub paths: Vec<Vec<TNode>>,
    pub cycles_broken: u64,
    /// Arcs dropped to open cycles, sorted.
    pub removed: Vec<(TNode, TNode)>,
}

pub(crate) fn check_degrees(arcs: &[(TNode, TNode)]) -> Result<()> {
    let mut from: Vec<TNode> = arcs.iter().map(|a| a.0).collect();
    let mut to: Vec<TNode> = arcs.iter().map(|a| a.1).collect();
    from.sort_unstable();
    to.sort_unstable();
    for (side, v) in [("out", from), ("in", to)] {
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "candidate node {} has {side}-degree above one",
                w[0]
            )));
        }
    }
    Ok(())
}

/// Drops every arc whose symmetric key is in `keys`.
pub(crate) fn remove_by_key(
    arcs: &[(TNode, TNode)],
    keys: &BTreeSet<(TNode, TNode)>,
) -> (Vec<(TNode, TNode)>, Vec<(TNode, TNode)>) {
    arcs.iter()
        .partition(|&&(a, b)| !keys.contains(&sym_key(a, b)))
}

/// Single-threaded ranker: walk paths from their heads, then open what is left.
pub fn rank_sequential(arcs: &[(TNode, TNode)]) -> Result<RankedPaths> {
    check_degrees(arcs)?;
    let succ: HashMap<TNode, TNode> = arcs.iter().copied().collect();
    let has_pred: std::collections::HashSet<TNode> = arcs.iter().map(|a| a.1).collect();
    let mut sorted: Vec<(TNode, TNode)> = arcs.to_vec();
    sorted.sort_unstable();

    let mut seen: std::collections::HashSet<TNode> = std::collections::HashSet::new();
    for &(x, _) in &sorted {
        if has_pred.contains(&x) {
            continue;
        }
        let mut cur = x;
        while let Some(&nx) = succ.get(&cur) {
            seen.insert(cur);
            cur = nx;
        }
    }
    let mut keys = BTreeSet::new();
    let mut cycles = 0;
    for &(x, _) in &sorted {
        if seen.contains(&x) {
            continue;
        }
        cycles += 1;
        let mut best = (TNode::MAX, TNode::MAX);
        let mut cur = x;
        loop {
            seen.insert(cur);
            let nx = succ[&cur];
            best = best.min(sym_key(cur, nx));
            cur = nx;
            if cur == x {
                break;
            }
        }
        keys.insert(best);
    }
    let (kept, mut removed) = remove_by_key(arcs, &keys);
    removed.sort_unstable();

    let succ: HashMap<TNode, TNode> = kept.iter().copied().collect();
    let has_pred: std::collections::HashSet<TNode> = kept.iter().map(|a| a.1).collect();
    let mut paths = Vec::new();
    let mut heads: Vec<TNode> = kept
        .iter()
        .map(|a| a.0)
        .filter(|x| !has_pred.contains(x))
        .collect();
    heads.sort_unstable();
    for h in heads {
        let mut p = vec![h];
        let mut cur = h;
        while let Some(&nx) = succ.get(&cur) {
            p.push(nx);
            cur = nx;
        }
        paths.push(p);
    }
    paths.sort_unstable();
    Ok(RankedPaths {
        paths,
        cycles_broken: cycles,
        removed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankStrategy {
    Sequential,
    Parallel { workers: usize },
    OutOfCore(ExtConfig),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankReport {
    pub candidates: usize,
    pub cycles_broken: u64,
    pub removed_arcs: usize,
    pub parallel: Option<ParallelStats>,
    pub ooc: Option<OocRankReport>,
}

pub fn rank_paths(
    arcs: &[(TNode, TNode)],
    strategy: &RankStrategy,
) -> Result<(RankedPaths, RankReport)> {
    let mut report = RankReport {
        candidates: arcs.len(),
        ..RankReport::default()
    };
    let ranked = match strategy {
        RankStrategy::Sequential => rank_sequential(arcs)?,
        RankStrategy::Parallel { workers } => {
            let (r, stats) = rank_parallel(arcs, *workers)?;
            report.parallel = Some(stats);
            r
        }
        RankStrategy::OutOfCore(cfg) => {
            let (r, stats) = ooc_list_rank(arcs.iter().copied(), cfg)?;
            report.ooc = Some(stats);
            r
        }
    };
    report.cycles_broken = ranked.cycles_broken;
    report.removed_arcs = ranked.removed.len();
    Ok((ranked, report))
}

/// A compactable stretch, read along its strand-consistent walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub vertices: Vec<u32>,
    pub strands: Vec<Strand>,
    pub edges: Vec<u32>,
    pub label: String,
    pub canonical_label: String,
    /// k-mers covered, summed over the member nodes.
    pub member_count: u32,
}

impl Chain {
    pub fn walk(&self) -> Walk {
        Walk {
            first_strand: self.strands[0],
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
    }
}

fn canonical_string(s: &str) -> String {
    let rc = String::from_utf8(reverse_complement_str(s.as_bytes())).expect("ASCII");
    if rc.as_str() < s {
        rc
    } else {
        s.to_string()
    }
}

/// Turns ranked paths back into vertex walks and spells them.
pub fn paths_to_chains(g: &BiGraph, c: &CandidateSet, ranked: &RankedPaths) -> Result<Vec<Chain>> {
    let edge_of: HashMap<(TNode, TNode), u32> =
        c.arcs.iter().map(|a| ((a.from, a.to), a.edge)).collect();
    let mut out = Vec::with_capacity(ranked.paths.len());
    for p in &ranked.paths {
        let vertices: Vec<u32> = p.iter().map(|&x| tnode_base(x)).collect();
        let strands: Vec<Strand> = p.iter().map(|&x| tnode_strand(x)).collect();
        let mut edges = Vec::with_capacity(p.len() - 1);
        for w in p.windows(2) {
            let e = edge_of
                .get(&(w[0], w[1]))
                .ok_or_else(|| Error::Config(format!("ranked arc {}→{} is not a candidate", w[0], w[1])))?;
            edges.push(*e);
        }
        let walk = Walk {
            first_strand: strands[0],
            vertices: vertices.clone(),
            edges: edges.clone(),
        };
        let label = spell_walk(g, &walk)?;
        let member_count = vertices.iter().map(|&v| g.member_count(v)).sum();
        out.push(Chain {
            canonical_label: canonical_string(&label),
            vertices,
            strands,
            edges,
            label,
            member_count,
        });
    }
    Ok(out)
}

/// Ranks the candidates and returns every chain, twins included.
pub fn rank_chains(
    g: &BiGraph,
    c: &CandidateSet,
    strategy: &RankStrategy,
) -> Result<(Vec<Chain>, RankReport)> {
    let (ranked, report) = rank_paths(&c.pairs(), strategy)?;
    Ok((paths_to_chains(g, c, &ranked)?, report))
}

/// Smallest chain size that is reported.
pub const MIN_CHAIN_MEMBERS: u32 = 3;

/// One chain per twin pair, read so its label is the canonical one.
pub fn canonicalize_chains(chains: Vec<Chain>) -> Vec<Chain> {
    let mut keep: Vec<Chain> = chains
        .into_iter()
        .filter(|c| c.member_count >= MIN_CHAIN_MEMBERS && c.label == c.canonical_label)
        .collect();
    keep.sort_by(|a, b| {
        (&a.canonical_label, &a.vertices).cmp(&(&b.canonical_label, &b.vertices))
    });
    keep.dedup_by(|b, a| a.canonical_label == b.canonical_label);
    keep
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplifyReport {
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub edges_before: usize,
    pub edges_after: usize,
    pub chains: usize,
    pub absorbed_vertices: usize,
    pub inconsistent_edges: u64,
    pub merged_edges: u64,
    pub rank: RankReport,
}

impl SimplifyReport {
    /// Percentage of nodes removed.
    pub fn node_reduction(&self) -> f64 {
        if self.nodes_before == 0 {
            0.0
        } else {
            100.0 * (self.nodes_before - self.nodes_after) as f64 / self.nodes_before as f64
        }
    }
}

/// Compacts with the sequential ranker.
pub fn simplify(g: &BiGraph) -> BiGraph {
    simplify_with(g, &RankStrategy::Sequential)
        .expect("in-memory compaction of a valid graph")
        .0
}

pub fn simplify_with(g: &BiGraph, strategy: &RankStrategy) -> Result<(BiGraph, SimplifyReport)> {
    let k = g.k();
    let t = list_ranking_transform(g);
    let cands = find_candidates(&t);
    let (chains, rank) = rank_chains(g, &cands, strategy)?;
    let chains = canonicalize_chains(chains);

    let n = g.node_count();
    // vertex -> (chain, position, strand within the chain label)
    let mut place: Vec<Option<(usize, usize, Strand)>> = vec![None; n];
    let mut internal = vec![false; g.edge_count()];
    for (ci, c) in chains.iter().enumerate() {
        for (pos, (&v, &s)) in c.vertices.iter().zip(&c.strands).enumerate() {
            place[v as usize] = Some((ci, pos, s));
        }
        for &e in &c.edges {
            internal[e as usize] = true;
        }
    }

    enum Src {
        Vertex(u32),
        Chain(usize),
    }
    let mut nodes: Vec<(NodeLabel, u32, u64, Src)> = Vec::new();
    for v in 0..n as u32 {
        if place[v as usize].is_none() {
            nodes.push((
                g.label(v).clone(),
                g.member_count(v),
                g.node_multiplicity(v),
                Src::Vertex(v),
            ));
        }
    }
    for (ci, c) in chains.iter().enumerate() {
        let mut mult: u64 = c.vertices.iter().map(|&v| g.node_multiplicity(v)).sum();
        mult += c
            .edges
            .iter()
            .map(|&e| g.edges()[e as usize].multiplicity as u64)
            .sum::<u64>();
        nodes.push((
            NodeLabel::Seq(c.canonical_label.clone()),
            c.member_count,
            mult,
            Src::Chain(ci),
        ));
    }
    nodes.sort_by(|a, b| a.0.cmp_label(&b.0));
    let mut vertex_id = vec![u32::MAX; n];
    let mut chain_id = vec![u32::MAX; chains.len()];
    for (id, node) in nodes.iter().enumerate() {
        match node.3 {
            Src::Vertex(v) => vertex_id[v as usize] = id as u32,
            Src::Chain(c) => chain_id[c] = id as u32,
        }
    }
    let map = |v: u32, s: Strand| -> (u32, Strand) {
        match place[v as usize] {
            None => (vertex_id[v as usize], s),
            Some((ci, _, cs)) => (chain_id[ci], if s == cs { Strand::Pos } else { Strand::Neg }),
        }
    };

    let mut inconsistent = 0u64;
    let mut edges: Vec<Edge> = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if internal[i] {
            continue;
        }
        let (a, sa) = map(e.u, e.o1.strand());
        let (b, sb) = map(e.v, e.o2.strand());
        let left = nodes[a as usize].0.oriented(sa);
        let right = nodes[b as usize].0.oriented(sb);
        if left[left.len() - (k - 1)..] != right[..k - 1] {
            inconsistent += 1;
            continue;
        }
        edges.push(
            Edge {
                u: a,
                v: b,
                o1: Orientation::from_strand(sa),
                o2: Orientation::from_strand(sb),
                multiplicity: e.multiplicity,
            }
            .normalized(),
        );
    }
    edges.sort_unstable_by_key(|e| e.key());
    let before = edges.len();
    edges.dedup_by(|b, a| {
        if a.key() == b.key() {
            a.multiplicity = a.multiplicity.saturating_add(b.multiplicity);
            true
        } else {
            false
        }
    });
    let merged = (before - edges.len()) as u64;

    let mut labels = Vec::with_capacity(nodes.len());
    let mut members = Vec::with_capacity(nodes.len());
    let mut mults = Vec::with_capacity(nodes.len());
    for (l, m, x, _) in nodes {
        labels.push(l);
        members.push(m);
        mults.push(x);
    }
    let out = BiGraph::from_parts(k, labels, members, mults, edges)?;
    let report = SimplifyReport {
        nodes_before: n,
        nodes_after: out.node_count(),
        edges_before: g.edge_count(),
        edges_after: out.edge_count(),
        chains: chains.len(),
        absorbed_vertices: chains.iter().map(|c| c.vertices.len()).sum(),
        inconsistent_edges: inconsistent,
        merged_edges: merged,
        rank,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgegen::ReadSet;
    use crate::graph::{brute_force_build, is_valid_walk};
    use crate::sortdedup::biconstruct;
    use Orientation::{Fwd, Rev};

    fn graph(reads: &[&str], k: usize) -> BiGraph {
        biconstruct(&ReadSet::from_seqs(reads.iter().copied()), k).unwrap().0
    }

    fn hand(labels: &[&str], edges: &[(u32, u32, Orientation, Orientation)]) -> BiGraph {
        let k = labels[0].len();
        let mut es: Vec<Edge> = edges
            .iter()
            .map(|&(u, v, o1, o2)| Edge { u, v, o1, o2, multiplicity: 1 }.normalized())
            .collect();
        es.sort_by_key(|e| e.key());
        let ls = labels
            .iter()
            .map(|s| NodeLabel::Kmer(crate::kmer::Kmer::pack(s.as_bytes()).unwrap()))
            .collect();
        BiGraph::from_parts(k, ls, vec![1; labels.len()], vec![0; labels.len()], es).unwrap()
    }

    #[test]
    fn arc_rules() {
        let g = hand(&["AAC", "ACA"], &[(0, 1, Fwd, Fwd)]);
        let t = list_ranking_transform(&g);
        let arcs: Vec<(TNode, TNode)> = t.arcs.iter().map(|a| (a.from, a.to)).collect();
        // u+ -> v+ and v- -> u-
        assert_eq!(arcs, vec![(0, 2), (3, 1)]);

        let g = hand(&["AAC", "ACA"], &[(0, 1, Fwd, Rev)]);
        let t = list_ranking_transform(&g);
        let arcs: Vec<(TNode, TNode)> = t.arcs.iter().map(|a| (a.from, a.to)).collect();
        // u+ -> v- and v+ -> u-
        assert_eq!(arcs, vec![(0, 3), (2, 1)]);

        let t = list_ranking_transform(&BiGraph::empty(3));
        assert!(t.arcs.is_empty());
        assert_eq!(t.node_count, 0);
    }

    #[test]
    fn candidates_on_a_simple_path() {
        let g = hand(&["AAC", "ACA", "CAG"], &[(0, 1, Fwd, Fwd), (1, 2, Fwd, Fwd)]);
        let c = find_candidates(&list_ranking_transform(&g));
        assert_eq!(c.len(), 4);
        let one = hand(&["AAC"], &[]);
        assert!(find_candidates(&list_ranking_transform(&one)).is_empty());
    }

    #[test]
    fn branching_vertex_excluded() {
        let g = graph(&["ATGG", "CCAT", "GGAC", "GTTC", "TGGA", "TGGT"], 3);
        let t = list_ranking_transform(&g);
        let cca = g.find_label("CCA").unwrap();
        // CCA+ has two incoming arcs, so no candidate touches it
        assert_eq!(t.in_degree[tnode(cca, Strand::Pos) as usize], 2);
        let c = find_candidates(&t);
        for a in &c.arcs {
            assert_ne!(tnode_base(a.from), cca);
            assert_ne!(tnode_base(a.to), cca);
        }
    }

    #[test]
    fn two_cycle_is_broken_once() {
        let r = rank_sequential(&[(0, 2), (2, 0)]).unwrap();
        assert_eq!(r.cycles_broken, 1);
        assert_eq!(r.removed, vec![(0, 2)]);
        assert_eq!(r.paths, vec![vec![2, 0]]);
    }

    #[test]
    fn four_node_path() {
        let r = rank_sequential(&[(4, 6), (0, 2), (2, 4)]).unwrap();
        assert_eq!(r.paths, vec![vec![0, 2, 4, 6]]);
        assert_eq!(r.cycles_broken, 0);
    }

    #[test]
    fn degree_violation_is_an_error() {
        assert!(rank_sequential(&[(0, 2), (0, 4)]).is_err());
        assert!(rank_sequential(&[(0, 4), (2, 4)]).is_err());
    }

    #[test]
    fn reversed_vertex_chain_spells_twins() {
        // ATA, CTA (read reversed), AGG, ACC (read reversed)
        let g = graph(&["ATAGGT"], 3);
        let c = find_candidates(&list_ranking_transform(&g));
        let (chains, _) = rank_chains(&g, &c, &RankStrategy::Sequential).unwrap();
        let mut labels: Vec<&str> = chains.iter().map(|c| c.label.as_str()).collect();
        labels.sort();
        assert_eq!(labels, ["ACCTAT", "ATAGGT"]);
        for ch in &chains {
            assert!(is_valid_walk(&g, &ch.walk()).unwrap());
            assert_eq!(ch.label.len(), 3 + ch.member_count as usize - 1);
        }
        let canon = canonicalize_chains(chains);
        assert_eq!(canon.len(), 1);
        assert_eq!(canon[0].canonical_label, "ACCTAT");
    }

    #[test]
    fn short_chains_are_not_reported() {
        let g = graph(&["ATGC"], 3);
        let c = find_candidates(&list_ranking_transform(&g));
        let (chains, _) = rank_chains(&g, &c, &RankStrategy::Sequential).unwrap();
        assert_eq!(chains.len(), 2);
        assert!(canonicalize_chains(chains).is_empty());
        let s = simplify(&g);
        assert_eq!(s, g);
    }

    #[test]
    fn simple_read_compacts_to_one_node() {
        let g = graph(&["ACGGTAGC"], 5);
        let s = simplify(&g);
        assert_eq!(s.node_count(), 1);
        let lab = s.label(0).as_string();
        assert!(lab == "ACGGTAGC" || lab == "GCTACCGT", "{lab}");
        assert_eq!(s.member_count(0), 4);
        assert_eq!(simplify(&s), s);
    }

    #[test]
    fn repeated_kmer_read_keeps_its_branch() {
        // ATG/CAT and TGG/CCA are the same molecules, so CCA branches
        let g = graph(&["ATGGACCAT"], 3);
        assert_eq!(g.node_count(), 5);
        let (s, rep) = simplify_with(&g, &RankStrategy::Sequential).unwrap();
        assert_eq!(rep.chains, 1);
        let labels: Vec<String> = s.labels().iter().map(|l| l.as_string()).collect();
        assert!(labels.contains(&"GGACC".to_string()), "{labels:?}");
        assert_eq!(s.node_count(), 3);
        assert_eq!(simplify(&s), s);
    }

    #[test]
    fn no_candidates_means_identity() {
        let g = graph(&["ATGG", "CCAT", "GGAC", "GTTC", "TGGA", "TGGT"], 3);
        let s = simplify(&g);
        assert_eq!(simplify(&s), s);
        let lone = BiGraph::empty(3);
        assert_eq!(simplify(&lone), lone);
    }

    #[test]
    fn inconsistent_boundary_edge_is_dropped() {
        // AAC -> ACA -> CAG compacts; CAG -> CCC never overlapped, and CCC+
        // has a second in-arc so it stays outside the chain.
        let g = hand(
            &["AAC", "ACA", "ACC", "CAG", "CCC"],
            &[(0, 1, Fwd, Fwd), (1, 3, Fwd, Fwd), (3, 4, Fwd, Fwd), (2, 4, Fwd, Fwd)],
        );
        let (s, rep) = simplify_with(&g, &RankStrategy::Sequential).unwrap();
        assert_eq!(rep.chains, 1);
        assert_eq!(rep.inconsistent_edges, 1);
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.edges().len(), 1);
        assert!(s.find_label("AACAG").is_some());
    }

    #[test]
    fn brute_force_and_sorted_builds_simplify_alike() {
        let rs = ReadSet::from_seqs(["ACGTTGCAAGGCTTAC", "GGCTTACCA"]);
        let a = simplify(&brute_force_build(&rs, 5).unwrap());
        let b = simplify(&biconstruct(&rs, 5).unwrap().0);
        assert_eq!(a, b);
    }
}
