//! Segmented ranking over `p` contiguous slices of the candidate arcs.
//!
//! Each worker follows successor links while they stay inside its slice,
//! producing segments with local offsets. A sequential pass over the segment
//! summaries links segments into paths (and finds cycles that cross slices),
//! then the workers add the segment bases to their local offsets. The result
//! does not depend on the worker count; only the operation counts do.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use super::{check_degrees, remove_by_key, sym_key, RankedPaths, TNode};
use crate::error::Result;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParallelStats {
    pub workers: usize,
    pub arcs: usize,
    /// Arc visits per worker, over both ranking rounds.
    pub worker_ops: Vec<u64>,
    /// Sequential steps over segment summaries.
    pub combine_ops: u64,
    pub segments: u64,
}

impl ParallelStats {
    pub fn max_worker_ops(&self) -> u64 {
        self.worker_ops.iter().copied().max().unwrap_or(0)
    }
}

struct Segment {
    head: usize,
    tail: usize,
    len: u64,
    min_key: (TNode, TNode),
}

struct WorkerOut {
    segments: Vec<Segment>,
    /// Minimum keys of cycles lying inside the slice.
    cycles: Vec<(TNode, TNode)>,
    ops: u64,
}

struct RoundOut {
    head: Vec<usize>,
    rank: Vec<u64>,
    cycle_keys: Vec<(TNode, TNode)>,
}

fn ranges(n: usize, p: usize) -> Vec<(usize, usize)> {
    (0..p).map(|w| (w * n / p, (w + 1) * n / p)).collect()
}

/// One ranking round over arcs sorted by `from`.
fn segment_round(arcs: &[(TNode, TNode)], p: usize, stats: &mut ParallelStats) -> RoundOut {
    let n = arcs.len();
    let parts = ranges(n, p);
    let mut succ = vec![NONE; n];
    let pred: Vec<AtomicUsize> = (0..n).map(|_| AtomicUsize::new(NONE)).collect();
    let mut seg_of = vec![NONE; n];
    let mut offset = vec![0u64; n];

    // Successor and predecessor links.
    thread::scope(|s| {
        let mut rest = succ.as_mut_slice();
        for &(lo, hi) in &parts {
            let (mine, tail) = rest.split_at_mut(hi - lo);
            rest = tail;
            let pred = &pred;
            s.spawn(move || {
                for (i, slot) in (lo..hi).zip(mine.iter_mut()) {
                    let to = arcs[i].1;
                    if let Ok(j) = arcs.binary_search_by_key(&to, |a| a.0) {
                        *slot = j;
                        pred[j].store(i, Ordering::Relaxed);
                    }
                }
            });
        }
    });
    let pred: Vec<usize> = pred.into_iter().map(|a| a.into_inner()).collect();
    for (w, &(lo, hi)) in parts.iter().enumerate() {
        stats.worker_ops[w] += (hi - lo) as u64;
    }

    // Local segments.
    let outs: Vec<WorkerOut> = thread::scope(|s| {
        let mut handles = Vec::new();
        let mut seg_rest = seg_of.as_mut_slice();
        let mut off_rest = offset.as_mut_slice();
        for &(lo, hi) in &parts {
            let (seg_mine, t1) = seg_rest.split_at_mut(hi - lo);
            let (off_mine, t2) = off_rest.split_at_mut(hi - lo);
            seg_rest = t1;
            off_rest = t2;
            let (succ, pred) = (&succ, &pred);
            handles.push(s.spawn(move || {
                let inside = |j: usize| j != NONE && (lo..hi).contains(&j);
                let mut out = WorkerOut {
                    segments: Vec::new(),
                    cycles: Vec::new(),
                    ops: 0,
                };
                for i in lo..hi {
                    if inside(pred[i]) {
                        continue;
                    }
                    let mut j = i;
                    let mut len = 0;
                    let mut min_key = (TNode::MAX, TNode::MAX);
                    loop {
                        seg_mine[j - lo] = i;
                        off_mine[j - lo] = len;
                        min_key = min_key.min(sym_key(arcs[j].0, arcs[j].1));
                        len += 1;
                        out.ops += 1;
                        if !inside(succ[j]) {
                            break;
                        }
                        j = succ[j];
                    }
                    out.segments.push(Segment {
                        head: i,
                        tail: j,
                        len,
                        min_key,
                    });
                }
                // Whatever was not reached lies on a cycle inside the slice.
                for i in lo..hi {
                    if seg_mine[i - lo] != NONE {
                        continue;
                    }
                    let mut j = i;
                    let mut min_key = (TNode::MAX, TNode::MAX);
                    loop {
                        seg_mine[j - lo] = i;
                        min_key = min_key.min(sym_key(arcs[j].0, arcs[j].1));
                        out.ops += 1;
                        j = succ[j];
                        if j == i {
                            break;
                        }
                    }
                    out.cycles.push(min_key);
                }
                out
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    // Link segments across slices.
    let mut cycle_keys = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    for (w, o) in outs.into_iter().enumerate() {
        stats.worker_ops[w] += o.ops;
        cycle_keys.extend(o.cycles);
        segments.extend(o.segments);
    }
    stats.segments += segments.len() as u64;
    let seg_index = |head: usize| {
        segments
            .binary_search_by_key(&head, |s| s.head)
            .expect("successor of a segment tail starts a segment")
    };
    let mut base = vec![0u64; segments.len()];
    let mut path_head = vec![NONE; segments.len()];
    for si in 0..segments.len() {
        if pred[segments[si].head] != NONE {
            continue;
        }
        let start = segments[si].head;
        let mut cur = si;
        let mut acc = 0;
        loop {
            stats.combine_ops += 1;
            base[cur] = acc;
            path_head[cur] = start;
            acc += segments[cur].len;
            let nx = succ[segments[cur].tail];
            if nx == NONE {
                break;
            }
            cur = seg_index(nx);
        }
    }
    for si in 0..segments.len() {
        if path_head[si] != NONE {
            continue;
        }
        let mut cur = si;
        let mut min_key = (TNode::MAX, TNode::MAX);
        loop {
            stats.combine_ops += 1;
            path_head[cur] = segments[si].head;
            min_key = min_key.min(segments[cur].min_key);
            cur = seg_index(succ[segments[cur].tail]);
            if cur == si {
                break;
            }
        }
        cycle_keys.push(min_key);
    }

    // Absolute ranks.
    let mut head = vec![NONE; n];
    let mut rank = vec![0u64; n];
    thread::scope(|s| {
        let mut h_rest = head.as_mut_slice();
        let mut r_rest = rank.as_mut_slice();
        let mut handles = Vec::new();
        for &(lo, hi) in &parts {
            let (h_mine, t1) = h_rest.split_at_mut(hi - lo);
            let (r_mine, t2) = r_rest.split_at_mut(hi - lo);
            h_rest = t1;
            r_rest = t2;
            let (seg_of, offset, segments, base, path_head) =
                (&seg_of, &offset, &segments, &base, &path_head);
            handles.push(s.spawn(move || {
                for i in lo..hi {
                    let si = segments
                        .binary_search_by_key(&seg_of[i], |s| s.head)
                        .ok();
                    if let Some(si) = si {
                        h_mine[i - lo] = path_head[si];
                        r_mine[i - lo] = base[si] + offset[i];
                    }
                }
                (hi - lo) as u64
            }));
        }
        for (w, h) in handles.into_iter().enumerate() {
            stats.worker_ops[w] += h.join().expect("worker panicked");
        }
    });
    RoundOut {
        head,
        rank,
        cycle_keys,
    }
}

/// Ranks with `workers` threads; output equals [`super::rank_sequential`].
pub fn rank_parallel(arcs: &[(TNode, TNode)], workers: usize) -> Result<(RankedPaths, ParallelStats)> {
    check_degrees(arcs)?;
    let p = workers.max(1);
    let mut stats = ParallelStats {
        workers: p,
        arcs: arcs.len(),
        worker_ops: vec![0; p],
        ..ParallelStats::default()
    };
    let mut sorted = arcs.to_vec();
    sorted.sort_unstable();

    let first = segment_round(&sorted, p, &mut stats);
    let cycles = first.cycle_keys.len() as u64;
    let keys: BTreeSet<(TNode, TNode)> = first.cycle_keys.into_iter().collect();
    let (kept, mut removed) = remove_by_key(&sorted, &keys);
    removed.sort_unstable();

    let second = segment_round(&kept, p, &mut stats);
    debug_assert!(second.cycle_keys.is_empty());
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_unstable_by_key(|&i| (second.head[i], second.rank[i]));
    let mut paths: Vec<Vec<TNode>> = Vec::new();
    let mut cur_head = NONE;
    for i in order {
        if second.head[i] != cur_head {
            cur_head = second.head[i];
            paths.push(vec![kept[i].0]);
        }
        paths.last_mut().expect("path opened above").push(kept[i].1);
    }
    paths.sort_unstable();
    Ok((
        RankedPaths {
            paths,
            cycles_broken: cycles,
            removed,
        },
        stats,
    ))
}
