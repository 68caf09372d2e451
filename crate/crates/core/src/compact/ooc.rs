//! Out-of-core list ranking by tuple contraction.
//!
//! Arcs are `(x, y, payload)` tuples, identified by `x` since no node has two
//! outgoing candidate arcs. Each pass retires isolated tuples, picks a
//! maximal matching of successive tuples by deterministic coin tossing, and
//! merges every matched pair `(x, y), (y, y')` into `(x, y')`. Unmatched
//! tuples join the neighbouring pair, so every group has at least two
//! tuples and the live count at least halves per pass. All joins are sort
//! plus merge over spilled tables.
//!
//! A first run over the raw arcs only looks for cycles: a cycle contracts to
//! a tuple `(x, x)` whose payload is the smallest symmetric arc key on it.
//! Those arcs are removed, and a second run ranks the now acyclic set while
//! recording, per absorbed tuple, its group leader and offset. Expanding
//! that history backwards gives every arc its path head and rank.

use std::cell::RefCell;
use std::iter::Peekable;
use std::path::PathBuf;
use std::rc::Rc;

use super::{sym_key, RankedPaths, TNode};
use crate::error::{Error, Result};
use crate::extsort::{external_sort_fallible, ExtConfig, IoLedger, SharedLedger, Spool, SpoolIter, SpoolWriter};
use crate::record::{FixedRecord, TupleRecord};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OocRankReport {
    pub ledger: IoLedger,
    /// Live tuples at the start of each cycle-finding pass.
    pub cycle_phase_live: Vec<u64>,
    /// Live tuples at the start of each ranking pass.
    pub live_counts: Vec<u64>,
    pub cycles_broken: u64,
}

type Table = Spool<TupleRecord>;

fn rec(x: u64, y: u64, payload: u64) -> TupleRecord {
    TupleRecord { x, y, payload }
}

fn by_xy(t: &TupleRecord) -> (u64, u64) {
    (t.x, t.y)
}

fn by_yx(t: &TupleRecord) -> (u64, u64) {
    (t.y, t.x)
}

fn broken(what: &str) -> Error {
    Error::Config(format!("out-of-core ranking invariant broken: {what}"))
}

fn pack(k: (TNode, TNode)) -> u64 {
    (k.0 << 32) | k.1
}

#[cfg(test)]
fn unpack(k: u64) -> (TNode, TNode) {
    (k >> 32, k & 0xFFFF_FFFF)
}

const ROLE_IN: u64 = 0;
const ROLE_OUT: u64 = 1;
const TAG_PRED: u64 = 0;
const TAG_SUCC: u64 = 1;

const FREE: u64 = 0;
const FIRST: u64 = 1;
const SECOND: u64 = 2;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Payload is the smallest symmetric key on the span.
    Cycles,
    /// Payload is the number of arcs in the span.
    Rank,
}

impl Phase {
    fn combine(self, a: u64, b: u64) -> u64 {
        match self {
            Phase::Cycles => a.min(b),
            Phase::Rank => a + b,
        }
    }
}

/// Messages sorted by target, handed out tuple by tuple.
struct Inbox {
    it: Peekable<SpoolIter<TupleRecord>>,
}

impl Inbox {
    fn new(t: &Table) -> Result<Inbox> {
        Ok(Inbox {
            it: t.iter()?.peekable(),
        })
    }

    fn take(&mut self, x: u64, out: &mut Vec<TupleRecord>) -> Result<()> {
        out.clear();
        loop {
            let m = match self.it.peek() {
                None => return Ok(()),
                Some(Ok(m)) => *m,
                Some(Err(_)) => {
                    return match self.it.next() {
                        Some(Err(e)) => Err(e),
                        _ => unreachable!(),
                    }
                }
            };
            if m.x < x {
                return Err(broken("message for an unknown tuple"));
            }
            if m.x > x {
                return Ok(());
            }
            out.push(m);
            self.it.next();
        }
    }
}

struct PassOut {
    next: Table,
    roots: Option<Table>,
    history: Vec<Table>,
    cycles: Vec<u64>,
}

struct Engine<'a> {
    cfg: &'a ExtConfig,
    dir: PathBuf,
    io: SharedLedger,
}

impl Engine<'_> {
    fn writer(&self) -> SpoolWriter<TupleRecord> {
        SpoolWriter::new(&self.dir, self.cfg.block_bytes, &self.io)
    }

    fn sort(&self, t: &Table, key: fn(&TupleRecord) -> (u64, u64)) -> Result<Table> {
        let mut s = external_sort_fallible(t.iter()?, self.cfg, key)?;
        let mut w = self.writer();
        for r in s.by_ref() {
            w.push(&r?)?;
        }
        let l = s.ledger();
        {
            let mut io = self.io.borrow_mut();
            io.n_records += l.n_records;
            io.runs_created += l.runs_created;
            io.merge_passes += l.merge_passes;
            io.blocks_read += l.blocks_read;
            io.blocks_written += l.blocks_written;
        }
        w.finish()
    }

    fn write_sorted(&self, w: SpoolWriter<TupleRecord>, key: fn(&TupleRecord) -> (u64, u64)) -> Result<Table> {
        let t = w.finish()?;
        self.sort(&t, key)
    }

    /// Walks three tables holding one record per tuple, in the same order.
    fn zip3(
        &self,
        a: &Table,
        b: &Table,
        c: &Table,
    ) -> Result<impl Iterator<Item = Result<(TupleRecord, TupleRecord, TupleRecord)>>> {
        let (mut ia, mut ib, mut ic) = (a.iter()?, b.iter()?, c.iter()?);
        Ok(std::iter::from_fn(move || {
            let x = ia.next()?;
            let y = ib.next();
            let z = ic.next();
            Some((|| {
                let (x, y, z) = (
                    x?,
                    y.ok_or_else(|| broken("misaligned tables"))??,
                    z.ok_or_else(|| broken("misaligned tables"))??,
                );
                if x.x != y.x || x.x != z.x {
                    return Err(broken("misaligned tables"));
                }
                Ok((x, y, z))
            })())
        }))
    }

    fn merge_union(&self, a: &Table, b: &Table) -> Result<Table> {
        let mut w = self.writer();
        let mut ia = a.iter()?.peekable();
        let mut ib = b.iter()?.peekable();
        loop {
            let pick_a = match (ia.peek(), ib.peek()) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(Ok(x)), Some(Ok(y))) => x.x <= y.x,
                (Some(Err(_)), _) => true,
                (_, Some(Err(_))) => false,
            };
            let r = if pick_a { ia.next() } else { ib.next() };
            w.push(&r.expect("peeked")?)?;
        }
        w.finish()
    }

    /// One contraction pass over `l`, sorted by `x`.
    fn pass(&self, l: &Table, phase: Phase) -> Result<PassOut> {
        let mut buf = Vec::new();

        // Neighbours: meet every tuple's head and tail at their node.
        let mut hw = self.writer();
        for t in l.iter()? {
            let t = t?;
            hw.push(&rec(t.x, ROLE_OUT, t.x))?;
            hw.push(&rec(t.y, ROLE_IN, t.x))?;
        }
        let halves = self.write_sorted(hw, by_xy)?;
        let mut mw = self.writer();
        {
            let mut it = halves.iter()?.peekable();
            while let Some(h) = it.next() {
                let h = h?;
                let (mut ins, mut outs) = (Vec::new(), Vec::new());
                let mut push = |r: TupleRecord| {
                    if r.y == ROLE_IN {
                        ins.push(r.payload)
                    } else {
                        outs.push(r.payload)
                    }
                };
                push(h);
                while let Some(Ok(nx)) = it.peek() {
                    if nx.x != h.x {
                        break;
                    }
                    let nx = *nx;
                    it.next();
                    push(nx);
                }
                if ins.len() > 1 || outs.len() > 1 {
                    return Err(Error::Config(format!(
                        "candidate node {} has degree above one",
                        h.x
                    )));
                }
                if let (Some(&a), Some(&b)) = (ins.first(), outs.first()) {
                    mw.push(&rec(b, TAG_PRED, a))?;
                    mw.push(&rec(a, TAG_SUCC, b))?;
                }
            }
        }
        let links = self.write_sorted(mw, by_xy)?;

        let (mut lw, mut aw, mut cw) = (self.writer(), self.writer(), self.writer());
        let mut rw = self.writer();
        let mut cycles = Vec::new();
        let mut max_colour = 0;
        {
            let mut inbox = Inbox::new(&links)?;
            for t in l.iter()? {
                let t = t?;
                inbox.take(t.x, &mut buf)?;
                let pred = buf.iter().find(|m| m.y == TAG_PRED).map(|m| m.payload);
                let succ = buf.iter().any(|m| m.y == TAG_SUCC);
                if t.x == t.y {
                    if phase == Phase::Rank {
                        return Err(broken("cycle left after cycle removal"));
                    }
                    cycles.push(t.payload);
                    continue;
                }
                if pred.is_none() && !succ {
                    if phase == Phase::Rank {
                        rw.push(&rec(t.x, t.x, 0))?;
                    }
                    continue;
                }
                lw.push(&t)?;
                aw.push(&rec(t.x, pred.map_or(0, |p| p + 1), succ as u64))?;
                cw.push(&rec(t.x, t.x, FREE))?;
                max_colour = max_colour.max(t.x);
            }
        }
        let (l, a, mut c) = (lw.finish()?, aw.finish()?, cw.finish()?);

        // Coin tossing: colour = 2i + bit i of own colour, where i is the
        // lowest bit in which it differs from the successor's colour.
        while max_colour >= 6 {
            let mut mw = self.writer();
            for r in self.zip3(&l, &a, &c)? {
                let (_, ar, cr) = r?;
                if ar.y > 0 {
                    mw.push(&rec(ar.y - 1, 0, cr.y))?;
                }
            }
            let msgs = self.write_sorted(mw, by_xy)?;
            let mut inbox = Inbox::new(&msgs)?;
            let mut nw = self.writer();
            max_colour = 0;
            for r in self.zip3(&l, &a, &c)? {
                let (t, ar, cr) = r?;
                inbox.take(t.x, &mut buf)?;
                let own = cr.y;
                let colour = if ar.payload == 1 {
                    let s = buf.first().ok_or_else(|| broken("missing successor colour"))?.payload;
                    let i = (own ^ s).trailing_zeros() as u64;
                    2 * i + ((own >> i) & 1)
                } else {
                    own & 1
                };
                max_colour = max_colour.max(colour);
                nw.push(&rec(t.x, colour, cr.payload))?;
            }
            c = nw.finish()?;
        }

        // Six colours down to three.
        for target in 3..6 {
            let mut mw = self.writer();
            for r in self.zip3(&l, &a, &c)? {
                let (t, ar, cr) = r?;
                if ar.y > 0 {
                    mw.push(&rec(ar.y - 1, 0, cr.y))?;
                }
                if ar.payload == 1 {
                    mw.push(&rec(t.y, 1, cr.y))?;
                }
            }
            let msgs = self.write_sorted(mw, by_xy)?;
            let mut inbox = Inbox::new(&msgs)?;
            let mut nw = self.writer();
            for r in self.zip3(&l, &a, &c)? {
                let (t, _, cr) = r?;
                inbox.take(t.x, &mut buf)?;
                let mut colour = cr.y;
                if colour == target {
                    colour = (0..3)
                        .find(|x| buf.iter().all(|m| m.payload != *x))
                        .expect("two neighbours leave one of three colours");
                }
                nw.push(&rec(t.x, colour, cr.payload))?;
            }
            c = nw.finish()?;
        }

        // Maximal matching, one colour class at a time.
        for colour in 0..3 {
            let mut mw = self.writer();
            for r in self.zip3(&l, &a, &c)? {
                let (_, ar, cr) = r?;
                if ar.y > 0 {
                    mw.push(&rec(ar.y - 1, 0, cr.payload))?;
                }
            }
            let msgs = self.write_sorted(mw, by_xy)?;
            let mut inbox = Inbox::new(&msgs)?;
            let (mut nw, mut sw) = (self.writer(), self.writer());
            for r in self.zip3(&l, &a, &c)? {
                let (t, ar, cr) = r?;
                inbox.take(t.x, &mut buf)?;
                let mut state = cr.payload;
                let succ_free = buf.first().is_some_and(|m| m.payload == FREE);
                if cr.y == colour && state == FREE && ar.payload == 1 && succ_free {
                    state = FIRST;
                    sw.push(&rec(t.y, 0, 0))?;
                }
                nw.push(&rec(t.x, cr.y, state))?;
            }
            let c1 = nw.finish()?;
            let seconds = self.write_sorted(sw, by_xy)?;
            let mut inbox = Inbox::new(&seconds)?;
            let mut nw = self.writer();
            for cr in c1.iter()? {
                let cr = cr?;
                inbox.take(cr.x, &mut buf)?;
                let state = if buf.is_empty() { cr.payload } else { SECOND };
                nw.push(&rec(cr.x, cr.y, state))?;
            }
            c = nw.finish()?;
        }

        // Merge matched pairs; sort the unmatched by where they attach.
        let mut history = Vec::new();
        let mut mw = self.writer();
        for r in self.zip3(&l, &a, &c)? {
            let (t, ar, cr) = r?;
            if cr.payload == SECOND {
                mw.push(&rec(ar.y - 1, t.y, t.payload))?;
            }
        }
        let msgs = self.write_sorted(mw, by_xy)?;
        let (mut pw, mut faw, mut fbw, mut h0) =
            (self.writer(), self.writer(), self.writer(), self.writer());
        {
            let mut inbox = Inbox::new(&msgs)?;
            for r in self.zip3(&l, &a, &c)? {
                let (t, ar, cr) = r?;
                inbox.take(t.x, &mut buf)?;
                match cr.payload {
                    FIRST => {
                        let m = buf.first().ok_or_else(|| broken("first without second"))?;
                        pw.push(&rec(t.x, m.y, phase.combine(t.payload, m.payload)))?;
                        if phase == Phase::Rank {
                            h0.push(&rec(t.y, t.x, t.payload))?;
                        }
                    }
                    SECOND => {}
                    _ if ar.y > 0 => faw.push(&t)?,
                    _ => fbw.push(&t)?,
                }
            }
        }
        history.push(h0.finish()?);
        let pairs = self.write_sorted(pw, by_yx)?;
        let after = faw.finish()?;
        let before = self.write_sorted(fbw, by_yx)?;

        // An unmatched tuple with a predecessor follows the pair ending at it.
        let (mut w, mut h1) = (self.writer(), self.writer());
        {
            let mut fa = after.iter()?.peekable();
            for p in pairs.iter()? {
                let p = p?;
                let u = match fa.peek() {
                    Some(Ok(u)) => Some(*u),
                    Some(Err(_)) => return Err(fa.next().expect("peeked").unwrap_err()),
                    None => None,
                };
                match u {
                    Some(u) if u.x == p.y => {
                        fa.next();
                        w.push(&rec(p.x, u.y, phase.combine(p.payload, u.payload)))?;
                        if phase == Phase::Rank {
                            h1.push(&rec(u.x, p.x, p.payload))?;
                        }
                    }
                    Some(u) if u.x < p.y => return Err(broken("unmatched tuple without a pair")),
                    _ => w.push(&p)?,
                }
            }
            if fa.next().is_some() {
                return Err(broken("unmatched tuple without a pair"));
            }
        }
        history.push(h1.finish()?);
        let pairs = self.write_sorted(w, by_xy)?;

        // An unmatched path head precedes the pair it points to.
        let (mut w, mut h2) = (self.writer(), self.writer());
        {
            let mut fb = before.iter()?.peekable();
            for s in pairs.iter()? {
                let s = s?;
                let u = match fb.peek() {
                    Some(Ok(u)) => Some(*u),
                    Some(Err(_)) => return Err(fb.next().expect("peeked").unwrap_err()),
                    None => None,
                };
                match u {
                    Some(u) if u.y == s.x => {
                        fb.next();
                        w.push(&rec(u.x, s.y, phase.combine(u.payload, s.payload)))?;
                        if phase == Phase::Rank {
                            h2.push(&rec(s.x, u.x, u.payload))?;
                        }
                    }
                    Some(u) if u.y < s.x => return Err(broken("path head without a pair")),
                    _ => w.push(&s)?,
                }
            }
            if fb.next().is_some() {
                return Err(broken("path head without a pair"));
            }
        }
        history.push(h2.finish()?);
        let next = self.write_sorted(w, by_xy)?;

        Ok(PassOut {
            next,
            roots: (phase == Phase::Rank).then(|| rw.finish()).transpose()?,
            history,
            cycles,
        })
    }
}

/// Ranks a candidate arc stream under the memory budget of `cfg`.
///
/// Produces the same paths, cycle count and removed arcs as the in-memory
/// rankers. Node ids must fit in 32 bits.
pub fn ooc_list_rank(
    arcs: impl IntoIterator<Item = (TNode, TNode)>,
    cfg: &ExtConfig,
) -> Result<(RankedPaths, OocRankReport)> {
    cfg.validate(TupleRecord::SIZE)?;
    let io: SharedLedger = Rc::new(RefCell::new(IoLedger {
        record_size: TupleRecord::SIZE as u64,
        ..IoLedger::default()
    }));
    let eng = Engine {
        cfg,
        dir: cfg.resolve_spill_dir(),
        io: io.clone(),
    };
    let mut report = OocRankReport::default();

    let mut w = eng.writer();
    for (x, y) in arcs {
        if x >> 32 != 0 || y >> 32 != 0 {
            return Err(Error::Config(format!(
                "node id {} exceeds the 32-bit limit of the out-of-core ranker",
                x.max(y)
            )));
        }
        w.push(&rec(x, y, pack(sym_key(x, y))))?;
    }
    let input = eng.write_sorted(w, by_xy)?;

    // Phase one: contract everything and collect the cycle keys.
    let mut keys = Vec::new();
    let mut l = eng.sort(&input, by_xy)?;
    while l.len() > 0 {
        report.cycle_phase_live.push(l.len());
        let out = eng.pass(&l, Phase::Cycles)?;
        keys.extend(out.cycles);
        l = out.next;
    }
    report.cycles_broken = keys.len() as u64;
    keys.sort_unstable();
    keys.dedup();

    // Drop the arcs carrying a cycle key.
    let by_key = eng.sort(&input, |t| (t.payload, t.x))?;
    let mut removed = Vec::new();
    let mut kw = eng.writer();
    {
        let mut ki = keys.iter().peekable();
        for t in by_key.iter()? {
            let t = t?;
            while ki.peek().is_some_and(|&&k| k < t.payload) {
                ki.next();
            }
            if ki.peek() == Some(&&t.payload) {
                removed.push((t.x, t.y));
            } else {
                kw.push(&rec(t.x, t.y, 1))?;
            }
        }
    }
    removed.sort_unstable();
    let kept = eng.write_sorted(kw, by_xy)?;

    // Phase two: rank, keeping the contraction history.
    let mut levels: Vec<(Table, Vec<Table>)> = Vec::new();
    let mut l = eng.sort(&kept, by_xy)?;
    while l.len() > 0 {
        report.live_counts.push(l.len());
        let out = eng.pass(&l, Phase::Rank)?;
        levels.push((out.roots.expect("ranking pass keeps roots"), out.history));
        l = out.next;
    }

    // Expand the history backwards into (id, head, rank).
    let mut resolved = eng.writer().finish()?;
    for (roots, history) in levels.iter().rev() {
        for h in history.iter().rev() {
            if h.len() == 0 {
                continue;
            }
            let by_group = eng.sort(h, by_yx)?;
            let mut w = eng.writer();
            let mut ri = resolved.iter()?.peekable();
            for m in by_group.iter()? {
                let m = m?;
                let g = loop {
                    match ri.peek() {
                        Some(Ok(r)) if r.x < m.y => {
                            ri.next();
                        }
                        Some(Ok(r)) if r.x == m.y => break *r,
                        Some(Err(_)) => return Err(ri.next().expect("peeked").unwrap_err()),
                        _ => return Err(broken("group leader never resolved")),
                    }
                };
                w.push(&rec(m.x, g.y, g.payload + m.payload))?;
            }
            let fresh = eng.write_sorted(w, by_xy)?;
            resolved = eng.merge_union(&resolved, &fresh)?;
        }
        resolved = eng.merge_union(&resolved, roots)?;
    }

    // Attach each arc's target and read the paths off in rank order.
    let mut w = eng.writer();
    {
        let mut ri = resolved.iter()?;
        for t in kept.iter()? {
            let t = t?;
            let r = ri.next().ok_or_else(|| broken("arc without a rank"))??;
            if r.x != t.x {
                return Err(broken("arc without a rank"));
            }
            w.push(&rec(r.y, r.payload, t.y))?;
        }
    }
    let ordered = eng.write_sorted(w, by_xy)?;
    let mut paths: Vec<Vec<TNode>> = Vec::new();
    let mut head = None;
    for r in ordered.iter()? {
        let r = r?;
        if head != Some(r.x) {
            head = Some(r.x);
            paths.push(vec![r.x]);
        }
        paths.last_mut().expect("path opened above").push(r.payload);
    }
    drop(eng);
    report.ledger = *io.borrow();
    Ok((
        RankedPaths {
            paths,
            cycles_broken: report.cycles_broken,
            removed,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::rank_sequential;
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(dir: &std::path::Path) -> ExtConfig {
        ExtConfig::new(2048, 256).with_spill_dir(dir)
    }

    #[test]
    fn two_tuples_merge_in_one_pass() {
        let dir = tempfile::tempdir().unwrap();
        let (r, rep) = ooc_list_rank([(0, 2), (2, 4)], &cfg(dir.path())).unwrap();
        assert_eq!(r.paths, vec![vec![0, 2, 4]]);
        assert_eq!(rep.live_counts, vec![2, 1]);
    }

    #[test]
    fn path_of_eight_halves() {
        let dir = tempfile::tempdir().unwrap();
        let arcs: Vec<(u64, u64)> = (0..8).map(|i| (2 * i, 2 * i + 2)).collect();
        let (r, rep) = ooc_list_rank(arcs, &cfg(dir.path())).unwrap();
        assert_eq!(r.paths, vec![(0..=8).map(|i| 2 * i).collect::<Vec<u64>>()]);
        assert!(rep.live_counts.len() <= 4, "{:?}", rep.live_counts);
        for (i, &n) in rep.live_counts.iter().enumerate() {
            assert!(n <= 8 >> i, "{:?}", rep.live_counts);
        }
    }

    #[test]
    fn smallest_cycle() {
        let dir = tempfile::tempdir().unwrap();
        let (r, rep) = ooc_list_rank([(0, 2), (2, 0)], &cfg(dir.path())).unwrap();
        assert_eq!(rep.cycles_broken, 1);
        assert_eq!(r, rank_sequential(&[(0, 2), (2, 0)]).unwrap());
    }

    #[test]
    fn matches_sequential_on_random_sets() {
        let dir = tempfile::tempdir().unwrap();
        for seed in 0..15 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids: Vec<u64> = (0..400).collect();
            ids.shuffle(&mut rng);
            let mut arcs = Vec::new();
            let mut i = 0;
            while i < ids.len() {
                let len = rng.gen_range(1..=40).min(ids.len() - i);
                let part = &ids[i..i + len];
                for w in part.windows(2) {
                    arcs.push((w[0], w[1]));
                }
                if len > 1 && rng.gen_bool(0.2) {
                    arcs.push((part[len - 1], part[0]));
                }
                i += len;
            }
            let want = rank_sequential(&arcs).unwrap();
            let (got, rep) = ooc_list_rank(arcs.iter().copied(), &cfg(dir.path())).unwrap();
            assert_eq!(got, want, "seed {seed}");
            for w in rep.live_counts.windows(2) {
                assert!(w[1] <= w[0] / 2, "{:?}", rep.live_counts);
            }
        }
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn degree_violation_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ooc_list_rank([(0, 2), (0, 4)], &cfg(dir.path())).is_err());
    }

    #[test]
    fn key_packing() {
        assert_eq!(unpack(pack((5, 9))), (5, 9));
    }
}
