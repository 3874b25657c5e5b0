use std::collections::HashMap;

use logic_graph::{GraphKind, LogicGraph, Source};
use subarray_sim::{ComputeRow, Decoder, Wordline};

use crate::types::*;

/// Candidates per step that are followed to the end of the schedule.
const LOOKAHEAD_CANDIDATES: usize = 1000;
/// Graphs larger than this are scheduled without lookahead.
const LOOKAHEAD_NODES: usize = 24;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn wl_bit(w: Wordline) -> u16 {
    1 << (w.row.index() * 2 + w.negated as usize)
}

/// Minimum number of decoder entries that exactly partition each set of
/// wordlines (indexed by bit mask); `u8::MAX` where no partition exists.
pub(crate) fn cover_table(decoder: &Decoder) -> Vec<u8> {
    let masks: Vec<u16> = decoder.entries().iter().map(|e| e.iter().map(|&w| wl_bit(w)).sum()).collect();
    let mut cover = vec![u8::MAX; 1 << 12];
    cover[0] = 0;
    for m in 1usize..1 << 12 {
        let low = m & m.wrapping_neg();
        for &em in &masks {
            let em = em as usize;
            if em & low != 0 && em & m == em && cover[m ^ em] != u8::MAX {
                cover[m] = cover[m].min(cover[m ^ em] + 1);
            }
        }
    }
    cover
}

#[derive(Clone)]
struct State {
    rows: [Option<Lit>; 6],
    start: [Option<Lit>; 6],
    pinned: [bool; 6],
    ap: [bool; 6],
    read: [bool; 6],
    cdst: [bool; 6],
    groups: Vec<(CopySrc, u16)>,
    uses: HashMap<Val, u32>,
    placed: Vec<bool>,
    spilled: HashMap<Val, (DRef, bool)>,
    sink_done: Vec<bool>,
    phases: Vec<PhaseSchedule>,
    entries: Vec<AllocEntry>,
}

impl State {
    fn phase(&mut self) -> &mut PhaseSchedule {
        self.phases.last_mut().unwrap()
    }

    fn new_phase(&mut self) {
        self.phases.push(PhaseSchedule::default());
        self.start = self.rows;
        self.ap = [false; 6];
        self.read = [false; 6];
        self.cdst = [false; 6];
        self.groups.clear();
    }
}

#[derive(Clone)]
struct Placement {
    node: u32,
    entry: u8,
    perm: [usize; 3],
    copies: Vec<(CopySrc, Wordline, Lit)>,
    read: [bool; 6],
    groups: Vec<(CopySrc, u16)>,
}

pub struct Allocator<'a> {
    mig: LogicGraph,
    bind: &'a Bindings,
    decoder: &'a Decoder,
    cover: Vec<u8>,
    levels: Vec<u32>,
    triples: Vec<u8>,
}

fn group_cost(cover: &[u8], groups: &[(CopySrc, u16)]) -> i32 {
    groups.iter().map(|&(_, m)| cover[m as usize] as i32).sum()
}

fn add_to_group(groups: &mut Vec<(CopySrc, u16)>, src: CopySrc, w: Wordline) {
    match groups.iter_mut().find(|g| g.0 == src) {
        Some(g) => g.1 |= wl_bit(w),
        None => groups.push((src, wl_bit(w))),
    }
}

impl<'a> Allocator<'a> {
    pub fn new(mig: &'a LogicGraph, bind: &'a Bindings, decoder: &'a Decoder) -> Result<Self, AllocError> {
        if mig.kind != GraphKind::Mig || mig.validate().is_err() {
            return Err(AllocError::NotMig);
        }
        if bind.inputs.len() != mig.num_inputs as usize {
            return Err(AllocError::BindingCount { got: bind.inputs.len(), want: mig.num_inputs as usize });
        }
        if bind.outputs.len() != mig.outputs.len() {
            return Err(AllocError::BindingCount { got: bind.outputs.len(), want: mig.outputs.len() });
        }
        let mig = mig.limit_complemented_fanins();
        Ok(Allocator {
            levels: mig.levels(),
            mig,
            bind,
            decoder,
            cover: cover_table(decoder),
            triples: decoder.triples().map(|e| e as u8).collect(),
        })
    }

    fn d_input(&self, v: Val) -> Option<DRef> {
        match v {
            Val::In(i) => match self.bind.inputs[i as usize] {
                InputLoc::D(d) => Some(d),
                InputLoc::Resident(_) => None,
            },
            _ => None,
        }
    }

    fn initial_state(&self) -> State {
        let mut st = State {
            rows: [None; 6],
            start: [None; 6],
            pinned: [false; 6],
            ap: [false; 6],
            read: [false; 6],
            cdst: [false; 6],
            groups: Vec::new(),
            uses: HashMap::new(),
            placed: vec![false; self.mig.nodes.len()],
            spilled: HashMap::new(),
            sink_done: vec![false; self.mig.outputs.len()],
            phases: vec![PhaseSchedule::default()],
            entries: Vec::new(),
        };
        for (i, loc) in self.bind.inputs.iter().enumerate() {
            if let InputLoc::Resident(r) = loc {
                st.rows[r.index()] = Some(Lit { v: Val::In(i as u32), neg: false });
            }
        }
        // A resident value that must come back unchanged in the same row
        // stays put for the whole slice.
        for (j, sink) in self.bind.outputs.iter().enumerate() {
            if let OutputSink::Resident(h) = sink {
                let want = Lit::of(self.mig.outputs[j]);
                if st.rows[h.index()] == Some(want) {
                    st.pinned[h.index()] = true;
                    st.sink_done[j] = true;
                }
            }
        }
        st.start = st.rows;
        for n in &self.mig.nodes {
            let mut vals: Vec<Val> = n.fanin.iter().map(|&e| Lit::of(e).v).collect();
            vals.sort();
            vals.dedup();
            for v in vals {
                *st.uses.entry(v).or_insert(0) += 1;
            }
        }
        st
    }

    fn uses_val(&self, node: u32, v: Val) -> bool {
        self.mig.nodes[node as usize].fanin.iter().any(|&e| Lit::of(e).v == v)
    }

    fn needed_later(&self, st: &State, v: Val, consumer: Option<u32>) -> bool {
        let mut u = st.uses.get(&v).copied().unwrap_or(0);
        if let Some(c) = consumer {
            if self.uses_val(c, v) {
                u = u.saturating_sub(1);
            }
        }
        if u > 0 {
            return true;
        }
        self.mig.outputs.iter().enumerate().any(|(j, &e)| !st.sink_done[j] && Lit::of(e).v == v)
    }

    fn available(&self, st: &State, v: Val, excl: &[bool; 6]) -> bool {
        v == Val::Zero
            || self.d_input(v).is_some()
            || st.spilled.contains_key(&v)
            || (0..6).any(|r| !excl[r] && st.rows[r].is_some_and(|l| l.v == v))
    }

    /// Copy sources whose read value is `g`, as seen by a copy hoisted to
    /// the start of the current phase.
    fn sources(&self, st: &State, g: Lit, dst: usize, cdst: &[bool; 6]) -> Vec<CopySrc> {
        let mut out = Vec::new();
        match g.v {
            Val::Zero => out.push(if g.neg { CopySrc::C1 } else { CopySrc::C0 }),
            v => {
                if let (Some(d), false) = (self.d_input(v), g.neg) {
                    out.push(CopySrc::D(d));
                }
                if let Some(&(d, n)) = st.spilled.get(&v) {
                    if n == g.neg {
                        out.push(CopySrc::D(d));
                    }
                }
            }
        }
        for r in 0..6 {
            if r == dst || cdst[r] {
                continue;
            }
            let row = ComputeRow::from_index(r);
            if st.start[r] == Some(g) {
                out.push(CopySrc::Row(Wordline::d(row)));
            } else if row.supports_negation() && st.start[r] == Some(g.xor(true)) {
                out.push(CopySrc::Row(Wordline::n(row)));
            }
        }
        out
    }

    fn eval(&self, st: &State, v: u32, entry: u8, perm: [usize; 3]) -> Option<(i32, Placement)> {
        let members = self.decoder.entry(entry as usize);
        let fan = &self.mig.nodes[v as usize].fanin;
        let mut read = st.read;
        let mut cdst = st.cdst;
        let mut groups = st.groups.clone();
        let mut copies = Vec::new();
        let base = group_cost(&self.cover, &groups);
        for k in 0..3 {
            let w = members[k];
            let r = w.row.index();
            let lit = Lit::of(fan[perm[k]]);
            let s = lit.xor(w.negated);
            if st.pinned[r] {
                return None;
            }
            if st.rows[r] == Some(s) {
                if !st.ap[r] && !st.cdst[r] {
                    read[r] = true;
                }
                continue;
            }
            if st.ap[r] || read[r] || cdst[r] {
                return None;
            }
            if lit.neg && self.d_input(lit.v).is_some() && !w.row.supports_negation() {
                return None;
            }
            let mut best: Option<(i32, CopySrc, Wordline)> = None;
            for q in [false, true] {
                if q && !w.row.supports_negation() {
                    continue;
                }
                let dw = Wordline { row: w.row, negated: q };
                for src in self.sources(st, s.xor(q), r, &cdst) {
                    let mut trial = groups.clone();
                    add_to_group(&mut trial, src, dw);
                    let d = group_cost(&self.cover, &trial) - group_cost(&self.cover, &groups);
                    let key = d * 2 + matches!(src, CopySrc::Row(_)) as i32;
                    if best.is_none_or(|b| key < b.0) {
                        best = Some((key, src, dw));
                    }
                }
            }
            let (_, src, dw) = best?;
            add_to_group(&mut groups, src, dw);
            if let CopySrc::Row(sw) = src {
                read[sw.row.index()] = true;
            }
            cdst[r] = true;
            copies.push((src, dw, s));
        }
        // Do not destroy the last copy of anything still needed.
        let mut over = [false; 6];
        for w in members {
            over[w.row.index()] = true;
        }
        for w in members {
            if let Some(old) = st.rows[w.row.index()] {
                if old.v != Val::Node(v) && self.needed_later(st, old.v, Some(v)) && !self.available(st, old.v, &over) {
                    return None;
                }
            }
        }
        let mut cost = group_cost(&self.cover, &groups) - base + 1;
        let has_dcc = members.iter().any(|w| w.row.supports_negation());
        let mut plain_d = false;
        for (j, &e) in self.mig.outputs.iter().enumerate() {
            if e.source != Source::Node(v) {
                continue;
            }
            match self.bind.outputs[j] {
                OutputSink::D(_) => {
                    if !e.complemented {
                        cost += plain_d as i32;
                        plain_d = true;
                    } else {
                        cost += if has_dcc { 1 } else { 2 };
                    }
                }
                OutputSink::Resident(h) => {
                    if !members.iter().any(|w| w.row == h && w.negated == e.complemented) {
                        cost += 1 + (e.complemented && !h.supports_negation()) as i32;
                    }
                }
            }
        }
        Some((cost, Placement { node: v, entry, perm, copies, read, groups }))
    }

    fn commit(&self, st: &mut State, p: Placement) {
        let phase = st.phases.len() - 1;
        for &(src, dw, stored) in &p.copies {
            st.phase().pre.push(RowCopy { src, dst: CopyDst::Row(dw) });
            st.rows[dw.row.index()] = Some(stored);
            st.cdst[dw.row.index()] = true;
        }
        for r in 0..6 {
            st.read[r] |= p.read[r];
        }
        st.groups = p.groups;
        st.phase().body.push(Step::Maj { node: p.node, entry: p.entry });
        let members = self.decoder.entry(p.entry as usize).to_vec();
        for (k, &w) in members.iter().enumerate() {
            st.rows[w.row.index()] = Some(Lit { v: Val::Node(p.node), neg: w.negated });
            st.ap[w.row.index()] = true;
            st.entries.push(AllocEntry { node: p.node, slot: p.perm[k] as u8, wordline: w, phase });
        }
        let mut vals: Vec<Val> = self.mig.nodes[p.node as usize].fanin.iter().map(|&e| Lit::of(e).v).collect();
        vals.sort();
        vals.dedup();
        for v in vals {
            if let Some(u) = st.uses.get_mut(&v) {
                *u -= 1;
            }
        }
        st.placed[p.node as usize] = true;
        let mut merged = false;
        for (j, &e) in self.mig.outputs.iter().enumerate() {
            if e.source != Source::Node(p.node) {
                continue;
            }
            match self.bind.outputs[j] {
                OutputSink::D(d) => {
                    let src = if !e.complemented && !merged {
                        merged = true;
                        Some(CopySrc::Entry(p.entry))
                    } else {
                        // Read the member whose wordline yields the wanted polarity.
                        members.iter().find_map(|w| {
                            let stored_neg = w.negated;
                            if stored_neg == e.complemented {
                                Some(CopySrc::Row(Wordline::d(w.row)))
                            } else if w.row.supports_negation() {
                                Some(CopySrc::Row(Wordline::n(w.row)))
                            } else {
                                None
                            }
                        })
                    };
                    if let Some(src) = src {
                        st.phase().body.push(Step::Copy(RowCopy { src, dst: CopyDst::D(d) }));
                        st.sink_done[j] = true;
                    }
                }
                OutputSink::Resident(h) => {
                    if members.iter().any(|w| w.row == h && w.negated == e.complemented) {
                        st.pinned[h.index()] = true;
                        st.sink_done[j] = true;
                    }
                }
            }
        }
    }

    fn phase_empty(st: &State) -> bool {
        let p = st.phases.last().unwrap();
        p.pre.is_empty() && p.body.is_empty()
    }

    fn fits(&self, st: &State, ready: &[u32]) -> bool {
        ready.iter().any(|&v| {
            self.triples.iter().any(|&e| PERMS.iter().any(|&perm| self.eval(st, v, e, perm).is_some()))
        })
    }

    /// Moves one value that lives only in compute rows to a spill row,
    /// preferring a value whose spill lets a ready node through.
    fn spill_one(&self, st: &mut State, ready: &[u32]) -> Result<bool, AllocError> {
        let mut cands = Vec::new();
        for r in 0..6 {
            let Some(l) = st.rows[r] else { continue };
            if st.pinned[r] || !self.needed_later(st, l.v, None) {
                continue;
            }
            if l.v == Val::Zero || self.d_input(l.v).is_some() || st.spilled.contains_key(&l.v) {
                continue;
            }
            if !cands.iter().any(|&(_, c): &(usize, Lit)| c.v == l.v) {
                cands.push((r, l));
            }
        }
        if cands.is_empty() {
            return Ok(false);
        }
        // Slots of values nobody reads any more are reused.
        let dead: Vec<Val> = st.spilled.keys().copied().filter(|&v| !self.needed_later(st, v, None)).collect();
        for v in dead {
            st.spilled.remove(&v);
        }
        let slot = *self
            .bind
            .spill
            .iter()
            .find(|d| !st.spilled.values().any(|(s, _)| s == *d))
            .ok_or(AllocError::SpillExhausted)?;
        let apply = |st: &mut State, (r, l): (usize, Lit)| {
            let row = ComputeRow::from_index(r);
            st.phase().pre.push(RowCopy { src: CopySrc::Row(Wordline::d(row)), dst: CopyDst::D(slot) });
            st.spilled.insert(l.v, (slot, l.neg));
            st.new_phase();
        };
        let pick = cands
            .iter()
            .copied()
            .find(|&c| {
                let mut trial = st.clone();
                apply(&mut trial, c);
                self.fits(&trial, ready)
            })
            .unwrap_or(cands[0]);
        apply(st, pick);
        Ok(true)
    }

    /// A source reading `g` right now (end of schedule, no hoisting).
    fn readable(&self, st: &State, g: Lit) -> Option<CopySrc> {
        match g.v {
            Val::Zero => return Some(if g.neg { CopySrc::C1 } else { CopySrc::C0 }),
            v => {
                if let (Some(d), false) = (self.d_input(v), g.neg) {
                    return Some(CopySrc::D(d));
                }
                if let Some(&(d, n)) = st.spilled.get(&v) {
                    if n == g.neg {
                        return Some(CopySrc::D(d));
                    }
                }
            }
        }
        for r in 0..6 {
            let row = ComputeRow::from_index(r);
            if st.rows[r] == Some(g) {
                return Some(CopySrc::Row(Wordline::d(row)));
            }
            if row.supports_negation() && st.rows[r] == Some(g.xor(true)) {
                return Some(CopySrc::Row(Wordline::n(row)));
            }
        }
        None
    }

    fn busy(&self, st: &State, r: usize) -> bool {
        st.pinned[r] || st.rows[r].is_some_and(|l| self.needed_later(st, l.v, None))
    }

    /// Makes `g` readable, bouncing through a free DCC row if only the
    /// complement is at hand.
    fn make_readable(&self, st: &mut State, g: Lit, avoid: usize) -> Option<CopySrc> {
        if let Some(s) = self.readable(st, g) {
            return Some(s);
        }
        let inv = self.readable(st, g.xor(true))?;
        let x = [ComputeRow::Dcc0, ComputeRow::Dcc1]
            .into_iter()
            .find(|x| x.index() != avoid && !self.busy(st, x.index()))?;
        st.phase().body.push(Step::Copy(RowCopy { src: inv, dst: CopyDst::Row(Wordline::n(x)) }));
        st.rows[x.index()] = Some(g);
        Some(CopySrc::Row(Wordline::d(x)))
    }

    fn finish(&self, st: &mut State) -> Result<(), AllocError> {
        let pending: Vec<usize> = (0..self.mig.outputs.len()).filter(|&j| !st.sink_done[j]).collect();
        for &j in &pending {
            if let OutputSink::D(d) = self.bind.outputs[j] {
                let t = Lit::of(self.mig.outputs[j]);
                let src = self.make_readable(st, t, usize::MAX).ok_or(AllocError::Unroutable(j))?;
                st.phase().body.push(Step::Copy(RowCopy { src, dst: CopyDst::D(d) }));
                st.sink_done[j] = true;
            }
        }
        let mut left: Vec<usize> = pending.into_iter().filter(|&j| !st.sink_done[j]).collect();
        while !left.is_empty() {
            let mut progressed = false;
            for idx in 0..left.len() {
                let j = left[idx];
                let OutputSink::Resident(h) = self.bind.outputs[j] else { unreachable!() };
                let hr = h.index();
                let t = Lit::of(self.mig.outputs[j]);
                if st.rows[hr] == Some(t) {
                    st.sink_done[j] = true;
                    st.pinned[hr] = true;
                    left.remove(idx);
                    progressed = true;
                    break;
                }
                if st.pinned[hr] {
                    return Err(AllocError::Unroutable(j));
                }
                // Do not overwrite something another pending sink still reads.
                if let Some(old) = st.rows[hr] {
                    let mut excl = [false; 6];
                    excl[hr] = true;
                    let wanted = left.iter().any(|&k| k != j && Lit::of(self.mig.outputs[k]).v == old.v);
                    if wanted && !self.available(st, old.v, &excl) {
                        continue;
                    }
                }
                let mut done = false;
                for q in [false, true] {
                    if q && !h.supports_negation() {
                        continue;
                    }
                    if let Some(src) = self.readable(st, t.xor(q)) {
                        if src == CopySrc::Row(Wordline::d(h)) || src == CopySrc::Row(Wordline { row: h, negated: true }) {
                            continue;
                        }
                        let dw = Wordline { row: h, negated: q };
                        st.phase().body.push(Step::Copy(RowCopy { src, dst: CopyDst::Row(dw) }));
                        done = true;
                        break;
                    }
                }
                if !done {
                    let src = self.make_readable(st, t, hr).ok_or(AllocError::Unroutable(j))?;
                    st.phase().body.push(Step::Copy(RowCopy { src, dst: CopyDst::Row(Wordline::d(h)) }));
                }
                st.rows[hr] = Some(t);
                st.pinned[hr] = true;
                st.sink_done[j] = true;
                left.remove(idx);
                progressed = true;
                break;
            }
            if !progressed {
                return Err(AllocError::Unroutable(left[0]));
            }
        }
        Ok(())
    }

    fn candidates(&self, st: &State, ready: &[u32]) -> Vec<((i32, u32, u32, usize, usize), Placement)> {
        let mut out = Vec::new();
        for &v in ready {
            for (ti, &e) in self.triples.iter().enumerate() {
                for (pi, &perm) in PERMS.iter().enumerate() {
                    if let Some((cost, p)) = self.eval(st, v, e, perm) {
                        out.push(((cost, self.levels[v as usize], v, ti, pi), p));
                    }
                }
            }
        }
        out.sort_by_key(|c| c.0);
        out
    }

    /// Command count of a finished schedule, with copies of one phase
    /// merged where the decoder allows and result copies folded into
    /// their activation.
    fn schedule_cost(&self, st: &State) -> usize {
        let mut total = 0;
        for p in &st.phases {
            let mut groups: Vec<(CopySrc, u16)> = Vec::new();
            let mut d_copies = 0;
            for c in &p.pre {
                match c.dst {
                    CopyDst::Row(w) => add_to_group(&mut groups, c.src, w),
                    CopyDst::D(_) => d_copies += 1,
                }
            }
            for &(_, m) in &groups {
                let c = self.cover[m as usize];
                total += if c == u8::MAX { m.count_ones() as usize } else { c as usize };
            }
            total += d_copies;
            let mut prev_maj = false;
            for step in &p.body {
                match step {
                    Step::Maj { .. } => {
                        total += 1;
                        prev_maj = true;
                    }
                    Step::Copy(c) => {
                        if !(prev_maj && matches!(c.src, CopySrc::Entry(_))) {
                            total += 1;
                        }
                        prev_maj = false;
                    }
                }
            }
        }
        total
    }

    /// Places every node, then routes outputs. With lookahead, the
    /// leading candidates of each step are compared by finishing the
    /// schedule greedily from each of them.
    fn complete(&self, st: &mut State, lookahead: bool) -> Result<(), AllocError> {
        loop {
            let ready: Vec<u32> = (0..self.mig.nodes.len() as u32)
                .filter(|&v| {
                    !st.placed[v as usize]
                        && self.mig.nodes[v as usize]
                            .fanin
                            .iter()
                            .all(|e| e.node_id().is_none_or(|j| st.placed[j as usize]))
                })
                .collect();
            if ready.is_empty() {
                break;
            }
            let mut cands = self.candidates(st, &ready);
            if cands.is_empty() {
                if !Self::phase_empty(st) {
                    st.new_phase();
                } else if !self.spill_one(st, &ready)? {
                    return Err(AllocError::Infeasible(ready[0]));
                }
                continue;
            }
            let mut pick = 0;
            if lookahead && cands.len() > 1 {
                let mut best = usize::MAX;
                for (i, (_, p)) in cands.iter().enumerate().take(LOOKAHEAD_CANDIDATES) {
                    let mut trial = st.clone();
                    self.commit(&mut trial, p.clone());
                    if self.complete(&mut trial, false).is_ok() {
                        let c = self.schedule_cost(&trial);
                        if c < best {
                            best = c;
                            pick = i;
                        }
                    }
                }
            }
            let p = cands.swap_remove(pick).1;
            self.commit(st, p);
        }
        self.finish(st)
    }

    pub fn run(&self) -> Result<AllocationMap, AllocError> {
        let mut st = self.initial_state();
        let lookahead = self.mig.nodes.len() <= LOOKAHEAD_NODES;
        self.complete(&mut st, lookahead)?;
        let mut remap = Vec::new();
        let mut phases = Vec::new();
        for p in st.phases {
            remap.push(phases.len());
            if !p.pre.is_empty() || !p.body.is_empty() {
                phases.push(p);
            }
        }
        let mut entries = st.entries;
        for e in &mut entries {
            e.phase = remap[e.phase];
        }
        let phase_count = phases.len().max(1);
        Ok(AllocationMap { graph: self.mig.clone(), bindings: self.bind.clone(), entries, phase_count, phases })
    }
}

/// Allocates with inputs at B18+i and outputs at B20+j.
pub fn allocate(mig: &LogicGraph) -> Result<AllocationMap, AllocError> {
    let b = Bindings::plain(mig.num_inputs as usize, mig.outputs.len());
    allocate_with(mig, &b, &Decoder::default())
}

pub fn allocate_with(mig: &LogicGraph, bind: &Bindings, decoder: &Decoder) -> Result<AllocationMap, AllocError> {
    Allocator::new(mig, bind, decoder)?.run()
}
