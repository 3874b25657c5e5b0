use std::collections::HashMap;

use logic_graph::LogicGraph;
use subarray_sim::{Decoder, Wordline};

use crate::types::*;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_allocation(mig: &LogicGraph, alloc: &AllocationMap) -> ValidationReport {
    validate_allocation_with(mig, alloc, &Decoder::default())
}

fn show(l: Option<Lit>) -> String {
    l.map_or("nothing".to_string(), |l| l.to_string())
}

/// Checks the static binding rules, then replays the schedule on
/// symbolic row contents and checks every operand read and every sink.
pub fn validate_allocation_with(mig: &LogicGraph, alloc: &AllocationMap, decoder: &Decoder) -> ValidationReport {
    let mut v = Vec::new();
    if alloc.graph != *mig && (alloc.graph.nodes.len() != mig.nodes.len() || !alloc.graph.equivalent(mig)) {
        v.push("allocation was made for a different graph".to_string());
        return ValidationReport { violations: v };
    }
    let mig = &alloc.graph;
    let bind = &alloc.bindings;
    let d_input = |lit: Lit| match lit.v {
        Val::In(i) => matches!(bind.inputs.get(i as usize), Some(InputLoc::D(_))),
        _ => false,
    };

    let mut by_node: HashMap<u32, Vec<&AllocEntry>> = HashMap::new();
    let mut last_phase = 0;
    for e in &alloc.entries {
        if e.phase < last_phase {
            v.push(format!("n{} allocated in phase {} after phase {}", e.node, e.phase, last_phase));
        }
        last_phase = e.phase;
        by_node.entry(e.node).or_default().push(e);
        let Some(n) = mig.nodes.get(e.node as usize) else {
            v.push(format!("entry names missing node n{}", e.node));
            continue;
        };
        let Some(&edge) = n.fanin.get(e.slot as usize) else {
            v.push(format!("n{} has no slot {}", e.node, e.slot));
            continue;
        };
        let lit = Lit::of(edge);
        if lit.neg && d_input(lit) && !e.wordline.row.supports_negation() {
            v.push(format!("n{}.{}: negation requires DCC, bound to {}", e.node, e.slot, e.wordline.row));
        }
    }
    for node in 0..mig.nodes.len() as u32 {
        let es = by_node.get(&node).cloned().unwrap_or_default();
        if es.len() != 3 {
            v.push(format!("n{node} has {} operand bindings", es.len()));
            continue;
        }
        for a in 0..3 {
            for b in a + 1..3 {
                if es[a].wordline.row == es[b].wordline.row {
                    v.push(format!("n{node}: {} double-bound in phase {}", es[a].wordline.row, es[a].phase));
                }
                if es[a].slot == es[b].slot {
                    v.push(format!("n{node}: slot {} bound twice", es[a].slot));
                }
            }
        }
        if es.iter().any(|e| e.phase != es[0].phase) {
            v.push(format!("n{node}: operands split across phases"));
        }
    }

    let mut rows: [Option<Lit>; 6] = [None; 6];
    let mut dmem: HashMap<DRef, Lit> = HashMap::new();
    for (i, loc) in bind.inputs.iter().enumerate() {
        match loc {
            InputLoc::D(d) => {
                dmem.insert(*d, Lit { v: Val::In(i as u32), neg: false });
            }
            InputLoc::Resident(r) => rows[r.index()] = Some(Lit { v: Val::In(i as u32), neg: false }),
        }
    }
    let read_wl = |rows: &[Option<Lit>; 6], w: Wordline| rows[w.row.index()].map(|l| l.xor(w.negated));
    let mut copy = |rows: &mut [Option<Lit>; 6], c: &RowCopy, v: &mut Vec<String>| {
        let val = match c.src {
            CopySrc::C0 => Some(Lit { v: Val::Zero, neg: false }),
            CopySrc::C1 => Some(Lit { v: Val::Zero, neg: true }),
            CopySrc::D(d) => dmem.get(&d).copied(),
            CopySrc::Row(w) => read_wl(rows, w),
            CopySrc::Entry(e) => {
                let vals: Vec<Option<Lit>> = decoder.entry(e as usize).iter().map(|&w| read_wl(rows, w)).collect();
                if vals.iter().any(|x| *x != vals[0]) {
                    v.push(format!("B{e} read while its rows disagree"));
                }
                vals[0]
            }
        };
        if val.is_none() {
            v.push(format!("copy reads undefined {}", c.src));
        }
        match c.dst {
            CopyDst::Row(w) => rows[w.row.index()] = val.map(|l| l.xor(w.negated)),
            CopyDst::D(d) => {
                if let Some(l) = val {
                    dmem.insert(d, l);
                }
            }
        }
    };
    for (pi, phase) in alloc.phases.iter().enumerate() {
        for c in &phase.pre {
            copy(&mut rows, c, &mut v);
        }
        for step in &phase.body {
            match step {
                Step::Copy(c) => copy(&mut rows, c, &mut v),
                Step::Maj { node, entry } => {
                    let members = decoder.entry(*entry as usize).to_vec();
                    if members.len() != 3 {
                        v.push(format!("n{node} computed on non-triple B{entry}"));
                        continue;
                    }
                    for &w in &members {
                        let Some(e) = alloc.entries.iter().find(|e| e.node == *node && e.wordline == w) else {
                            v.push(format!("n{node}: no operand bound to {w}"));
                            continue;
                        };
                        if e.phase != pi {
                            v.push(format!("n{node}: bound in phase {} but computed in phase {pi}", e.phase));
                        }
                        let want = mig.nodes.get(*node as usize).and_then(|n| n.fanin.get(e.slot as usize)).map(|&x| Lit::of(x));
                        let got = read_wl(&rows, w);
                        if want.is_some() && got != want {
                            v.push(format!(
                                "n{node}.{} reads {w} holding {}, expected {}",
                                e.slot,
                                show(got),
                                show(want)
                            ));
                        }
                    }
                    for &w in &members {
                        rows[w.row.index()] = Some(Lit { v: Val::Node(*node), neg: w.negated });
                    }
                }
            }
        }
    }
    for (j, &e) in mig.outputs.iter().enumerate() {
        let want = Lit::of(e);
        match bind.outputs.get(j) {
            Some(OutputSink::D(d)) => {
                if dmem.get(d) != Some(&want) {
                    v.push(format!("output {j}: {d} holds {}, expected {want}", show(dmem.get(d).copied())));
                }
            }
            Some(OutputSink::Resident(h)) => {
                if rows[h.index()] != Some(want) {
                    v.push(format!("output {j}: {h} holds {}, expected {want}", show(rows[h.index()])));
                }
            }
            None => v.push(format!("output {j} has no sink")),
        }
    }
    ValidationReport { violations: v }
}
