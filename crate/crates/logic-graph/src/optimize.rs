use std::collections::{HashMap, HashSet};

use crate::graph::{pattern_word, Edge, GraphError, GraphKind, LogicGraph, Node, Op, Source};
use crate::rebuild::{rebuild, Expr};
use crate::rules::{apply_rule, bindings_at, Binding, Direction, RewriteRule, RuleName};

pub const DEFAULT_ROUNDS: usize = 8;
pub const DEFAULT_RESHAPE_BUDGET: usize = 4;

/// Rewrites attempted per reshape step before giving up on finding an
/// improving sequence.
const LOOKAHEAD_LIMIT: usize = 4000;

/// AND(a,b) becomes MAJ(a,b,0) and OR(a,b) becomes MAJ(a,b,1).
pub fn build_naive_mig(aoig: &LogicGraph) -> Result<LogicGraph, GraphError> {
    if aoig.kind != GraphKind::Aoig {
        return Err(GraphError::WrongKind(GraphKind::Aoig));
    }
    aoig.validate()?;
    let mut g = LogicGraph::new(GraphKind::Mig, aoig.num_inputs);
    for n in &aoig.nodes {
        let c = if n.op == Op::And { Edge::ZERO } else { Edge::ONE };
        g.nodes.push(Node { op: Op::Maj, fanin: vec![n.fanin[0], n.fanin[1], c] });
    }
    g.outputs = aoig.outputs.clone();
    Ok(g)
}

fn majority_step(g: &LogicGraph) -> Option<LogicGraph> {
    for (v, n) in g.nodes.iter().enumerate() {
        for (a, b, c) in [(0u8, 1u8, 2u8), (0, 2, 1), (1, 2, 0)] {
            let (x, y) = (n.fanin[a as usize], n.fanin[b as usize]);
            let name = if x == y {
                RuleName::MajorityEq
            } else if x == !y {
                RuleName::MajorityComp
            } else {
                continue;
            };
            let bind = Binding { node: v as u32, perm: [a, b, c], inner: [0, 1, 2], extra: None };
            return apply_rule(g, RewriteRule::new(name, Direction::LtoR), &bind).ok();
        }
    }
    None
}

fn distributivity_step(g: &LogicGraph) -> Option<LogicGraph> {
    let rule = RewriteRule::new(RuleName::Distributivity, Direction::RtoL);
    for v in 0..g.nodes.len() as u32 {
        for b in bindings_at(g, rule, v) {
            if let Ok(r) = apply_rule(g, rule, &b) {
                let r = r.strash();
                if r.node_count() < g.node_count() {
                    return Some(r);
                }
            }
        }
    }
    None
}

/// Majority collapse and right-to-left distributivity until neither
/// lowers the node count.
pub fn reduce_nodes(mig: &LogicGraph) -> LogicGraph {
    let mut g = mig.strash();
    loop {
        if let Some(r) = majority_step(&g) {
            g = r.strash();
        } else if let Some(r) = distributivity_step(&g) {
            g = r;
        } else {
            return g;
        }
    }
}

const INFLATE: [RewriteRule; 6] = [
    RewriteRule::new(RuleName::MajorityEq, Direction::RtoL),
    RewriteRule::new(RuleName::MajorityComp, Direction::RtoL),
    RewriteRule::new(RuleName::Distributivity, Direction::LtoR),
    RewriteRule::new(RuleName::Relevance, Direction::LtoR),
    RewriteRule::new(RuleName::Associativity, Direction::LtoR),
    RewriteRule::new(RuleName::ComplementaryAssociativity, Direction::LtoR),
];

const FOLLOW_UP: [RewriteRule; 3] = [
    RewriteRule::new(RuleName::Relevance, Direction::LtoR),
    RewriteRule::new(RuleName::Associativity, Direction::LtoR),
    RewriteRule::new(RuleName::ComplementaryAssociativity, Direction::LtoR),
];

/// One greedy step: the first rewrite, tried in rule order and then in
/// reverse topological order, after which reduction (possibly following
/// one more exchange or relevance rewrite) lowers the node count.
fn reshape_step(g: &LogicGraph) -> Option<LogicGraph> {
    let base = g.node_count();
    let mut tried = 0usize;
    let mut seen: HashSet<LogicGraph> = HashSet::new();
    let mut second: Vec<LogicGraph> = Vec::new();
    for rule in INFLATE {
        for v in (0..g.nodes.len() as u32).rev() {
            for b in bindings_at(g, rule, v) {
                let Ok(g1) = apply_rule(g, rule, &b) else { continue };
                if !seen.insert(g1.clone()) {
                    continue;
                }
                tried += 1;
                let r = reduce_nodes(&g1);
                if r.node_count() < base {
                    return Some(r);
                }
                second.push(g1);
            }
        }
    }
    for g1 in second {
        for rule in FOLLOW_UP {
            for v in (0..g1.nodes.len() as u32).rev() {
                for b in bindings_at(&g1, rule, v) {
                    if tried >= LOOKAHEAD_LIMIT {
                        return None;
                    }
                    let Ok(g2) = apply_rule(&g1, rule, &b) else { continue };
                    if !seen.insert(g2.clone()) {
                        continue;
                    }
                    tried += 1;
                    let r = reduce_nodes(&g2);
                    if r.node_count() < base {
                        return Some(r);
                    }
                }
            }
        }
    }
    None
}

/// Inflate-and-exchange search, at most `budget` accepted steps.
pub fn reshape(mig: &LogicGraph, budget: usize) -> LogicGraph {
    let mut g = mig.clone();
    for _ in 0..budget {
        match reshape_step(&g) {
            Some(r) => g = r,
            None => break,
        }
    }
    g
}

fn node_tables(g: &LogicGraph) -> (Vec<u64>, u64) {
    let k = g.num_inputs as usize;
    let mask = if k >= 6 { !0 } else { (1u64 << (1 << k)) - 1 };
    let vals = g.simulate(&pattern_word(k, 0));
    (vals.into_iter().map(|v| v & mask).collect(), mask)
}

fn input_table(i: u32, mask: u64) -> u64 {
    pattern_word(i as usize + 1, 0)[i as usize] & mask
}

fn maj3(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (a & c) | (b & c)
}

/// Nodes that die when `v` is removed: `v` itself plus fan-in nodes
/// referenced only from inside that cone.
fn mffc(g: &LogicGraph, v: u32, fanout: &[u32]) -> Vec<u32> {
    let mut refs = fanout.to_vec();
    let mut out = vec![v];
    let mut stack = vec![v];
    while let Some(n) = stack.pop() {
        for e in &g.nodes[n as usize].fanin {
            if let Some(c) = e.node_id() {
                refs[c as usize] -= 1;
                if refs[c as usize] == 0 {
                    out.push(c);
                    stack.push(c);
                }
            }
        }
    }
    out
}

fn fanout_cone(g: &LogicGraph, v: u32) -> Vec<bool> {
    let mut tfo = vec![false; g.nodes.len()];
    tfo[v as usize] = true;
    for i in v as usize + 1..g.nodes.len() {
        tfo[i] = g.nodes[i].fanin.iter().any(|e| e.node_id().is_some_and(|j| tfo[j as usize]));
    }
    tfo
}

struct Candidate {
    gain: isize,
    depth: u32,
    expr: Expr,
}

/// Truth-table resubstitution: re-express a node over existing signals
/// with at most three new majority nodes when that frees more nodes than
/// it adds. Zero-gain rewrites are taken when they make the node
/// shallower. Graphs with more than six inputs are returned unchanged.
pub fn resubstitute(mig: &LogicGraph) -> LogicGraph {
    if mig.kind != GraphKind::Mig || mig.num_inputs > 6 {
        return mig.clone();
    }
    let mut g = mig.strash();
    'outer: loop {
        let (tts, mask) = node_tables(&g);
        let fanout = g.fanout_counts();
        let levels = g.levels();
        let depth = |e: Edge| match e.source {
            Source::Node(j) => levels[j as usize] + 1,
            _ => 0,
        };
        for v in 0..g.nodes.len() as u32 {
            let cone = mffc(&g, v, &fanout);
            let size = cone.len() as isize;
            let tfo = fanout_cone(&g, v);
            let mut lits: Vec<(Edge, u64)> = vec![(Edge::ZERO, 0), (Edge::ONE, mask)];
            for i in 0..g.num_inputs {
                let t = input_table(i, mask);
                lits.push((Edge::input(i), t));
                lits.push((!Edge::input(i), !t & mask));
            }
            for d in 0..g.nodes.len() as u32 {
                if tfo[d as usize] || cone.contains(&d) {
                    continue;
                }
                let t = tts[d as usize];
                lits.push((Edge::node(d), t));
                lits.push((!Edge::node(d), !t & mask));
            }
            let target = tts[v as usize];
            if let Some(c) = search(&lits, target, mask, size, levels[v as usize], &depth) {
                let mut ov = HashMap::new();
                ov.insert(v, c.expr);
                g = rebuild(&g, &ov).strash();
                continue 'outer;
            }
        }
        return g;
    }
}

fn search(
    lits: &[(Edge, u64)],
    target: u64,
    mask: u64,
    size: isize,
    level: u32,
    depth: &dyn Fn(Edge) -> u32,
) -> Option<Candidate> {
    let leaf = |i: usize| Expr::Leaf(lits[i].0);
    if let Some(i) = lits.iter().position(|l| l.1 == target) {
        return Some(Candidate { gain: size, depth: depth(lits[i].0), expr: leaf(i) });
    }
    let distinct = |a: usize, b: usize| lits[a].0.source != lits[b].0.source;
    let m = lits.len();
    let mut triples: Vec<(u64, usize, usize, usize)> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if !distinct(a, b) {
                continue;
            }
            for c in b + 1..m {
                if distinct(a, c) && distinct(b, c) {
                    triples.push((maj3(lits[a].1, lits[b].1, lits[c].1), a, b, c));
                }
            }
        }
    }
    // One new node.
    let mut best: Option<Candidate> = None;
    for &(t, a, b, c) in &triples {
        if t == target {
            let d = 1 + [a, b, c].iter().map(|&i| depth(lits[i].0)).max().unwrap();
            let better = best.as_ref().is_none_or(|x| d < x.depth);
            if better {
                best = Some(Candidate { gain: size - 1, depth: d, expr: Expr::maj(leaf(a), leaf(b), leaf(c)) });
            }
        }
    }
    if let Some(c) = best {
        if c.gain > 0 || (c.gain == 0 && c.depth < level) {
            return Some(c);
        }
    }
    // Two new nodes: M(a, b, M(c, d, e)).
    if size > 2 {
        for a in 0..m {
            for b in a + 1..m {
                if !distinct(a, b) {
                    continue;
                }
                let agree = !(lits[a].1 ^ lits[b].1) & mask;
                if (target ^ lits[a].1) & agree != 0 {
                    continue;
                }
                let care = !agree & mask;
                for &(t, c, d, e) in &triples {
                    if (t ^ target) & care == 0 {
                        let inner = Expr::maj(leaf(c), leaf(d), leaf(e));
                        return Some(Candidate { gain: size - 2, depth: 0, expr: Expr::maj(leaf(a), leaf(b), inner) });
                    }
                }
            }
        }
    }
    // Three new nodes: M(a, M(..), M(..)), only over a small divisor set.
    if size > 3 && m <= 16 {
        for a in 0..m {
            for (i, &(t1, c1, d1, e1)) in triples.iter().enumerate() {
                let agree = !(lits[a].1 ^ t1) & mask;
                if (target ^ t1) & agree != 0 {
                    continue;
                }
                let care = !agree & mask;
                for &(t2, c2, d2, e2) in &triples[i + 1..] {
                    if (t2 ^ target) & care == 0 {
                        let w1 = Expr::maj(leaf(c1), leaf(d1), leaf(e1));
                        let w2 = Expr::maj(leaf(c2), leaf(d2), leaf(e2));
                        return Some(Candidate { gain: size - 3, depth: 0, expr: Expr::maj(leaf(a), w1, w2) });
                    }
                }
            }
        }
    }
    None
}

/// Naive substitution followed by `rounds` of reduce / reshape /
/// resubstitute / reduce. Returns the smallest graph seen.
pub fn optimize(aoig: &LogicGraph, rounds: usize) -> Result<LogicGraph, GraphError> {
    let naive = build_naive_mig(aoig)?;
    let mut best = naive.clone();
    let mut g = naive;
    for _ in 0..rounds {
        let before = g.clone();
        g = reduce_nodes(&g);
        g = reshape(&g, DEFAULT_RESHAPE_BUDGET);
        g = resubstitute(&g);
        g = reduce_nodes(&g);
        if g.node_count() < best.node_count() {
            best = g.clone();
        }
        if g == before {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Edge {
        Edge::input(i)
    }

    #[test]
    fn naive_and_or() {
        let mut a = LogicGraph::new(GraphKind::Aoig, 2);
        let n = a.and(x(0), x(1));
        let o = a.or(n, !x(0));
        a.add_output(o);
        let m = build_naive_mig(&a).unwrap();
        assert_eq!(m.to_text(), "kind MIG\ninputs 2\nn0 = MAJ(x0,x1,0)\nn1 = MAJ(n0,!x0,1)\noutput n1\n");
    }

    #[test]
    fn naive_rejects_mig() {
        let g = LogicGraph::new(GraphKind::Mig, 1);
        assert!(build_naive_mig(&g).is_err());
    }

    #[test]
    fn passthrough_graph() {
        let mut a = LogicGraph::new(GraphKind::Aoig, 1);
        a.add_output(x(0));
        let m = build_naive_mig(&a).unwrap();
        assert_eq!(m.node_count(), 0);
        assert_eq!(optimize(&a, 8).unwrap().outputs, vec![x(0)]);
    }

    #[test]
    fn reduce_collapses_eq() {
        let mut g = LogicGraph::new(GraphKind::Mig, 3);
        let a = g.maj(x(0), x(0), x(1));
        let b = g.maj(a, x(2), Edge::ZERO);
        g.add_output(b);
        let r = reduce_nodes(&g);
        assert_eq!(r.node_count(), 1);
        assert!(r.equivalent(&g));
        assert_eq!(reduce_nodes(&r), r);
    }

    #[test]
    fn reshape_budget_zero() {
        let mut g = LogicGraph::new(GraphKind::Mig, 3);
        let a = g.maj(x(0), x(1), x(2));
        g.add_output(!a);
        assert_eq!(reshape(&g, 0), g);
    }

    #[test]
    fn xor_stays_small() {
        let mut a = LogicGraph::new(GraphKind::Aoig, 2);
        let p = a.and(x(0), !x(1));
        let q = a.and(!x(0), x(1));
        let o = a.or(p, q);
        a.add_output(o);
        let m = optimize(&a, 8).unwrap();
        assert!(m.node_count() <= 3);
        assert!(m.equivalent(&build_naive_mig(&a).unwrap()));
    }
}
