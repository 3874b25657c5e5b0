use std::collections::HashMap;
use std::fmt;

use crate::graph::{Edge, GraphError, GraphKind, LogicGraph, Source};
use crate::rebuild::{rebuild, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleName {
    Commutativity,
    MajorityEq,
    MajorityComp,
    Associativity,
    Distributivity,
    InverterPropagation,
    Relevance,
    ComplementaryAssociativity,
}

impl RuleName {
    pub const ALL: [RuleName; 8] = [
        RuleName::Commutativity,
        RuleName::MajorityEq,
        RuleName::MajorityComp,
        RuleName::Associativity,
        RuleName::Distributivity,
        RuleName::InverterPropagation,
        RuleName::Relevance,
        RuleName::ComplementaryAssociativity,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    LtoR,
    RtoL,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RewriteRule {
    pub name: RuleName,
    pub direction: Direction,
}

impl RewriteRule {
    pub const fn new(name: RuleName, direction: Direction) -> Self {
        RewriteRule { name, direction }
    }

    pub fn all() -> Vec<RewriteRule> {
        RuleName::ALL
            .iter()
            .flat_map(|&n| [RewriteRule::new(n, Direction::LtoR), RewriteRule::new(n, Direction::RtoL)])
            .collect()
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::LtoR => "->",
            Direction::RtoL => "<-",
        };
        write!(f, "{:?}{d}", self.name)
    }
}

/// Where a rule is applied. `perm` maps pattern positions to fan-in
/// slots of `node`; `inner` does the same for the child node the
/// pattern reaches into; `extra` is the signal a rule introduces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Binding {
    pub node: u32,
    pub perm: [u8; 3],
    pub inner: [u8; 3],
    pub extra: Option<Edge>,
}

const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
const ID: [u8; 3] = [0, 1, 2];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("binding does not match the rule pattern")]
    NoMatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Depth below the bound node that relevance substitution reaches.
const RELEVANCE_DEPTH: u32 = 2;

fn fanin(g: &LogicGraph, v: u32) -> [Edge; 3] {
    let f = &g.nodes[v as usize].fanin;
    [f[0], f[1], f[2]]
}

fn pick(f: [Edge; 3], p: [u8; 3]) -> [Edge; 3] {
    [f[p[0] as usize], f[p[1] as usize], f[p[2] as usize]]
}

fn plain_node(e: Edge) -> Option<u32> {
    if e.complemented {
        None
    } else {
        e.node_id()
    }
}

fn valid_perm(p: [u8; 3]) -> bool {
    let mut s = p;
    s.sort();
    s == ID
}

fn extra_ok(e: Option<Edge>, v: u32, g: &LogicGraph) -> Option<Edge> {
    let e = e?;
    match e.source {
        Source::Node(j) if j >= v => None,
        Source::Input(i) if i >= g.num_inputs => None,
        _ => Some(e),
    }
}

/// Replacement expression for the bound node, or `NoMatch`.
fn rewrite(g: &LogicGraph, rule: RewriteRule, b: &Binding) -> Result<Expr, RuleError> {
    use Direction::*;
    use RuleName::*;
    let v = b.node;
    if v as usize >= g.nodes.len() || !valid_perm(b.perm) || !valid_perm(b.inner) {
        return Err(RuleError::NoMatch);
    }
    let f = fanin(g, v);
    let [p0, p1, p2] = pick(f, b.perm);
    let leaf = |e: Edge| Expr::Leaf(e);
    // Rebuild the node with slot perm[0] replaced.
    let with_slot0 = |x: Expr| {
        let mut args: Vec<Expr> = f.iter().map(|&e| leaf(e)).collect();
        args[b.perm[0] as usize] = x;
        let mut it = args.into_iter();
        Expr::maj(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    };
    let inner = |e: Edge| -> Result<(u32, [Edge; 3]), RuleError> {
        let w = plain_node(e).ok_or(RuleError::NoMatch)?;
        Ok((w, pick(fanin(g, w), b.inner)))
    };
    match (rule.name, rule.direction) {
        (Commutativity, _) => Ok(Expr::maj(leaf(p1), leaf(p0), leaf(p2))),
        (MajorityEq, LtoR) if p0 == p1 => Ok(leaf(p0)),
        (MajorityComp, LtoR) if p0 == !p1 => Ok(leaf(p2)),
        (MajorityEq, RtoL) => {
            let z = extra_ok(b.extra, v, g).ok_or(RuleError::NoMatch)?;
            Ok(with_slot0(Expr::maj(leaf(p0), leaf(p0), leaf(z))))
        }
        (MajorityComp, RtoL) => {
            let x = extra_ok(b.extra, v, g).ok_or(RuleError::NoMatch)?;
            Ok(with_slot0(Expr::maj(leaf(x), leaf(!x), leaf(p0))))
        }
        (Associativity, _) => {
            let (_, [y, u, z]) = inner(p2)?;
            if u != p1 {
                return Err(RuleError::NoMatch);
            }
            Ok(Expr::maj(leaf(z), leaf(p1), Expr::maj(leaf(y), leaf(p1), leaf(p0))))
        }
        (Distributivity, LtoR) => {
            let (_, [u, w, z]) = inner(p2)?;
            let (x, y) = (p0, p1);
            Ok(Expr::maj(
                Expr::maj(leaf(x), leaf(y), leaf(u)),
                Expr::maj(leaf(x), leaf(y), leaf(w)),
                leaf(z),
            ))
        }
        (Distributivity, RtoL) => {
            let (_, [x, y, u]) = inner(p0)?;
            let bn = plain_node(p1).ok_or(RuleError::NoMatch)?;
            let mut rest: Vec<Edge> = fanin(g, bn).to_vec();
            for want in [x, y] {
                let pos = rest.iter().position(|&e| e == want).ok_or(RuleError::NoMatch)?;
                rest.remove(pos);
            }
            Ok(Expr::maj(leaf(x), leaf(y), Expr::maj(leaf(u), leaf(rest[0]), leaf(p2))))
        }
        (InverterPropagation, _) => {
            if b.perm != ID {
                return Err(RuleError::NoMatch);
            }
            Ok(Expr::not(Expr::maj(leaf(!f[0]), leaf(!f[1]), leaf(!f[2]))))
        }
        (Relevance, _) => {
            let (x, y) = (p0, p1);
            let zid = p2.node_id().ok_or(RuleError::NoMatch)?;
            let z = substitute(g, zid, x, y, 1).ok_or(RuleError::NoMatch)?;
            let z = if p2.complemented { Expr::not(z) } else { z };
            Ok(Expr::maj(leaf(x), leaf(y), z))
        }
        (ComplementaryAssociativity, LtoR) => {
            let (_, [y, nu, z]) = inner(p2)?;
            if nu != !p1 {
                return Err(RuleError::NoMatch);
            }
            Ok(Expr::maj(leaf(p0), leaf(p1), Expr::maj(leaf(y), leaf(p0), leaf(z))))
        }
        (ComplementaryAssociativity, RtoL) => {
            let (_, [y, x, z]) = inner(p2)?;
            if x != p0 {
                return Err(RuleError::NoMatch);
            }
            Ok(Expr::maj(leaf(p0), leaf(p1), Expr::maj(leaf(y), leaf(!p1), leaf(z))))
        }
        _ => Err(RuleError::NoMatch),
    }
}

/// Copy of node `j` with every leaf occurrence of `x`'s source replaced
/// by `!y` (keeping relative polarity). `None` when nothing was replaced.
fn substitute(g: &LogicGraph, j: u32, x: Edge, y: Edge, depth: u32) -> Option<Expr> {
    let mut hit = false;
    let args: Vec<Expr> = fanin(g, j)
        .iter()
        .map(|&e| {
            if e.source == x.source {
                hit = true;
                Expr::Leaf((!y).xor(e.complemented != x.complemented))
            } else if let (Some(c), true) = (e.node_id(), depth < RELEVANCE_DEPTH) {
                match substitute(g, c, x, y, depth + 1) {
                    Some(s) => {
                        hit = true;
                        if e.complemented {
                            Expr::not(s)
                        } else {
                            s
                        }
                    }
                    None => Expr::Leaf(e),
                }
            } else {
                Expr::Leaf(e)
            }
        })
        .collect();
    if !hit {
        return None;
    }
    let mut it = args.into_iter();
    Some(Expr::maj(it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
}

/// Applies one rule at one binding. The result has dead nodes removed.
pub fn apply_rule(g: &LogicGraph, rule: RewriteRule, binding: &Binding) -> Result<LogicGraph, RuleError> {
    if g.kind != GraphKind::Mig {
        return Err(GraphError::WrongKind(GraphKind::Mig).into());
    }
    let expr = rewrite(g, rule, binding)?;
    let mut ov = HashMap::new();
    ov.insert(binding.node, expr);
    Ok(rebuild(g, &ov).cleanup())
}

fn candidate_bindings(g: &LogicGraph, rule: RewriteRule, v: u32) -> Vec<Binding> {
    use Direction::*;
    use RuleName::*;
    let mk = |perm, inner, extra| Binding { node: v, perm, inner, extra };
    let mut out = Vec::new();
    match (rule.name, rule.direction) {
        (InverterPropagation, _) => out.push(mk(ID, ID, None)),
        (MajorityEq, RtoL) | (MajorityComp, RtoL) => {
            let mut extras: Vec<Edge> = (0..g.num_inputs).map(Edge::input).collect();
            if rule.name == MajorityEq {
                extras.push(Edge::ZERO);
            }
            for k in 0..3u8 {
                let perm = [k, (k + 1) % 3, (k + 2) % 3];
                for &x in &extras {
                    out.push(mk(perm, ID, Some(x)));
                }
            }
        }
        (Associativity, _) | (Distributivity, _) | (ComplementaryAssociativity, _) => {
            for p in PERMS {
                for q in PERMS {
                    out.push(mk(p, q, None));
                }
            }
        }
        _ => {
            for p in PERMS {
                out.push(mk(p, ID, None));
            }
        }
    }
    out
}

/// Every binding at node `v` that matches `rule`.
pub fn bindings_at(g: &LogicGraph, rule: RewriteRule, v: u32) -> Vec<Binding> {
    candidate_bindings(g, rule, v).into_iter().filter(|b| rewrite(g, rule, b).is_ok()).collect()
}

/// Every matching binding, nodes in index order.
pub fn bindings(g: &LogicGraph, rule: RewriteRule) -> Vec<Binding> {
    (0..g.nodes.len() as u32).flat_map(|v| bindings_at(g, rule, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Edge {
        Edge::input(i)
    }

    fn single(a: Edge, b: Edge, c: Edge, n: u32) -> LogicGraph {
        let mut g = LogicGraph::new(GraphKind::Mig, n);
        let m = g.maj(a, b, c);
        g.add_output(m);
        g
    }

    fn b0(perm: [u8; 3]) -> Binding {
        Binding { node: 0, perm, inner: ID, extra: None }
    }

    #[test]
    fn majority_eq_collapses() {
        let g = single(x(0), x(0), x(1), 2);
        let r = apply_rule(&g, RewriteRule::new(RuleName::MajorityEq, Direction::LtoR), &b0(ID)).unwrap();
        assert_eq!(r.node_count(), 0);
        assert_eq!(r.outputs, vec![x(0)]);
    }

    #[test]
    fn majority_comp_collapses() {
        let g = single(x(0), !x(0), x(1), 2);
        let r = apply_rule(&g, RewriteRule::new(RuleName::MajorityComp, Direction::LtoR), &b0(ID)).unwrap();
        assert_eq!(r.outputs, vec![x(1)]);
    }

    #[test]
    fn inverter_propagation() {
        let mut g = LogicGraph::new(GraphKind::Mig, 3);
        let m = g.maj(x(0), x(1), x(2));
        g.add_output(!m);
        let r = apply_rule(&g, RewriteRule::new(RuleName::InverterPropagation, Direction::LtoR), &b0(ID)).unwrap();
        assert_eq!(r.to_text(), "kind MIG\ninputs 3\nn0 = MAJ(!x0,!x1,!x2)\noutput n0\n");
        assert!(r.equivalent(&g));
    }

    #[test]
    fn no_match_leaves_error() {
        let g = single(x(0), x(1), x(2), 3);
        let r = apply_rule(&g, RewriteRule::new(RuleName::MajorityEq, Direction::LtoR), &b0(ID));
        assert_eq!(r, Err(RuleError::NoMatch));
    }

    #[test]
    fn distributivity_right_to_left_saves_a_node() {
        // M(M(x,y,u), M(x,y,v), z)
        let mut g = LogicGraph::new(GraphKind::Mig, 5);
        let a = g.maj(x(0), x(1), x(2));
        let b = g.maj(x(0), x(1), x(3));
        let t = g.maj(a, b, x(4));
        g.add_output(t);
        let rule = RewriteRule::new(RuleName::Distributivity, Direction::RtoL);
        let bs = bindings(&g, rule);
        assert!(!bs.is_empty());
        let r = apply_rule(&g, rule, &bs[0]).unwrap();
        assert_eq!(r.node_count(), 2);
        assert!(r.equivalent(&g));
    }

    #[test]
    fn aoig_rejected() {
        let mut g = LogicGraph::new(GraphKind::Aoig, 2);
        let a = g.and(x(0), x(1));
        g.add_output(a);
        let r = apply_rule(&g, RewriteRule::new(RuleName::Commutativity, Direction::LtoR), &b0(ID));
        assert!(matches!(r, Err(RuleError::Graph(_))));
    }

    #[test]
    fn relevance_substitutes() {
        // M(x0, x1, M(x0, x2, x3)) -> M(x0, x1, M(!x1, x2, x3))
        let mut g = LogicGraph::new(GraphKind::Mig, 4);
        let z = g.maj(x(0), x(2), x(3));
        let t = g.maj(x(0), x(1), z);
        g.add_output(t);
        let rule = RewriteRule::new(RuleName::Relevance, Direction::LtoR);
        let r = apply_rule(&g, rule, &Binding { node: 1, perm: ID, inner: ID, extra: None }).unwrap();
        assert!(r.to_text().contains("MAJ(!x1,x2,x3)"));
        assert!(r.equivalent(&g));
    }
}
