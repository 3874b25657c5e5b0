use std::collections::HashMap;

use crate::graph::{Edge, GraphKind, LogicGraph, Node, Op, Source};

/// Replacement expression for a node. Leaves are edges of the graph
/// being rebuilt.
#[derive(Clone, Debug)]
pub(crate) enum Expr {
    Leaf(Edge),
    Maj(Box<[Expr; 3]>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn maj(a: Expr, b: Expr, c: Expr) -> Expr {
        Expr::Maj(Box::new([a, b, c]))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }
}

impl From<Edge> for Expr {
    fn from(e: Edge) -> Self {
        Expr::Leaf(e)
    }
}

/// Builds a fresh graph from `old`, replacing the nodes listed in
/// `overrides`. Construction is depth-first from the outputs, so an
/// override may reference any node outside its own fan-out cone.
pub(crate) fn rebuild(old: &LogicGraph, overrides: &HashMap<u32, Expr>) -> LogicGraph {
    let mut b = Builder { old, overrides, new: LogicGraph::new(old.kind, old.num_inputs), map: vec![None; old.nodes.len()] };
    let outs: Vec<Edge> = old.outputs.iter().map(|&e| b.edge(e)).collect();
    b.new.outputs = outs;
    b.new
}

struct Builder<'a> {
    old: &'a LogicGraph,
    overrides: &'a HashMap<u32, Expr>,
    new: LogicGraph,
    map: Vec<Option<Edge>>,
}

impl Builder<'_> {
    fn edge(&mut self, e: Edge) -> Edge {
        match e.source {
            Source::Node(j) => self.node(j).xor(e.complemented),
            _ => e,
        }
    }

    fn node(&mut self, j: u32) -> Edge {
        if let Some(e) = self.map[j as usize] {
            return e;
        }
        let e = if let Some(x) = self.overrides.get(&j) {
            let x = x.clone();
            self.expr(&x)
        } else {
            let n: &Node = &self.old.nodes[j as usize];
            let op = n.op;
            let fanin: Vec<Edge> = n.fanin.clone().into_iter().map(|f| self.edge(f)).collect();
            self.new.add_node(op, fanin)
        };
        self.map[j as usize] = Some(e);
        e
    }

    fn expr(&mut self, x: &Expr) -> Edge {
        match x {
            Expr::Leaf(e) => self.edge(*e),
            Expr::Not(inner) => !self.expr(inner),
            Expr::Maj(args) => {
                debug_assert_eq!(self.new.kind, GraphKind::Mig);
                let a = self.expr(&args[0]);
                let b = self.expr(&args[1]);
                let c = self.expr(&args[2]);
                self.new.add_node(Op::Maj, vec![a, b, c])
            }
        }
    }
}
