use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Where an edge comes from. Constant 1 is the complemented zero leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Zero,
    Input(u32),
    Node(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: Source,
    pub complemented: bool,
}

impl Edge {
    pub const ZERO: Edge = Edge { source: Source::Zero, complemented: false };
    pub const ONE: Edge = Edge { source: Source::Zero, complemented: true };

    pub fn input(i: u32) -> Edge {
        Edge { source: Source::Input(i), complemented: false }
    }

    pub fn node(i: u32) -> Edge {
        Edge { source: Source::Node(i), complemented: false }
    }

    pub fn is_const(self) -> bool {
        self.source == Source::Zero
    }

    pub fn node_id(self) -> Option<u32> {
        match self.source {
            Source::Node(i) => Some(i),
            _ => None,
        }
    }

    /// `self` with its polarity flipped when `flip` is set.
    pub fn xor(self, flip: bool) -> Edge {
        Edge { source: self.source, complemented: self.complemented ^ flip }
    }
}

impl Not for Edge {
    type Output = Edge;
    fn not(self) -> Edge {
        self.xor(true)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.source, self.complemented) {
            (Source::Zero, false) => f.write_str("0"),
            (Source::Zero, true) => f.write_str("1"),
            (Source::Input(i), c) => write!(f, "{}x{i}", if c { "!" } else { "" }),
            (Source::Node(i), c) => write!(f, "{}n{i}", if c { "!" } else { "" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Or,
    Maj,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Maj => 3,
            _ => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Op::And => "AND",
            Op::Or => "OR",
            Op::Maj => "MAJ",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub fanin: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Aoig,
    Mig,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node n{0} refers to n{1}, which is not defined before it")]
    Cycle(u32, u32),
    #[error("node n{0} has {1} fan-in edges")]
    FanIn(u32, usize),
    #[error("node n{0} has op {1:?}, not allowed in this graph kind")]
    WrongOp(u32, Op),
    #[error("edge names input x{0} but the graph has {1} inputs")]
    UnknownInput(u32, u32),
    #[error("output refers to missing node n{0}")]
    DanglingOutput(u32),
    #[error("assignment covers {got} inputs, graph needs {want}")]
    MissingInput { got: usize, want: usize },
    #[error("expected a {0:?} graph")]
    WrongKind(GraphKind),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// AND/OR or majority graph with complementable edges.
///
/// Nodes are stored in topological order: a node only refers to nodes
/// with a smaller index. The node id is its index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogicGraph {
    pub kind: GraphKind,
    pub num_inputs: u32,
    pub nodes: Vec<Node>,
    pub outputs: Vec<Edge>,
}

/// Truth table of one signal over all input patterns, 64 patterns per word.
pub type TruthTable = Vec<u64>;

impl LogicGraph {
    pub fn new(kind: GraphKind, num_inputs: u32) -> Self {
        LogicGraph { kind, num_inputs, nodes: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&self, i: u32) -> Edge {
        assert!(i < self.num_inputs);
        Edge::input(i)
    }

    pub fn add_node(&mut self, op: Op, fanin: Vec<Edge>) -> Edge {
        self.nodes.push(Node { op, fanin });
        Edge::node(self.nodes.len() as u32 - 1)
    }

    pub fn and(&mut self, a: Edge, b: Edge) -> Edge {
        self.add_node(Op::And, vec![a, b])
    }

    pub fn or(&mut self, a: Edge, b: Edge) -> Edge {
        self.add_node(Op::Or, vec![a, b])
    }

    pub fn maj(&mut self, a: Edge, b: Edge, c: Edge) -> Edge {
        self.add_node(Op::Maj, vec![a, b, c])
    }

    pub fn add_output(&mut self, e: Edge) {
        self.outputs.push(e);
    }

    /// Number of gates (AND/OR or MAJ nodes).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let check = |id: u32, e: Edge| -> Result<(), GraphError> {
            match e.source {
                Source::Input(i) if i >= self.num_inputs => Err(GraphError::UnknownInput(i, self.num_inputs)),
                Source::Node(j) if j >= id => Err(GraphError::Cycle(id, j)),
                _ => Ok(()),
            }
        };
        for (id, n) in self.nodes.iter().enumerate() {
            let id = id as u32;
            let ok = match self.kind {
                GraphKind::Aoig => n.op != Op::Maj,
                GraphKind::Mig => n.op == Op::Maj,
            };
            if !ok {
                return Err(GraphError::WrongOp(id, n.op));
            }
            if n.fanin.len() != n.op.arity() {
                return Err(GraphError::FanIn(id, n.fanin.len()));
            }
            for &e in &n.fanin {
                check(id, e)?;
            }
        }
        for &o in &self.outputs {
            if let Source::Node(j) = o.source {
                if j as usize >= self.nodes.len() {
                    return Err(GraphError::DanglingOutput(j));
                }
            }
            check(u32::MAX, o)?;
        }
        Ok(())
    }

    /// Depth of each node counted from the inputs (a node fed only by
    /// leaves has level 0).
    pub fn levels(&self) -> Vec<u32> {
        let mut lv = vec![0u32; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            lv[i] = n.fanin.iter().filter_map(|e| e.node_id()).map(|j| lv[j as usize] + 1).max().unwrap_or(0);
        }
        lv
    }

    /// Depth of each node counted from the outputs (an output node has
    /// level 0). Unreachable nodes get `u32::MAX`.
    pub fn levels_from_outputs(&self) -> Vec<u32> {
        let mut lv = vec![u32::MAX; self.nodes.len()];
        for o in &self.outputs {
            if let Some(j) = o.node_id() {
                lv[j as usize] = 0;
            }
        }
        for i in (0..self.nodes.len()).rev() {
            if lv[i] == u32::MAX {
                continue;
            }
            for e in &self.nodes[i].fanin {
                if let Some(j) = e.node_id() {
                    let j = j as usize;
                    lv[j] = if lv[j] == u32::MAX { lv[i] + 1 } else { lv[j].max(lv[i] + 1) };
                }
            }
        }
        lv
    }

    /// Number of references to each node from other nodes and outputs.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.nodes.len()];
        for n in &self.nodes {
            for e in &n.fanin {
                if let Some(j) = e.node_id() {
                    c[j as usize] += 1;
                }
            }
        }
        for o in &self.outputs {
            if let Some(j) = o.node_id() {
                c[j as usize] += 1;
            }
        }
        c
    }

    /// Bit-parallel simulation: one word of patterns per input, one word
    /// per node out.
    pub fn simulate(&self, inputs: &[u64]) -> Vec<u64> {
        let mut vals: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = |e: &Edge| edge_value(e, inputs, &vals);
            let w = match n.op {
                Op::And => v(&n.fanin[0]) & v(&n.fanin[1]),
                Op::Or => v(&n.fanin[0]) | v(&n.fanin[1]),
                Op::Maj => {
                    let (a, b, c) = (v(&n.fanin[0]), v(&n.fanin[1]), v(&n.fanin[2]));
                    (a & b) | (a & c) | (b & c)
                }
            };
            vals.push(w);
        }
        vals
    }

    pub fn simulate_outputs(&self, inputs: &[u64]) -> Vec<u64> {
        let vals = self.simulate(inputs);
        self.outputs.iter().map(|e| edge_value(e, inputs, &vals)).collect()
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>, GraphError> {
        if assignment.len() < self.num_inputs as usize {
            return Err(GraphError::MissingInput { got: assignment.len(), want: self.num_inputs as usize });
        }
        let words: Vec<u64> = assignment.iter().map(|&b| if b { !0 } else { 0 }).collect();
        Ok(self.simulate_outputs(&words).into_iter().map(|w| w & 1 == 1).collect())
    }

    /// Exhaustive truth tables of the outputs. Practical up to ~20 inputs.
    pub fn truth_tables(&self) -> Vec<TruthTable> {
        let k = self.num_inputs as usize;
        let patterns = 1usize << k;
        let words = patterns.div_ceil(64);
        let mut out = vec![vec![0u64; words]; self.outputs.len()];
        for w in 0..words {
            let inputs = pattern_word(k, w);
            let vals = self.simulate_outputs(&inputs);
            let mask = if patterns < 64 { (1u64 << patterns) - 1 } else { !0 };
            for (o, v) in vals.into_iter().enumerate() {
                out[o][w] = v & mask;
            }
        }
        out
    }

    /// Same function at every output: exhaustive up to 16 inputs, 4096
    /// seeded random patterns beyond that.
    pub fn equivalent(&self, other: &LogicGraph) -> bool {
        if self.num_inputs != other.num_inputs || self.outputs.len() != other.outputs.len() {
            return false;
        }
        if self.num_inputs <= 16 {
            return self.truth_tables() == other.truth_tables();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..64 {
            let inputs: Vec<u64> = (0..self.num_inputs).map(|_| rng.gen()).collect();
            if self.simulate_outputs(&inputs) != other.simulate_outputs(&inputs) {
                return false;
            }
        }
        true
    }

    /// Rewrites M(!a,!b,c) as !M(a,b,!c) wherever a majority node has two
    /// or more complemented non-constant fan-ins, so that every node ends
    /// up with at most one. Node ids are kept.
    pub fn limit_complemented_fanins(&self) -> LogicGraph {
        let mut g = self.clone();
        if g.kind != GraphKind::Mig {
            return g;
        }
        let mut flipped = vec![false; g.nodes.len()];
        let fix = |e: &mut Edge, flipped: &[bool]| {
            if let Some(j) = e.node_id() {
                if flipped[j as usize] {
                    e.complemented = !e.complemented;
                }
            }
        };
        for v in 0..g.nodes.len() {
            for e in g.nodes[v].fanin.iter_mut() {
                fix(e, &flipped);
            }
            let negs = g.nodes[v].fanin.iter().filter(|e| e.complemented && !e.is_const()).count();
            if negs >= 2 {
                for e in g.nodes[v].fanin.iter_mut() {
                    e.complemented = !e.complemented;
                }
                flipped[v] = true;
            }
        }
        for e in g.outputs.iter_mut() {
            fix(e, &flipped);
        }
        g
    }

    /// Drops nodes not reachable from any output and renumbers the rest.
    pub fn cleanup(&self) -> LogicGraph {
        let mut live = vec![false; self.nodes.len()];
        for o in &self.outputs {
            if let Some(j) = o.node_id() {
                live[j as usize] = true;
            }
        }
        for i in (0..self.nodes.len()).rev() {
            if live[i] {
                for e in &self.nodes[i].fanin {
                    if let Some(j) = e.node_id() {
                        live[j as usize] = true;
                    }
                }
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut g = LogicGraph::new(self.kind, self.num_inputs);
        let map = |e: Edge, remap: &[u32]| match e.source {
            Source::Node(j) => Edge { source: Source::Node(remap[j as usize]), complemented: e.complemented },
            _ => e,
        };
        for (i, n) in self.nodes.iter().enumerate() {
            if live[i] {
                let fanin = n.fanin.iter().map(|&e| map(e, &remap)).collect();
                remap[i] = g.nodes.len() as u32;
                g.nodes.push(Node { op: n.op, fanin });
            }
        }
        g.outputs = self.outputs.iter().map(|&e| map(e, &remap)).collect();
        g
    }

    /// Merges nodes with identical operator and fan-in set, then drops
    /// dead nodes.
    pub fn strash(&self) -> LogicGraph {
        let mut seen: HashMap<(Op, Vec<Edge>), u32> = HashMap::new();
        let mut remap: Vec<Edge> = Vec::with_capacity(self.nodes.len());
        let mut g = LogicGraph::new(self.kind, self.num_inputs);
        let map = |e: Edge, remap: &[Edge]| match e.source {
            Source::Node(j) => remap[j as usize].xor(e.complemented),
            _ => e,
        };
        for n in &self.nodes {
            let fanin: Vec<Edge> = n.fanin.iter().map(|&e| map(e, &remap)).collect();
            let mut key = fanin.clone();
            key.sort();
            match seen.get(&(n.op, key.clone())) {
                Some(&j) => remap.push(Edge::node(j)),
                None => {
                    let id = g.nodes.len() as u32;
                    g.nodes.push(Node { op: n.op, fanin });
                    seen.insert((n.op, key), id);
                    remap.push(Edge::node(id));
                }
            }
        }
        g.outputs = self.outputs.iter().map(|&e| map(e, &remap)).collect();
        g.cleanup()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(match self.kind {
            GraphKind::Aoig => "kind AOIG\n",
            GraphKind::Mig => "kind MIG\n",
        });
        s.push_str(&format!("inputs {}\n", self.num_inputs));
        for (i, n) in self.nodes.iter().enumerate() {
            let args: Vec<String> = n.fanin.iter().map(|e| e.to_string()).collect();
            s.push_str(&format!("n{i} = {}({})\n", n.op.name(), args.join(",")));
        }
        for o in &self.outputs {
            s.push_str(&format!("output {o}\n"));
        }
        s
    }

    /// Parses the netlist format written by [`LogicGraph::to_text`]. The
    /// `kind` and `inputs` header lines are optional; node names may be
    /// any `n<digits>` defined before use.
    pub fn parse(text: &str) -> Result<LogicGraph, GraphError> {
        let mut kind: Option<GraphKind> = None;
        let mut declared_inputs: Option<u32> = None;
        let mut names: HashMap<String, u32> = HashMap::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut outputs: Vec<Edge> = Vec::new();
        let mut max_input = 0u32;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: &str| GraphError::Parse { line: ln + 1, msg: msg.to_string() };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parse_ref = |r: &str| -> Result<Edge, GraphError> {
                let r = r.trim();
                let (neg, body) = match r.strip_prefix('!') {
                    Some(b) => (true, b),
                    None => (false, r),
                };
                let e = match body {
                    "0" => Edge::ZERO,
                    "1" => Edge::ONE,
                    _ if body.starts_with('x') => {
                        let i: u32 = body[1..].parse().map_err(|_| err("bad input reference"))?;
                        max_input = max_input.max(i + 1);
                        Edge::input(i)
                    }
                    _ => Edge::node(*names.get(body).ok_or_else(|| err("reference to undefined node"))?),
                };
                Ok(e.xor(neg))
            };
            if let Some(rest) = line.strip_prefix("kind ") {
                kind = Some(match rest.trim() {
                    "AOIG" => GraphKind::Aoig,
                    "MIG" => GraphKind::Mig,
                    _ => return Err(err("unknown kind")),
                });
            } else if let Some(rest) = line.strip_prefix("inputs ") {
                declared_inputs = Some(rest.trim().parse().map_err(|_| err("bad input count"))?);
            } else if let Some(rest) = line.strip_prefix("output ") {
                let e = parse_ref(rest)?;
                outputs.push(e);
            } else if let Some((name, rhs)) = line.split_once('=') {
                if !outputs.is_empty() {
                    return Err(err("node defined after outputs"));
                }
                let name = name.trim();
                if !name.starts_with('n') || names.contains_key(name) {
                    return Err(err("bad or repeated node name"));
                }
                let rhs = rhs.trim();
                let open = rhs.find('(').ok_or_else(|| err("missing '('"))?;
                let args = rhs[open + 1..].strip_suffix(')').ok_or_else(|| err("missing ')'"))?;
                let op = match &rhs[..open] {
                    "AND" => Op::And,
                    "OR" => Op::Or,
                    "MAJ" => Op::Maj,
                    _ => return Err(err("unknown operator")),
                };
                let fanin = args.split(',').map(&mut parse_ref).collect::<Result<Vec<_>, _>>()?;
                if fanin.len() != op.arity() {
                    return Err(GraphError::FanIn(nodes.len() as u32, fanin.len()));
                }
                names.insert(name.to_string(), nodes.len() as u32);
                nodes.push(Node { op, fanin });
            } else {
                return Err(err("unrecognised line"));
            }
        }
        let kind = kind.unwrap_or(if nodes.iter().any(|n| n.op != Op::Maj) { GraphKind::Aoig } else { GraphKind::Mig });
        let num_inputs = declared_inputs.unwrap_or(max_input);
        let g = LogicGraph { kind, num_inputs, nodes, outputs };
        g.validate()?;
        Ok(g)
    }
}

impl fmt::Display for LogicGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn edge_value(e: &Edge, inputs: &[u64], vals: &[u64]) -> u64 {
    let v = match e.source {
        Source::Zero => 0,
        Source::Input(i) => inputs[i as usize],
        Source::Node(j) => vals[j as usize],
    };
    if e.complemented {
        !v
    } else {
        v
    }
}

/// Input words for patterns `64*w .. 64*w+63` of a k-input enumeration.
pub(crate) fn pattern_word(k: usize, w: usize) -> Vec<u64> {
    const BASE: [u64; 6] = [
        0xaaaa_aaaa_aaaa_aaaa,
        0xcccc_cccc_cccc_cccc,
        0xf0f0_f0f0_f0f0_f0f0,
        0xff00_ff00_ff00_ff00,
        0xffff_0000_ffff_0000,
        0xffff_ffff_0000_0000,
    ];
    (0..k).map(|i| if i < 6 { BASE[i] } else if (w >> (i - 6)) & 1 == 1 { !0 } else { 0 }).collect()
}


/// Random majority graph over `inputs` inputs with `nodes` nodes, used
/// to fuzz the rewrite rules. Fan-ins favour recent nodes so the graph
/// has some depth; outputs are drawn from the last few nodes.
pub fn random_mig<R: Rng>(rng: &mut R, inputs: u32, nodes: usize, outputs: usize) -> LogicGraph {
    let mut g = LogicGraph::new(GraphKind::Mig, inputs);
    let pick = |rng: &mut R, limit: usize| -> Edge {
        let e = if limit > 0 && rng.gen_bool(0.6) {
            Edge::node(rng.gen_range(limit.saturating_sub(4)..limit) as u32)
        } else if rng.gen_bool(0.1) || inputs == 0 {
            Edge::ZERO
        } else {
            Edge::input(rng.gen_range(0..inputs))
        };
        e.xor(rng.gen_bool(0.3))
    };
    for i in 0..nodes {
        let f = [pick(rng, i), pick(rng, i), pick(rng, i)];
        g.maj(f[0], f[1], f[2]);
    }
    for _ in 0..outputs.max(1) {
        let e = if nodes > 0 { Edge::node(rng.gen_range(nodes.saturating_sub(3)..nodes) as u32) } else { pick(rng, 0) };
        g.add_output(e.xor(rng.gen_bool(0.3)));
    }
    g
}
