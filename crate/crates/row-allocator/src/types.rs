use std::fmt;

use logic_graph::{Edge, LogicGraph, Source};
use subarray_sim::{ComputeRow, Wordline};

/// A D-group row reached through a pointer register plus a small offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DRef {
    pub reg: u8,
    pub offset: u8,
}

impl DRef {
    pub const fn new(reg: u8, offset: u8) -> Self {
        DRef { reg, offset }
    }
}

impl fmt::Display for DRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}+{}", self.reg, self.offset)
    }
}

/// Where a graph input lives when the slice starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputLoc {
    D(DRef),
    /// Already held (true polarity) in a compute row, e.g. a carry.
    Resident(ComputeRow),
}

/// Where a graph output must be when the slice ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputSink {
    D(DRef),
    /// Kept in a compute row (true polarity) for the next iteration.
    Resident(ComputeRow),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bindings {
    pub inputs: Vec<InputLoc>,
    pub outputs: Vec<OutputSink>,
    /// Scratch D rows for values that must survive a phase change.
    pub spill: Vec<DRef>,
}

impl Bindings {
    /// Inputs at B18+i, outputs at B20+j, spill slots in B26..B31.
    pub fn plain(inputs: usize, outputs: usize) -> Self {
        Bindings {
            inputs: (0..inputs).map(|i| InputLoc::D(DRef::new(18, i as u8))).collect(),
            outputs: (0..outputs).map(|j| OutputSink::D(DRef::new(20, j as u8))).collect(),
            spill: (26..32).map(|r| DRef::new(r, 0)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopySrc {
    D(DRef),
    C0,
    C1,
    Row(Wordline),
    /// Re-activation of a triple that was just computed.
    Entry(u8),
}

impl fmt::Display for CopySrc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopySrc::D(d) => write!(f, "{d}"),
            CopySrc::C0 => f.write_str("C0"),
            CopySrc::C1 => f.write_str("C1"),
            CopySrc::Row(w) => write!(f, "{w}"),
            CopySrc::Entry(e) => write!(f, "B{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CopyDst {
    Row(Wordline),
    D(DRef),
}

impl fmt::Display for CopyDst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopyDst::Row(w) => write!(f, "{w}"),
            CopyDst::D(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowCopy {
    pub src: CopySrc,
    pub dst: CopyDst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Copy(RowCopy),
    /// Triple activation computing `node` on decoder entry `entry`.
    Maj { node: u32, entry: u8 },
}

/// Commands of one phase: `pre` copies fill compute rows before any
/// majority of the phase runs; `body` holds the majorities, their
/// result copies and end-of-phase spills.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseSchedule {
    pub pre: Vec<RowCopy>,
    pub body: Vec<Step>,
}

/// One operand binding: fan-in `slot` of `node` is read through
/// `wordline` during `phase`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AllocEntry {
    pub node: u32,
    pub slot: u8,
    pub wordline: Wordline,
    pub phase: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationMap {
    /// The graph actually scheduled: the input graph with complemented
    /// fan-ins moved so that no node reads two inverted operands.
    pub graph: LogicGraph,
    pub bindings: Bindings,
    pub entries: Vec<AllocEntry>,
    pub phase_count: usize,
    pub phases: Vec<PhaseSchedule>,
}

impl AllocationMap {
    /// `(n<node>.<slot>, <row>, <phase>)` lines.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("(n{}.{}, {}, {})\n", e.node, e.slot, e.wordline, e.phase)).collect()
    }

    /// Number of copies plus majorities before any merging.
    pub fn step_count(&self) -> usize {
        self.phases.iter().map(|p| p.pre.len() + p.body.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("graph must be a valid majority graph")]
    NotMig,
    #[error("bindings cover {got} inputs/outputs, graph has {want}")]
    BindingCount { got: usize, want: usize },
    #[error("no allocation found for node n{0}")]
    Infeasible(u32),
    #[error("out of spill rows")]
    SpillExhausted,
    #[error("cannot route output {0} to its sink")]
    Unroutable(usize),
}

/// A signal value irrespective of polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Val {
    Zero,
    In(u32),
    Node(u32),
}

/// A value with polarity, i.e. what a row holds or an operand needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Lit {
    pub v: Val,
    pub neg: bool,
}

impl Lit {
    pub fn of(e: Edge) -> Lit {
        let v = match e.source {
            Source::Zero => Val::Zero,
            Source::Input(i) => Val::In(i),
            Source::Node(j) => Val::Node(j),
        };
        Lit { v, neg: e.complemented }
    }

    pub fn xor(self, f: bool) -> Lit {
        Lit { v: self.v, neg: self.neg ^ f }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = if self.neg { "!" } else { "" };
        match self.v {
            Val::Zero => write!(f, "{}", if self.neg { "1" } else { "0" }),
            Val::In(i) => write!(f, "{n}x{i}"),
            Val::Node(j) => write!(f, "{n}n{j}"),
        }
    }
}
