use logic_graph::{build_naive_mig, optimize, LogicGraph};
use row_allocator::{allocate_with, Bindings, ComputeRow, DRef, Decoder, InputLoc, OutputSink};
use subarray_sim::{BitRow, RowAddr, Subarray};
use uprogram::{coalesce_with, run_straight, translate_with, MicroOp, Operand, RegFile};

use crate::OpError;

/// How a bit slice is turned into majority gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Optimized,
    AmbitNaive,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Optimized => "optimized",
            Mode::AmbitNaive => "naive",
        }
    }
}

/// Where a slice input or output lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    D(DRef),
    /// Held in a compute row between iterations; the index picks one of
    /// the slice's carried values.
    Carried(usize),
}

pub fn d(reg: u8, offset: u8) -> Loc {
    Loc::D(DRef::new(reg, offset))
}

/// One loop iteration of an operation as an AND/OR graph plus the
/// placement of its inputs and outputs.
#[derive(Clone, Debug)]
pub struct Slice {
    pub graph: LogicGraph,
    pub inputs: Vec<Loc>,
    pub outputs: Vec<Loc>,
}

impl Slice {
    pub fn carried(&self) -> usize {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter_map(|l| match l {
                Loc::Carried(k) => Some(k + 1),
                Loc::D(_) => None,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct SliceCode {
    pub body: Vec<MicroOp>,
    /// Compute row chosen for each carried value.
    pub rows: Vec<ComputeRow>,
    pub mig: LogicGraph,
}

impl SliceCode {
    pub fn commands(&self) -> usize {
        self.body.iter().filter(|o| o.is_command()).count()
    }
}

pub fn to_mig(graph: &LogicGraph, mode: Mode) -> Result<LogicGraph, OpError> {
    let g = match mode {
        Mode::Optimized => optimize(graph, logic_graph::DEFAULT_ROUNDS)?,
        Mode::AmbitNaive => build_naive_mig(graph)?,
    };
    Ok(g)
}

fn row_choices(k: usize, fixed: &[ComputeRow]) -> Vec<Vec<ComputeRow>> {
    let mut out: Vec<Vec<ComputeRow>> = vec![fixed.to_vec()];
    for _ in fixed.len()..k {
        let mut next = Vec::new();
        for p in &out {
            for r in ComputeRow::ALL {
                if !p.contains(&r) {
                    let mut q = p.clone();
                    q.push(r);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

fn bindings(slice: &Slice, rows: &[ComputeRow]) -> Bindings {
    let inputs = slice
        .inputs
        .iter()
        .map(|l| match *l {
            Loc::D(d) => InputLoc::D(d),
            Loc::Carried(k) => InputLoc::Resident(rows[k]),
        })
        .collect();
    let outputs = slice
        .outputs
        .iter()
        .map(|l| match *l {
            Loc::D(d) => OutputSink::D(d),
            Loc::Carried(k) => OutputSink::Resident(rows[k]),
        })
        .collect();
    Bindings { inputs, outputs, spill: (26..32).map(|r| DRef::new(r, 0)).collect() }
}

/// Compiles a slice, trying every placement of the carried values not
/// pinned by `fixed` and keeping the shortest body that checks out on
/// the simulator.
pub fn compile_slice(slice: &Slice, mode: Mode, fixed: &[ComputeRow], decoder: &Decoder) -> Result<SliceCode, OpError> {
    let mig = to_mig(&slice.graph, mode)?;
    compile_mig(slice, &mig, fixed, decoder)
}

/// As `compile_slice`, for a majority graph equivalent to the slice's
/// circuit.
pub fn compile_mig(slice: &Slice, mig: &LogicGraph, fixed: &[ComputeRow], decoder: &Decoder) -> Result<SliceCode, OpError> {
    let mut best: Option<SliceCode> = None;
    let mut last_err = None;
    for rows in row_choices(slice.carried(), fixed) {
        let bind = bindings(slice, &rows);
        let body = allocate_with(mig, &bind, decoder)
            .map_err(OpError::from)
            .and_then(|alloc| Ok(translate_with(mig, &alloc, decoder)?))
            .map(|ops| coalesce_with(&ops, decoder));
        let body = match body {
            Ok(b) => b,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let code = SliceCode { body, rows, mig: mig.clone() };
        if best.as_ref().is_some_and(|b| b.commands() <= code.commands()) {
            continue;
        }
        match check_slice(slice, &code, decoder) {
            Ok(()) => best = Some(code),
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(OpError::NoSchedule))
}

/// Wraps a ready-made body, checking it against the slice first.
pub fn compile_fixed(slice: &Slice, body: Vec<MicroOp>, rows: Vec<ComputeRow>, decoder: &Decoder) -> Result<SliceCode, OpError> {
    let mig = to_mig(&slice.graph, Mode::Optimized)?;
    let code = SliceCode { body, rows, mig };
    check_slice(slice, &code, decoder)?;
    Ok(code)
}

fn probe_regs() -> RegFile {
    let mut regs = [0u32; 32];
    for (i, r) in regs.iter_mut().enumerate().skip(18) {
        *r = 16 * (i as u32 - 17);
    }
    regs
}

fn d_addr(d: DRef, regs: &RegFile) -> RowAddr {
    uprogram::resolve(Operand::Ptr { reg: d.reg, offset: d.offset }, regs)
}

pub(crate) fn row_addr(r: ComputeRow) -> RowAddr {
    RowAddr::B(single_entry(r))
}

/// Decoder entry that raises just the row's true wordline.
pub fn single_entry(r: ComputeRow) -> u8 {
    match r {
        ComputeRow::T0 => 0,
        ComputeRow::T1 => 1,
        ComputeRow::T2 => 2,
        ComputeRow::T3 => 3,
        ComputeRow::Dcc0 => 4,
        ComputeRow::Dcc1 => 6,
    }
}

/// Runs the body on every input combination and compares against the
/// graph, honouring aliasing between input and output rows.
pub fn check_slice(slice: &Slice, code: &SliceCode, decoder: &Decoder) -> Result<(), OpError> {
    let k = slice.inputs.len();
    let lanes = 1usize << k;
    let regs = probe_regs();
    let mut sub = Subarray::with_decoder(lanes, decoder.clone());
    let mut inputs = Vec::with_capacity(k);
    for i in 0..k {
        let bits: Vec<bool> = (0..lanes).map(|l| l >> i & 1 == 1).collect();
        inputs.push(BitRow::from_bools(&bits));
    }
    for (i, l) in slice.inputs.iter().enumerate() {
        let addr = match *l {
            Loc::D(d) => d_addr(d, &regs),
            Loc::Carried(c) => row_addr(code.rows[c]),
        };
        sub.write_row(addr, &inputs[i])?;
    }
    run_straight(&code.body, &regs, &mut sub)?;
    let words: Vec<u64> = (0..k).map(|i| inputs[i].words()[0]).collect();
    let want = slice.graph.simulate_outputs(&words);
    let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
    for (j, l) in slice.outputs.iter().enumerate() {
        let addr = match *l {
            Loc::D(d) => d_addr(d, &regs),
            Loc::Carried(c) => row_addr(code.rows[c]),
        };
        let got = sub.read_row(addr)?.words()[0] & mask;
        if got != want[j] & mask {
            return Err(OpError::SliceMismatch);
        }
    }
    Ok(())
}
