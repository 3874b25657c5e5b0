//! Loop skeletons that turn compiled bit slices into whole μPrograms.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use control_unit::{ProgramMemory, StoredProgram};
use row_allocator::{ComputeRow, Decoder};
use uprogram::{LoopShape, MicroOp, MicroProgram, Operand, ProgramBuilder, C0_REG, C1_REG, DST, SCRATCH, SELECT, SRC1, SRC2};

use crate::slice::{compile_fixed, compile_slice, single_entry, Mode, Slice, SliceCode};
use crate::slices::*;
use crate::{d, LatencyClass, OpError, OpKind, WIDTHS};

const OUTER: u8 = 23;
const INNER: u8 = 24;
const LEVEL: u8 = 25;

/// The per-iteration circuit of an operation and how it is looped.
#[derive(Clone, Debug)]
pub struct OpGraph {
    pub slice: Slice,
    pub shape: LoopShape,
    /// Values that live in compute rows from one iteration to the next.
    pub carried: Vec<&'static str>,
}

pub fn build_op_graph(kind: OpKind, n: u32) -> Result<OpGraph, OpError> {
    if !WIDTHS.contains(&n) {
        return Err(OpError::Width(n));
    }
    use OpKind::*;
    let (slice, carried) = match kind {
        Add => (add_slice(), vec!["carry"]),
        Sub => (sub_slice(), vec!["borrow"]),
        Gt | Ge => (greater_slice(), vec!["flag"]),
        Eq => (equal_slice(), vec!["ge flag", "gt flag"]),
        Max | Min => (greater_slice(), vec!["flag"]),
        Abs => (abs_slice(), vec!["negate"]),
        Relu => (relu_slice(), vec![]),
        IfElse => (mux_slice(d(SELECT, 0)), vec![]),
        AndRed => (reduce_slice(false, false), vec!["accumulator"]),
        OrRed => (reduce_slice(true, false), vec!["accumulator"]),
        XorRed => (parity_slice(false), vec!["accumulator"]),
        Bitcount => (count_slice(SRC1), vec!["column sum"]),
        Mul => (multiply_slice(), vec!["carry"]),
        Div => (divide_subtract_slice(), vec!["borrow"]),
    };
    let shape = match kind.spec().class {
        LatencyClass::Linear => LoopShape::Linear,
        LatencyClass::Logarithmic => LoopShape::Logarithmic,
        LatencyClass::Quadratic => LoopShape::Quadratic,
    };
    Ok(OpGraph { slice, shape, carried })
}

type CacheKey = (&'static str, Mode, Vec<ComputeRow>);

fn cache() -> &'static Mutex<HashMap<CacheKey, SliceCode>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, SliceCode>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Compiles a slice once per mode and carried-row pinning.
fn code(name: &'static str, slice: Slice, mode: Mode, fixed: &[ComputeRow]) -> Result<SliceCode, OpError> {
    let key = (name, mode, fixed.to_vec());
    if let Some(c) = cache().lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let dec = Decoder::default();
    let mut best = compile_slice(&slice, mode, fixed, &dec)?;
    if mode == Mode::Optimized {
        let tuned = match name {
            "parity" => Some(parity_schedule(false)),
            "parity last" => Some(parity_schedule(true)),
            _ => None,
        };
        if let Some((body, rows)) = tuned {
            let pinned = rows.iter().zip(fixed).all(|(a, b)| a == b);
            if pinned {
                let c = compile_fixed(&slice, body, rows, &dec)?;
                if c.commands() < best.commands() {
                    best = c;
                }
            }
        }
    }
    cache().lock().unwrap().insert(key, best.clone());
    Ok(best)
}

fn aap(dst: Operand, src: Operand) -> MicroOp {
    MicroOp::Aap { dst, src }
}

fn row(r: ComputeRow) -> Operand {
    Operand::Reg(single_entry(r))
}

fn ptr(reg: u8, offset: u8) -> Operand {
    Operand::Ptr { reg, offset }
}

fn constant(one: bool) -> Operand {
    Operand::Reg(if one { C1_REG } else { C0_REG })
}

/// Runs `body` `count` times using `counter`; nothing is emitted for a
/// zero count. The counter is back at zero afterwards.
fn repeat(
    b: &mut ProgramBuilder,
    counter: u8,
    count: u32,
    body: impl FnOnce(&mut ProgramBuilder),
) -> Result<(), OpError> {
    if count == 0 {
        return Ok(());
    }
    b.add(counter, count as i32);
    let top = b.here();
    body(b);
    b.loop_back(counter, top)?;
    Ok(())
}

fn step(b: &mut ProgramBuilder, regs: &[u8], delta: i32) {
    for &r in regs {
        b.add(r, delta);
    }
}

/// Builds the μProgram for one operation and element width.
pub fn build_program(kind: OpKind, n: u32, mode: Mode) -> Result<MicroProgram, OpError> {
    if !WIDTHS.contains(&n) {
        return Err(OpError::Width(n));
    }
    let mut b = ProgramBuilder::new();
    use OpKind::*;
    match kind {
        Add | Sub => {
            let c = if kind == Add { code("add", add_slice(), mode, &[])? } else { code("sub", sub_slice(), mode, &[])? };
            b.push(aap(row(c.rows[0]), constant(false)));
            repeat(&mut b, INNER, n, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, SRC2, DST], 1);
            })?;
        }
        Gt | Ge => {
            let flag = compare(&mut b, n, mode, kind == Ge)?;
            b.push(aap(ptr(DST, 0), row(flag)));
        }
        Max | Min => {
            let flag = compare(&mut b, n, mode, false)?;
            b.push(aap(ptr(SCRATCH, 0), row(flag)));
            step(&mut b, &[SRC1, SRC2], -(n as i32 - 1));
            let mut s = mux_slice(d(SCRATCH, 0));
            if kind == Min {
                s.inputs.swap(0, 1);
            }
            let c = code(if kind == Max { "max pick" } else { "min pick" }, s, mode, &[])?;
            repeat(&mut b, INNER, n, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, SRC2, DST], 1);
            })?;
        }
        Eq => {
            let c = code("equal", equal_slice(), mode, &[])?;
            b.push(aap(row(c.rows[0]), constant(true)));
            b.push(aap(row(c.rows[1]), constant(false)));
            repeat(&mut b, INNER, n, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, SRC2], 1);
            })?;
            let fin = code("equal final", equal_final_slice(), mode, &c.rows)?;
            b.extend(&fin.body);
        }
        Relu => {
            let c = code("relu", relu_slice(), mode, &[])?;
            b.add(SRC2, n as i32 - 1);
            repeat(&mut b, INNER, n / 2, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, DST], 2);
            })?;
        }
        IfElse => {
            let c = code("if_else", mux_slice(d(SELECT, 0)), mode, &[])?;
            repeat(&mut b, INNER, n, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, SRC2, DST], 1);
            })?;
        }
        Abs => {
            let c = code("abs", abs_slice(), mode, &[])?;
            b.push(aap(row(c.rows[0]), constant(false)));
            b.add(SRC2, n as i32 - 1);
            repeat(&mut b, INNER, n, |b| {
                b.extend(&c.body);
                step(b, &[SRC1, DST], 1);
            })?;
        }
        AndRed | OrRed | XorRed => {
            let (name, last_name, s, last) = match kind {
                AndRed => ("and", "and last", reduce_slice(false, false), reduce_slice(false, true)),
                OrRed => ("or", "or last", reduce_slice(true, false), reduce_slice(true, true)),
                _ => ("parity", "parity last", parity_slice(false), parity_slice(true)),
            };
            let c = code(name, s, mode, &[])?;
            let fin = code(last_name, last, mode, &c.rows)?;
            b.push(aap(row(c.rows[0]), constant(kind == AndRed)));
            repeat(&mut b, INNER, n / 2 - 1, |b| {
                b.extend(&c.body);
                step(b, &[SRC1], 2);
            })?;
            b.extend(&fin.body);
        }
        Bitcount => bitcount(&mut b, n, mode)?,
        Mul => multiply(&mut b, n, mode)?,
        Div => divide(&mut b, n, mode)?,
    }
    Ok(b.finish()?)
}

/// Signed a > b (or a >= b) into a compute row, least significant bit
/// first; the sign bit is handled with the operands' roles swapped.
fn compare(b: &mut ProgramBuilder, n: u32, mode: Mode, or_equal: bool) -> Result<ComputeRow, OpError> {
    let c = code("greater", greater_slice(), mode, &[])?;
    let sign = code("greater sign", greater_sign_slice(), mode, &c.rows)?;
    b.push(aap(row(c.rows[0]), constant(or_equal)));
    repeat(b, INNER, n - 1, |b| {
        b.extend(&c.body);
        step(b, &[SRC1, SRC2], 1);
    })?;
    b.extend(&sign.body);
    Ok(c.rows[0])
}

/// Column compression: each level folds its bits pairwise into a running
/// sum whose final value is one result bit, sending the carries to the
/// next level in the scratch region. B25 holds the next level's size.
fn bitcount(b: &mut ProgramBuilder, n: u32, mode: Mode) -> Result<(), OpError> {
    let c = code("count", count_slice(SRC1), mode, &[])?;
    let acc = c.rows[0];
    step(b, &[LEVEL], n as i32);
    repeat(b, OUTER, n.trailing_zeros(), |b| {
        b.push(aap(row(acc), constant(false)));
        let halve = b.here();
        b.push(MicroOp::Subi { reg: LEVEL, imm: 2 });
        b.push(MicroOp::Addi { reg: INNER, imm: 1 });
        b.branch(LEVEL, halve).expect("short branch");
        let top = b.here();
        b.extend(&c.body);
        step(b, &[SRC1], 2);
        step(b, &[SCRATCH, LEVEL], 1);
        b.loop_back(INNER, top).expect("short branch");
        b.push(aap(ptr(DST, 0), row(acc)));
        step(b, &[DST], 1);
        // After the first level the reader moves from the source to the
        // start of scratch; B21 marks that it has happened.
        b.push(MicroOp::Bnez { reg: SELECT, offset: 2 });
        b.push(MicroOp::Mod { reg: SRC1, imm: 1 });
        step(b, &[SELECT], 1);
    })?;
    b.push(aap(ptr(DST, 0), ptr(SRC1, 0)));
    step(b, &[DST], 1);
    repeat(b, INNER, n - n.trailing_zeros() - 1, |b| {
        b.push(aap(ptr(DST, 0), constant(false)));
        step(b, &[DST], 1);
    })
}

/// Shift-and-add into a 2n-bit product in scratch; the low half is
/// copied to the destination.
fn multiply(b: &mut ProgramBuilder, n: u32, mode: Mode) -> Result<(), OpError> {
    let c = code("multiply", multiply_slice(), mode, &[])?;
    let carry = c.rows[0];
    let n = n as i32;
    repeat(b, INNER, n as u32, |b| {
        b.push(aap(ptr(SCRATCH, 0), constant(false)));
        step(b, &[SCRATCH], 1);
    })?;
    step(b, &[SCRATCH], -n);
    let mut err = None;
    repeat(b, OUTER, n as u32, |b| {
        b.push(aap(row(carry), constant(false)));
        if let Err(e) = repeat(b, INNER, n as u32, |b| {
            b.extend(&c.body);
            step(b, &[SRC1, SCRATCH], 1);
        }) {
            err = Some(e);
        }
        b.push(aap(ptr(SCRATCH, 0), row(carry)));
        step(b, &[SRC1], -n);
        step(b, &[SCRATCH], -(n - 1));
        step(b, &[SRC2], 1);
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    step(b, &[SCRATCH], -n);
    repeat(b, INNER, n as u32, |b| {
        b.push(aap(ptr(DST, 0), ptr(SCRATCH, 0)));
        step(b, &[DST, SCRATCH], 1);
    })
}

/// Restoring division, quotient bits most significant first. The
/// partial remainder sits in two-row slots (remainder, trial result) at
/// the bottom of scratch, most significant bit in the slot at row 2, and
/// gains a slot at the top end each step, so the trial pass walks down
/// to row zero and stops there. A trial only counts if the divisor has
/// no bits above the remainder's width; those flags are computed first,
/// most significant down, into the destination rows the quotient bits
/// later replace.
fn divide(b: &mut ProgramBuilder, n: u32, mode: Mode) -> Result<(), OpError> {
    let sub = code("divide subtract", divide_subtract_slice(), mode, &[])?;
    let carry = sub.rows[0];
    let fits = code("divide fits", divide_fits_slice(), mode, &[])?;
    let quot = code("divide quotient", divide_quotient_slice(), mode, &sub.rows)?;
    let rest = code("divide restore", divide_restore_slice(), mode, &[])?;
    let n = n as i32;
    b.push(aap(ptr(DST, 0), constant(true)));
    b.push(aap(row(fits.rows[0]), constant(true)));
    step(b, &[SRC2], n - 1);
    repeat(b, INNER, n as u32 - 1, |b| {
        step(b, &[DST], 1);
        b.extend(&fits.body);
        step(b, &[SRC2], -1);
    })?;
    step(b, &[SRC1], n - 1);
    // The trial pass counts the width up in B25, the restore pass back
    // down while walking up to the new least significant slot.
    let mut err = None;
    repeat(b, OUTER, n as u32, |b| {
        step(b, &[SCRATCH], 2);
        b.push(aap(ptr(SCRATCH, 0), ptr(SRC1, 0)));
        b.push(aap(row(carry), constant(true)));
        let top = b.here();
        b.extend(&sub.body);
        step(b, &[SCRATCH], -2);
        step(b, &[SRC2, LEVEL], 1);
        let trial = b.branch(SCRATCH, top).map(|_| ());
        b.extend(&quot.body);
        let back = b.here();
        step(b, &[SCRATCH], 2);
        b.extend(&rest.body);
        step(b, &[SRC2], -1);
        let restore = b.loop_back(LEVEL, back).map(|_| ());
        step(b, &[SRC1, DST], -1);
        err = trial.and(restore).err();
    })?;
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// All sixteen operations at every supported width.
pub fn program_memory(mode: Mode) -> Result<ProgramMemory, OpError> {
    let mut mem = ProgramMemory::new();
    for kind in OpKind::ALL {
        for n in WIDTHS {
            let p = build_program(kind, n, mode)?;
            mem.insert(
                kind.opcode(),
                n,
                StoredProgram { name: kind.name().to_string(), needs_select: kind.spec().select, bytes: p.encode()? },
            );
        }
    }
    Ok(mem)
}
