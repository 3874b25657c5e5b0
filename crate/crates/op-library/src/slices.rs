//! AND/OR bit-slice circuits for each operation, with the placement of
//! their operands. Register roles: B18/B19 sources, B20 destination,
//! B21 select (or a second scratch pointer), B22 scratch.

use logic_graph::{Edge, GraphKind, LogicGraph};
use row_allocator::ComputeRow;
use uprogram::{MicroOp, Operand};

use crate::slice::{d, Loc, Slice};

const C0: Loc = Loc::Carried(0);
const C1: Loc = Loc::Carried(1);

fn graph(inputs: u32) -> (LogicGraph, Vec<Edge>) {
    let g = LogicGraph::new(GraphKind::Aoig, inputs);
    let ins = (0..inputs).map(|i| g.input(i)).collect();
    (g, ins)
}

fn slice(mut g: LogicGraph, outs: Vec<Edge>, inputs: Vec<Loc>, outputs: Vec<Loc>) -> Slice {
    for o in outs {
        g.add_output(o);
    }
    Slice { graph: g, inputs, outputs }
}

pub fn xor(g: &mut LogicGraph, a: Edge, b: Edge) -> Edge {
    let both = g.and(a, b);
    let any = g.or(a, b);
    g.and(!both, any)
}

pub fn maj(g: &mut LogicGraph, a: Edge, b: Edge, c: Edge) -> Edge {
    let ab = g.and(a, b);
    let any = g.or(a, b);
    let t = g.and(c, any);
    g.or(ab, t)
}

pub fn mux(g: &mut LogicGraph, s: Edge, a: Edge, b: Edge) -> Edge {
    let x = g.and(s, a);
    let y = g.and(!s, b);
    g.or(x, y)
}

/// Two-output full adder: (sum, carry).
pub fn full_adder(g: &mut LogicGraph, a: Edge, b: Edge, c: Edge) -> (Edge, Edge) {
    let n0 = g.and(a, b);
    let n1 = g.or(a, b);
    let n2 = g.and(!n0, n1);
    let n3 = g.and(n2, c);
    let n4 = g.or(n2, c);
    let n5 = g.and(!n3, n4);
    let n6 = g.or(n0, n3);
    (n5, n6)
}

/// Sum-only full adder, as a single-output circuit.
pub fn full_adder_sum_aoig() -> LogicGraph {
    let (mut g, x) = graph(3);
    let p = xor(&mut g, x[0], x[1]);
    let s = xor(&mut g, p, x[2]);
    g.add_output(s);
    g
}

/// Full adder with both outputs; inputs a, b, carry-in.
pub fn full_adder_aoig() -> LogicGraph {
    let (mut g, x) = graph(3);
    let (s, c) = full_adder(&mut g, x[0], x[1], x[2]);
    g.add_output(s);
    g.add_output(c);
    g
}

/// dst = a + b + carry, carry kept in a compute row.
pub fn add_slice() -> Slice {
    let (mut g, x) = graph(3);
    let (s, c) = full_adder(&mut g, x[0], x[1], x[2]);
    slice(g, vec![s, c], vec![d(18, 0), d(19, 0), C0], vec![d(20, 0), C0])
}

/// dst = a - b - borrow as a full adder on !a; the borrow starts at zero.
pub fn sub_slice() -> Slice {
    let (mut g, x) = graph(3);
    let (s, c) = full_adder(&mut g, !x[0], x[1], x[2]);
    slice(g, vec![!s, c], vec![d(18, 0), d(19, 0), C0], vec![d(20, 0), C0])
}

/// Running a > b flag, least significant bit first.
pub fn greater_slice() -> Slice {
    let (mut g, x) = graph(3);
    let f = maj(&mut g, x[0], !x[1], x[2]);
    slice(g, vec![f], vec![d(18, 0), d(19, 0), C0], vec![C0])
}

/// The sign bit step of a signed comparison: operands swap roles.
pub fn greater_sign_slice() -> Slice {
    let (mut g, x) = graph(3);
    let f = maj(&mut g, !x[0], x[1], x[2]);
    slice(g, vec![f], vec![d(18, 0), d(19, 0), C0], vec![C0])
}

/// Two flags, a >= b and a > b, updated together.
pub fn equal_slice() -> Slice {
    let (mut g, x) = graph(4);
    let ge = maj(&mut g, x[0], !x[1], x[2]);
    let gt = maj(&mut g, x[0], !x[1], x[3]);
    slice(g, vec![ge, gt], vec![d(18, 0), d(19, 0), C0, C1], vec![C0, C1])
}

/// a == b from the two flags.
pub fn equal_final_slice() -> Slice {
    let (mut g, x) = graph(2);
    let e = g.and(x[0], !x[1]);
    slice(g, vec![e], vec![C0, C1], vec![d(20, 0)])
}

/// Two result bits per pass, each masked by the inverted sign at B19.
pub fn relu_slice() -> Slice {
    let (mut g, x) = graph(3);
    let r0 = g.and(x[0], !x[2]);
    let r1 = g.and(x[1], !x[2]);
    slice(g, vec![r0, r1], vec![d(18, 0), d(18, 1), d(19, 0)], vec![d(20, 0), d(20, 1)])
}

/// dst = sel ? a : b with the select bit at `sel`.
pub fn mux_slice(sel: Loc) -> Slice {
    let (mut g, x) = graph(3);
    let r = mux(&mut g, x[2], x[0], x[1]);
    slice(g, vec![r], vec![d(18, 0), d(19, 0), sel], vec![d(20, 0)])
}

/// Conditional negation: `u` is set once a one bit has been passed in
/// a negative element; each bit is flipped while `u` holds.
pub fn abs_slice() -> Slice {
    let (mut g, x) = graph(3);
    let r = xor(&mut g, x[0], x[2]);
    let any = g.or(x[0], x[2]);
    let u = g.and(x[1], any);
    slice(g, vec![r, u], vec![d(18, 0), d(19, 0), C0], vec![d(20, 0), C0])
}

/// Folds two bits into an AND or OR accumulator.
pub fn reduce_slice(or: bool, last: bool) -> Slice {
    let (mut g, x) = graph(3);
    let r = if or {
        let t = g.or(x[0], x[1]);
        g.or(t, x[2])
    } else {
        let t = g.and(x[0], x[1]);
        g.and(t, x[2])
    };
    let out = if last { d(20, 0) } else { C0 };
    slice(g, vec![r], vec![d(18, 0), d(18, 1), C0], vec![out])
}

/// Folds two bits into a parity accumulator.
pub fn parity_slice(last: bool) -> Slice {
    let (mut g, x) = graph(3);
    let t = xor(&mut g, x[0], x[1]);
    let r = xor(&mut g, t, x[2]);
    let out = if last { d(20, 0) } else { C0 };
    slice(g, vec![r], vec![d(18, 0), d(18, 1), C0], vec![out])
}

/// Compresses two bits of one column into the running column sum; the
/// carry goes to the next column at B22.
pub fn count_slice(reg: u8) -> Slice {
    let (mut g, x) = graph(3);
    let (s, c) = full_adder(&mut g, x[0], x[1], x[2]);
    slice(g, vec![s, c], vec![d(reg, 0), d(reg, 1), C0], vec![C0, d(22, 0)])
}

/// One partial-product cell: p += a & b with carry.
pub fn multiply_slice() -> Slice {
    let (mut g, x) = graph(4);
    let pp = g.and(x[1], x[2]);
    let (s, c) = full_adder(&mut g, x[0], pp, x[3]);
    slice(g, vec![s, c], vec![d(22, 0), d(18, 0), d(19, 0), C0], vec![d(22, 0), C0])
}

/// Trial subtraction cell of the divider: t = r + !b + carry, the
/// carry starting at one and ending as "r >= b".
pub fn divide_subtract_slice() -> Slice {
    let (mut g, x) = graph(3);
    let (s, c) = full_adder(&mut g, x[0], !x[1], x[2]);
    slice(g, vec![s, c], vec![d(22, 0), d(19, 0), C0], vec![d(22, 1), C0])
}

/// Quotient bit from the final carry and the divisor-fits flag, which
/// it replaces in the destination.
pub fn divide_quotient_slice() -> Slice {
    let (mut g, x) = graph(2);
    let q = g.and(x[0], x[1]);
    slice(g, vec![q], vec![C0, d(20, 0)], vec![d(20, 0)])
}

/// Restore cell of the divider: r = q ? t : r.
pub fn divide_restore_slice() -> Slice {
    let (mut g, x) = graph(3);
    let r = mux(&mut g, x[2], x[0], x[1]);
    slice(g, vec![r], vec![d(22, 1), d(22, 0), d(20, 0)], vec![d(22, 0)])
}

/// Running "no divisor bit above here" flag, written out per step.
pub fn divide_fits_slice() -> Slice {
    let (mut g, x) = graph(2);
    let z = g.and(x[0], !x[1]);
    slice(g, vec![z, z], vec![C0, d(19, 0)], vec![C0, d(20, 0)])
}

fn reg(r: u8) -> Operand {
    Operand::Reg(r)
}

fn ptr(reg: u8, offset: u8) -> Operand {
    Operand::Ptr { reg, offset }
}

/// Hand-scheduled body for `parity_slice`, one command shorter than the
/// allocator's. The accumulator lives in T0.
pub fn parity_schedule(last: bool) -> (Vec<MicroOp>, Vec<ComputeRow>) {
    let aap = |dst, src| MicroOp::Aap { dst, src };
    let out = if last { aap(ptr(20, 0), reg(13)) } else { MicroOp::Ap { src: reg(13) } };
    let body = vec![
        aap(reg(9), ptr(18, 1)),
        aap(reg(5), ptr(18, 0)),
        aap(reg(2), reg(0)),
        aap(reg(11), reg(13)),
        aap(reg(12), reg(15)),
        aap(reg(9), ptr(18, 0)),
        out,
    ];
    (body, vec![ComputeRow::T0])
}
