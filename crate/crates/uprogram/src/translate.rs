use logic_graph::LogicGraph;
use row_allocator::{AllocationMap, CopyDst, CopySrc, DRef, Decoder, RowCopy, Step, Wordline};

use crate::op::{MicroOp, Operand, C0_REG, C1_REG};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("no B-group address raises exactly {0}")]
    NoAddress(String),
    #[error("D row {0} cannot be addressed by a μOp operand")]
    BadDRef(DRef),
    #[error("allocation does not belong to this graph")]
    Mismatch,
}

pub fn d_operand(d: DRef) -> Result<Operand, TranslateError> {
    let op = if d.offset == 0 { Operand::Reg(d.reg) } else { Operand::Ptr { reg: d.reg, offset: d.offset } };
    op.encode().map(|_| op).ok_or(TranslateError::BadDRef(d))
}

fn wordline_operand(decoder: &Decoder, w: Wordline) -> Result<Operand, TranslateError> {
    decoder.find(&[w]).map(|e| Operand::Reg(e as u8)).ok_or_else(|| TranslateError::NoAddress(w.to_string()))
}

fn src_operand(decoder: &Decoder, s: CopySrc) -> Result<Operand, TranslateError> {
    match s {
        CopySrc::D(d) => d_operand(d),
        CopySrc::C0 => Ok(Operand::Reg(C0_REG)),
        CopySrc::C1 => Ok(Operand::Reg(C1_REG)),
        CopySrc::Row(w) => wordline_operand(decoder, w),
        CopySrc::Entry(e) => Ok(Operand::Reg(e)),
    }
}

fn copy_op(decoder: &Decoder, c: &RowCopy) -> Result<MicroOp, TranslateError> {
    let dst = match c.dst {
        CopyDst::Row(w) => wordline_operand(decoder, w)?,
        CopyDst::D(d) => d_operand(d)?,
    };
    Ok(MicroOp::Aap { dst, src: src_operand(decoder, c.src)? })
}

/// Row copies and activations for an allocated graph, one op per step.
/// Copies that fill a phase are grouped by source so that `coalesce`
/// can merge them.
pub fn translate(mig: &LogicGraph, alloc: &AllocationMap) -> Result<Vec<MicroOp>, TranslateError> {
    translate_with(mig, alloc, &Decoder::default())
}

pub fn translate_with(mig: &LogicGraph, alloc: &AllocationMap, decoder: &Decoder) -> Result<Vec<MicroOp>, TranslateError> {
    if alloc.bindings.inputs.len() != mig.num_inputs as usize || alloc.bindings.outputs.len() != mig.outputs.len() {
        return Err(TranslateError::Mismatch);
    }
    let mut ops = Vec::new();
    for phase in &alloc.phases {
        // Fill copies of one phase never read each other's destinations,
        // so any order is valid.
        let mut order: Vec<CopySrc> = Vec::new();
        for c in &phase.pre {
            if !order.contains(&c.src) {
                order.push(c.src);
            }
        }
        for s in order {
            for c in phase.pre.iter().filter(|c| c.src == s) {
                ops.push(copy_op(decoder, c)?);
            }
        }
        for step in &phase.body {
            match step {
                Step::Maj { entry, .. } => {
                    if decoder.entries().get(*entry as usize).is_none_or(|e| e.len() != 3) {
                        return Err(TranslateError::NoAddress(format!("B{entry}")));
                    }
                    ops.push(MicroOp::Ap { src: Operand::Reg(*entry) })
                }
                Step::Copy(c) => ops.push(copy_op(decoder, c)?),
            }
        }
    }
    Ok(ops)
}
