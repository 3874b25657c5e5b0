use row_allocator::{ComputeRow, Decoder};

use crate::coalesce::operand_rows;
use crate::op::{MicroOp, DST, SRC1, SRC2};
use crate::program::{MicroProgram, ProgramError};

/// Assembles straight-line code and counted loops.
#[derive(Clone, Debug, Default)]
pub struct ProgramBuilder {
    ops: Vec<MicroOp>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, op: MicroOp) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn extend(&mut self, ops: &[MicroOp]) -> &mut Self {
        self.ops.extend_from_slice(ops);
        self
    }

    /// Position of the next op, for `loop_back`.
    pub fn here(&self) -> usize {
        self.ops.len()
    }

    /// reg += delta, split into 6-bit immediates.
    pub fn add(&mut self, reg: u8, delta: i32) -> &mut Self {
        let mut left = delta.unsigned_abs();
        while left > 0 {
            let imm = left.min(63) as u8;
            self.ops.push(if delta > 0 { MicroOp::Addi { reg, imm } } else { MicroOp::Subi { reg, imm } });
            left -= imm as u32;
        }
        self
    }

    /// Decrement `counter` and branch to `target` while it is nonzero.
    pub fn loop_back(&mut self, counter: u8, target: usize) -> Result<&mut Self, ProgramError> {
        self.ops.push(MicroOp::Subi { reg: counter, imm: 1 });
        self.branch(counter, target)
    }

    pub fn branch(&mut self, reg: u8, target: usize) -> Result<&mut Self, ProgramError> {
        let at = self.ops.len();
        let off = target as i64 - at as i64;
        if !(-64..64).contains(&off) {
            return Err(ProgramError::Offset { index: at, value: off as i32 });
        }
        self.ops.push(MicroOp::Bnez { reg, offset: off as i8 });
        Ok(self)
    }

    pub fn ops(&self) -> &[MicroOp] {
        &self.ops
    }

    /// Appends `done` and checks the result.
    pub fn finish(mut self) -> Result<MicroProgram, ProgramError> {
        self.ops.push(MicroOp::Done);
        let p = MicroProgram::new(self.ops);
        p.check()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopShape {
    /// One body pass per bit.
    Linear,
    /// One body pass per bit pair.
    Logarithmic,
    /// Body runs n times inside an outer loop that also runs n times.
    Quadratic,
}

impl LoopShape {
    pub fn iterations(self, n: u32) -> u32 {
        match self {
            LoopShape::Linear => n,
            LoopShape::Logarithmic => n / 2,
            LoopShape::Quadratic => n * n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSpec {
    pub prologue: Vec<MicroOp>,
    pub epilogue: Vec<MicroOp>,
    /// Pointer adjustments after each inner pass.
    pub steps: Vec<(u8, i32)>,
    /// Extra ops and pointer adjustments after each outer pass (quadratic).
    pub outer_tail: Vec<MicroOp>,
    pub outer_steps: Vec<(u8, i32)>,
    /// Rows whose value flows from one pass into the next.
    pub carried: Vec<ComputeRow>,
    pub inner_counter: u8,
    pub outer_counter: u8,
}

impl Default for LoopSpec {
    fn default() -> Self {
        LoopSpec {
            prologue: Vec::new(),
            epilogue: Vec::new(),
            steps: vec![(SRC1, 1), (SRC2, 1), (DST, 1)],
            outer_tail: Vec::new(),
            outer_steps: Vec::new(),
            carried: Vec::new(),
            inner_counter: 24,
            outer_counter: 23,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoopError {
    #[error("loop body overwrites carried row {0} before reading it")]
    CarriedClobbered(ComputeRow),
    #[error("loop body must be straight-line copies and activations")]
    NotStraightLine,
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Fails if the body writes a carried row before its first read.
pub fn check_carried(body: &[MicroOp], carried: &[ComputeRow], decoder: &Decoder) -> Result<(), LoopError> {
    for &row in carried {
        for op in body {
            match *op {
                MicroOp::Aap { dst, src } => {
                    if operand_rows(decoder, src).contains(&row) {
                        break;
                    }
                    if operand_rows(decoder, dst).contains(&row) {
                        return Err(LoopError::CarriedClobbered(row));
                    }
                }
                MicroOp::Ap { src } => {
                    if operand_rows(decoder, src).contains(&row) {
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Wraps a straight-line bit slice into a counted loop with the default
/// pointer stepping.
pub fn loopify(body: &[MicroOp], n: u32, shape: LoopShape) -> Result<MicroProgram, LoopError> {
    loopify_with(body, n, shape, &LoopSpec::default(), &Decoder::default())
}

pub fn loopify_with(
    body: &[MicroOp],
    n: u32,
    shape: LoopShape,
    spec: &LoopSpec,
    decoder: &Decoder,
) -> Result<MicroProgram, LoopError> {
    if body.iter().any(|op| !op.is_command()) {
        return Err(LoopError::NotStraightLine);
    }
    check_carried(body, &spec.carried, decoder)?;
    let mut b = ProgramBuilder::new();
    b.extend(&spec.prologue);
    let inner = if shape == LoopShape::Quadratic { n } else { shape.iterations(n) };
    let outer = if shape == LoopShape::Quadratic { n } else { 1 };
    let counted_loop = |b: &mut ProgramBuilder| -> Result<(), ProgramError> {
        match inner {
            0 => {}
            1 => {
                b.extend(body);
                for &(r, d) in &spec.steps {
                    b.add(r, d);
                }
            }
            k => {
                b.add(spec.inner_counter, k as i32);
                let top = b.here();
                b.extend(body);
                for &(r, d) in &spec.steps {
                    b.add(r, d);
                }
                b.loop_back(spec.inner_counter, top)?;
            }
        }
        Ok(())
    };
    if outer > 1 {
        b.add(spec.outer_counter, outer as i32);
        let top = b.here();
        counted_loop(&mut b)?;
        b.extend(&spec.outer_tail);
        for &(r, d) in &spec.outer_steps {
            b.add(r, d);
        }
        b.loop_back(spec.outer_counter, top)?;
    } else if inner == 1 && outer == 1 {
        // a single pass needs no stepping
        b.extend(body);
        if shape == LoopShape::Quadratic {
            b.extend(&spec.outer_tail);
        }
    } else {
        counted_loop(&mut b)?;
        if shape == LoopShape::Quadratic {
            b.extend(&spec.outer_tail);
        }
    }
    b.extend(&spec.epilogue);
    Ok(b.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::Operand;

    fn body(k: usize) -> Vec<MicroOp> {
        (0..k).map(|_| MicroOp::Ap { src: Operand::Reg(12) }).collect()
    }

    #[test]
    fn single_bit_runs_once() {
        let p = loopify(&body(8), 1, LoopShape::Linear).unwrap();
        assert_eq!(p.command_count().unwrap(), 8);
        assert_eq!(p.ops.len(), 9);
    }

    #[test]
    fn linear_counts() {
        let p = loopify(&body(8), 32, LoopShape::Linear).unwrap();
        assert_eq!(p.command_count().unwrap(), 256);
    }

    #[test]
    fn quadratic_counts() {
        let p = loopify(&body(3), 8, LoopShape::Quadratic).unwrap();
        assert_eq!(p.command_count().unwrap(), 3 * 64);
    }

    #[test]
    fn logarithmic_counts() {
        let spec = LoopSpec { prologue: body(1), ..LoopSpec::default() };
        let p = loopify_with(&body(6), 8, LoopShape::Logarithmic, &spec, &Decoder::default()).unwrap();
        assert_eq!(p.command_count().unwrap(), 25);
    }

    #[test]
    fn clobbered_carry_rejected() {
        let d = Decoder::default();
        // B6 is DCC1: written before it is read
        let b = [MicroOp::Aap { dst: Operand::Reg(6), src: Operand::Reg(18) }];
        let spec = LoopSpec { carried: vec![ComputeRow::Dcc1], ..LoopSpec::default() };
        assert!(matches!(loopify_with(&b, 8, LoopShape::Linear, &spec, &d), Err(LoopError::CarriedClobbered(_))));
    }
}
