use subarray_sim::{DramCommand, RowAddr, SimError, Subarray};

use crate::op::{MicroOp, Operand, C0_REG, C1_REG, NUM_REGS};

pub type RegFile = [u32; NUM_REGS as usize];

/// Physical row an operand names under the given register values.
pub fn resolve(o: Operand, regs: &RegFile) -> RowAddr {
    match o {
        Operand::Reg(r) if r < 16 => RowAddr::B(r),
        Operand::Reg(C0_REG) => RowAddr::C0,
        Operand::Reg(C1_REG) => RowAddr::C1,
        Operand::Reg(r) => RowAddr::D(regs[r as usize] as u16),
        Operand::Ptr { reg, offset } => RowAddr::D((regs[reg as usize] + offset as u32) as u16),
    }
}

/// DRAM command for a copy or activation, `None` for control ops.
pub fn to_command(op: MicroOp, regs: &RegFile) -> Option<DramCommand> {
    match op {
        MicroOp::Aap { dst, src } => Some(DramCommand::Aap { dst: resolve(dst, regs), src: resolve(src, regs) }),
        MicroOp::Ap { src } => Some(DramCommand::Ap { addr: resolve(src, regs) }),
        _ => None,
    }
}

/// Runs straight-line code; control ops are ignored. Returns the number
/// of commands issued.
pub fn run_straight(ops: &[MicroOp], regs: &RegFile, sub: &mut Subarray) -> Result<usize, SimError> {
    let mut n = 0;
    for &op in ops {
        if let Some(cmd) = to_command(op, regs) {
            sub.execute(cmd)?;
            n += 1;
        }
    }
    Ok(n)
}
