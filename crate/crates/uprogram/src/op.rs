use std::fmt;

/// Registers B0..B15 address the B-group decoder, B16/B17 the constant
/// rows; B18 and up hold integers (row numbers or loop counters).
pub const C0_REG: u8 = 16;
pub const C1_REG: u8 = 17;
pub const SRC1: u8 = 18;
pub const SRC2: u8 = 19;
pub const DST: u8 = 20;
pub const SELECT: u8 = 21;
pub const SCRATCH: u8 = 22;
pub const FIRST_GP: u8 = 23;
pub const SPILL_REGS: [u8; 6] = [26, 27, 28, 29, 30, 31];
pub const NUM_REGS: u8 = 32;

/// Row operand of a copy or activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    /// B0..B17 name rows directly; B18..B31 hold a D-row number.
    Reg(u8),
    /// D row at the number held in `reg` plus `offset` (reg B18..B25,
    /// offset 0..3).
    Ptr { reg: u8, offset: u8 },
}

impl Operand {
    pub fn encode(self) -> Option<u8> {
        match self {
            Operand::Reg(r) if r < NUM_REGS => Some(r),
            Operand::Ptr { reg, offset } if (SRC1..SRC1 + 8).contains(&reg) && offset < 4 => {
                Some(32 + (reg - SRC1) * 4 + offset)
            }
            _ => None,
        }
    }

    pub fn decode(v: u8) -> Operand {
        if v < 32 {
            Operand::Reg(v)
        } else {
            Operand::Ptr { reg: SRC1 + ((v - 32) >> 2), offset: (v - 32) & 3 }
        }
    }

    /// Decoder entry when the operand names the B-group.
    pub fn b_entry(self) -> Option<u8> {
        match self {
            Operand::Reg(r) if r < 16 => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => write!(f, "B{r}"),
            Operand::Ptr { reg, offset } => write!(f, "B{reg}+{offset}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MicroOp {
    Aap { dst: Operand, src: Operand },
    Ap { src: Operand },
    Addi { reg: u8, imm: u8 },
    Subi { reg: u8, imm: u8 },
    /// reg <- (reg == imm ? 0 : 1)
    Comp { reg: u8, imm: u8 },
    /// reg <- reg mod imm
    Mod { reg: u8, imm: u8 },
    /// Branch by `offset` ops (relative to this op) when reg != 0.
    Bnez { reg: u8, offset: i8 },
    Done,
}

impl MicroOp {
    pub fn is_command(self) -> bool {
        matches!(self, MicroOp::Aap { .. } | MicroOp::Ap { .. })
    }

    pub fn opcode(self) -> u16 {
        match self {
            MicroOp::Aap { .. } => 0,
            MicroOp::Ap { .. } => 1,
            MicroOp::Addi { .. } => 2,
            MicroOp::Subi { .. } => 3,
            MicroOp::Comp { .. } => 4,
            MicroOp::Mod { .. } => 5,
            MicroOp::Bnez { .. } => 6,
            MicroOp::Done => 7,
        }
    }
}

impl fmt::Display for MicroOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MicroOp::Aap { dst, src } => write!(f, "AAP {dst}, {src}"),
            MicroOp::Ap { src } => write!(f, "AP {src}"),
            MicroOp::Addi { reg, imm } => write!(f, "addi B{reg}, {imm}"),
            MicroOp::Subi { reg, imm } => write!(f, "subi B{reg}, {imm}"),
            MicroOp::Comp { reg, imm } => write!(f, "comp B{reg}, {imm}"),
            MicroOp::Mod { reg, imm } => write!(f, "mod B{reg}, {imm}"),
            MicroOp::Bnez { reg, offset } => write!(f, "bnez B{reg}, {offset}"),
            MicroOp::Done => f.write_str("done"),
        }
    }
}
