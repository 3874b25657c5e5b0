use std::fmt;

use crate::op::{MicroOp, Operand, NUM_REGS};

/// Largest program the scratchpad slot holds.
pub const MAX_OPS: usize = 64;
/// Safety net for `command_count` on programs that never finish.
const STEP_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("program has {0} ops, limit is {MAX_OPS}")]
    TooLong(usize),
    #[error("op {index}: immediate {value} does not fit 6 bits")]
    Immediate { index: usize, value: u32 },
    #[error("op {index}: branch offset {value} out of range")]
    Offset { index: usize, value: i32 },
    #[error("op {index}: operand {operand} cannot be encoded")]
    Operand { index: usize, operand: String },
    #[error("op {index}: register B{reg} out of range")]
    Register { index: usize, reg: u8 },
    #[error("unknown opcode {0}")]
    Opcode(u16),
    #[error("encoded program length {0} is not a multiple of 2")]
    OddLength(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("program does not end in done")]
    MissingDone,
    #[error("branch at op {0} leaves the program")]
    BadBranch(usize),
    #[error("program did not reach done within the step limit")]
    Runaway,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MicroProgram {
    pub ops: Vec<MicroOp>,
}

impl MicroProgram {
    pub fn new(ops: Vec<MicroOp>) -> Self {
        MicroProgram { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Size in bytes once encoded.
    pub fn byte_len(&self) -> usize {
        self.ops.len() * 2
    }

    /// Structural checks: length, final done, branch targets, register and
    /// immediate ranges.
    pub fn check(&self) -> Result<(), ProgramError> {
        if self.ops.len() > MAX_OPS {
            return Err(ProgramError::TooLong(self.ops.len()));
        }
        if self.ops.last() != Some(&MicroOp::Done) {
            return Err(ProgramError::MissingDone);
        }
        for (i, op) in self.ops.iter().enumerate() {
            encode_op(i, *op)?;
            if let MicroOp::Bnez { offset, .. } = op {
                let t = i as i64 + *offset as i64;
                if t < 0 || t >= self.ops.len() as i64 {
                    return Err(ProgramError::BadBranch(i));
                }
            }
        }
        Ok(())
    }

    /// Big-endian 16-bit words: opcode(4) | A(6) | B(6).
    pub fn encode(&self) -> Result<Vec<u8>, ProgramError> {
        if self.ops.len() > MAX_OPS {
            return Err(ProgramError::TooLong(self.ops.len()));
        }
        let mut out = Vec::with_capacity(self.ops.len() * 2);
        for (i, op) in self.ops.iter().enumerate() {
            out.extend_from_slice(&encode_op(i, *op)?.to_be_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProgramError> {
        if bytes.len() % 2 != 0 {
            return Err(ProgramError::OddLength(bytes.len()));
        }
        let ops = bytes
            .chunks(2)
            .map(|w| decode_op(u16::from_be_bytes([w[0], w[1]])))
            .collect::<Result<Vec<_>, _>>()?;
        if ops.len() > MAX_OPS {
            return Err(ProgramError::TooLong(ops.len()));
        }
        Ok(MicroProgram { ops })
    }

    /// One op per line, `;` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ProgramError> {
        let mut ops = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split(';').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            ops.push(parse_op(line).map_err(|msg| ProgramError::Parse { line: ln + 1, msg })?);
        }
        Ok(MicroProgram { ops })
    }

    /// Number of AAP/AP commands one run issues, with every register
    /// starting at `init`.
    pub fn command_count_from(&self, init: [u32; NUM_REGS as usize]) -> Result<u64, ProgramError> {
        let mut regs = init;
        let mut pc = 0usize;
        let mut count = 0u64;
        let mut steps = 0u64;
        loop {
            let Some(op) = self.ops.get(pc) else { return Err(ProgramError::MissingDone) };
            steps += 1;
            if steps > STEP_LIMIT {
                return Err(ProgramError::Runaway);
            }
            pc += 1;
            match *op {
                MicroOp::Aap { .. } | MicroOp::Ap { .. } => count += 1,
                MicroOp::Addi { reg, imm } => regs[reg as usize] = regs[reg as usize].wrapping_add(imm as u32),
                MicroOp::Subi { reg, imm } => regs[reg as usize] = regs[reg as usize].wrapping_sub(imm as u32),
                MicroOp::Comp { reg, imm } => regs[reg as usize] = (regs[reg as usize] != imm as u32) as u32,
                MicroOp::Mod { reg, imm } => {
                    if imm != 0 {
                        regs[reg as usize] %= imm as u32
                    }
                }
                MicroOp::Bnez { reg, offset } => {
                    if regs[reg as usize] != 0 {
                        let t = (pc - 1) as i64 + offset as i64;
                        if t < 0 || t as usize >= self.ops.len() {
                            return Err(ProgramError::BadBranch(pc - 1));
                        }
                        pc = t as usize;
                    }
                }
                MicroOp::Done => return Ok(count),
            }
        }
    }

    /// Commands per run with all registers starting at zero.
    pub fn command_count(&self) -> Result<u64, ProgramError> {
        self.command_count_from([0; NUM_REGS as usize])
    }
}

impl fmt::Display for MicroProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

fn operand_bits(index: usize, o: Operand) -> Result<u16, ProgramError> {
    o.encode().map(u16::from).ok_or(ProgramError::Operand { index, operand: o.to_string() })
}

fn reg_bits(index: usize, reg: u8) -> Result<u16, ProgramError> {
    if reg < NUM_REGS {
        Ok(reg as u16)
    } else {
        Err(ProgramError::Register { index, reg })
    }
}

fn imm_bits(index: usize, imm: u8) -> Result<u16, ProgramError> {
    if imm < 64 {
        Ok(imm as u16)
    } else {
        Err(ProgramError::Immediate { index, value: imm as u32 })
    }
}

pub fn encode_op(index: usize, op: MicroOp) -> Result<u16, ProgramError> {
    let (a, b) = match op {
        MicroOp::Aap { dst, src } => (operand_bits(index, dst)?, operand_bits(index, src)?),
        MicroOp::Ap { src } => (0, operand_bits(index, src)?),
        MicroOp::Addi { reg, imm }
        | MicroOp::Subi { reg, imm }
        | MicroOp::Comp { reg, imm }
        | MicroOp::Mod { reg, imm } => (reg_bits(index, reg)?, imm_bits(index, imm)?),
        MicroOp::Bnez { reg, offset } => {
            if !(-64..64).contains(&offset) {
                return Err(ProgramError::Offset { index, value: offset as i32 });
            }
            let off = (offset as i16 as u16) & 0x7f;
            (reg_bits(index, reg)? | ((off >> 6) << 5), off & 0x3f)
        }
        MicroOp::Done => (0, 0),
    };
    Ok(op.opcode() << 12 | a << 6 | b)
}

pub fn decode_op(word: u16) -> Result<MicroOp, ProgramError> {
    let a = ((word >> 6) & 0x3f) as u8;
    let b = (word & 0x3f) as u8;
    let reg = |r: u8| if r < NUM_REGS { Ok(r) } else { Err(ProgramError::Register { index: 0, reg: r }) };
    let unused = |bits: u16| if bits == 0 { Ok(()) } else { Err(ProgramError::Opcode(word >> 12)) };
    Ok(match word >> 12 {
        0 => MicroOp::Aap { dst: Operand::decode(a), src: Operand::decode(b) },
        1 => {
            unused(a as u16)?;
            MicroOp::Ap { src: Operand::decode(b) }
        }
        2 => MicroOp::Addi { reg: reg(a)?, imm: b },
        3 => MicroOp::Subi { reg: reg(a)?, imm: b },
        4 => MicroOp::Comp { reg: reg(a)?, imm: b },
        5 => MicroOp::Mod { reg: reg(a)?, imm: b },
        6 => {
            let raw = ((a >> 5) << 6) | b;
            // sign-extend 7 bits
            let offset = ((raw << 1) as i8) >> 1;
            MicroOp::Bnez { reg: a & 0x1f, offset }
        }
        7 => {
            unused(word & 0xfff)?;
            MicroOp::Done
        }
        other => return Err(ProgramError::Opcode(other)),
    })
}

fn parse_reg(s: &str) -> Result<u8, String> {
    let s = s.trim();
    s.strip_prefix('B')
        .and_then(|r| r.parse::<u8>().ok())
        .filter(|r| *r < NUM_REGS)
        .ok_or_else(|| format!("bad register `{s}`"))
}

fn parse_operand(s: &str) -> Result<Operand, String> {
    let s = s.trim();
    match s.split_once('+') {
        Some((r, off)) => {
            let reg = parse_reg(r)?;
            let offset = off.trim().parse::<u8>().map_err(|_| format!("bad offset in `{s}`"))?;
            Ok(Operand::Ptr { reg, offset })
        }
        None => parse_reg(s).map(Operand::Reg),
    }
}

fn parse_op(line: &str) -> Result<MicroOp, String> {
    let (mnemonic, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let args: Vec<&str> = if rest.trim().is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("`{mnemonic}` takes {n} operands"))
        }
    };
    let imm = |s: &str| s.parse::<u8>().map_err(|_| format!("bad immediate `{s}`"));
    let op = match mnemonic.to_ascii_lowercase().as_str() {
        "aap" => {
            want(2)?;
            MicroOp::Aap { dst: parse_operand(args[0])?, src: parse_operand(args[1])? }
        }
        "ap" => {
            want(1)?;
            MicroOp::Ap { src: parse_operand(args[0])? }
        }
        m @ ("addi" | "subi" | "comp" | "mod") => {
            want(2)?;
            let reg = parse_reg(args[0])?;
            let imm = imm(args[1])?;
            match m {
                "addi" => MicroOp::Addi { reg, imm },
                "subi" => MicroOp::Subi { reg, imm },
                "comp" => MicroOp::Comp { reg, imm },
                _ => MicroOp::Mod { reg, imm },
            }
        }
        "bnez" => {
            want(2)?;
            let offset = args[1].parse::<i8>().map_err(|_| format!("bad offset `{}`", args[1]))?;
            MicroOp::Bnez { reg: parse_reg(args[0])?, offset }
        }
        "done" => {
            want(0)?;
            MicroOp::Done
        }
        _ => return Err(format!("unknown mnemonic `{mnemonic}`")),
    };
    Ok(op)
}
