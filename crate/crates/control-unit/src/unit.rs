use std::collections::{HashMap, VecDeque};

use subarray_sim::{DramCommand, SimError, Subarray, D_ROWS};
use uprogram::{resolve, MicroOp, MicroProgram, ProgramError, RegFile, DST, FIRST_GP, SCRATCH, SELECT, SPILL_REGS, SRC1, SRC2};

pub const FIFO_CAPACITY: usize = 1024;
pub const SCRATCHPAD_SLOTS: usize = 16;
/// First row of the per-chunk scratch region addressed through B22. It
/// sits at row zero so loops can run a scratch pointer down to zero.
pub const SCRATCH_BASE: u16 = 0;
/// Data objects live in `DATA_BASE .. DATA_BASE + DATA_ROWS`.
pub const DATA_BASE: u16 = 256;
/// Rows B26..B31 point at, used by the row allocator for spills.
pub const SPILL_BASE: u16 = 1000;
pub const DATA_ROWS: u16 = SPILL_BASE - DATA_BASE;
pub const WIDTHS: [u32; 4] = [8, 16, 32, 64];
const MAX_UOPS_PER_CHUNK: u64 = 10_000_000;

/// A vertical object: chunk k occupies rows
/// `base_row + k*rows_per_chunk .. base_row + (k+1)*rows_per_chunk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ObjectRef {
    pub base_row: u16,
    pub rows_per_chunk: u16,
}

impl ObjectRef {
    pub fn new(base_row: u16, rows_per_chunk: u16) -> Self {
        ObjectRef { base_row, rows_per_chunk }
    }

    pub fn chunk_base(&self, chunk: u32) -> u32 {
        self.base_row as u32 + chunk * self.rows_per_chunk as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbopInstruction {
    pub opcode: u8,
    pub dst: ObjectRef,
    pub src1: ObjectRef,
    pub src2: Option<ObjectRef>,
    pub select: Option<ObjectRef>,
    /// Element count.
    pub size: usize,
    /// Element width in bits.
    pub n: u32,
}

/// A μProgram as kept in the DRAM-resident program memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredProgram {
    pub name: String,
    pub needs_select: bool,
    pub bytes: Vec<u8>,
}

pub type ProgramKey = (u8, u32);

#[derive(Clone, Debug, Default)]
pub struct ProgramMemory {
    programs: HashMap<ProgramKey, StoredProgram>,
}

impl ProgramMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, opcode: u8, n: u32, program: StoredProgram) {
        self.programs.insert((opcode, n), program);
    }

    pub fn get(&self, opcode: u8, n: u32) -> Option<&StoredProgram> {
        self.programs.get(&(opcode, n))
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CuError {
    #[error("bbop FIFO is full ({FIFO_CAPACITY} entries)")]
    FifoFull,
    #[error("element width {0} not supported")]
    BadWidth(u32),
    #[error("bbop size must be at least 1")]
    EmptyBbop,
    #[error("{0} needs a select object")]
    MissingSelect(String),
    #[error("{0} takes no select object")]
    UnexpectedSelect(String),
    #[error("no μProgram for opcode {0} at {1} bits")]
    UnknownOp(u8, u32),
    #[error("nothing to decode")]
    Idle,
    #[error("no bbop decoded")]
    NotDecoded,
    #[error("no program loaded")]
    NotLoaded,
    #[error("program counter {0} outside the program")]
    BadPc(usize),
    #[error("row {0} outside the D-group")]
    RowOutOfRange(u32),
    #[error("chunk did not finish within {MAX_UOPS_PER_CHUNK} μOps")]
    Runaway,
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecutionStats {
    pub aap: u64,
    pub ap: u64,
    pub uops: u64,
    pub scratchpad_misses: u64,
    pub iterations: u64,
    pub bbops: u64,
    /// Activations by number of rows raised (index 1..=3).
    pub activations_by_rows: [u64; 4],
}

impl ExecutionStats {
    pub fn commands(&self) -> u64 {
        self.aap + self.ap
    }

    pub fn activations(&self) -> u64 {
        self.activations_by_rows.iter().sum()
    }

    pub fn precharges(&self) -> u64 {
        self.aap + self.ap
    }

    pub fn merge(&mut self, o: &ExecutionStats) {
        self.aap += o.aap;
        self.ap += o.ap;
        self.uops += o.uops;
        self.scratchpad_misses += o.scratchpad_misses;
        self.iterations += o.iterations;
        self.bbops += o.bbops;
        for i in 0..4 {
            self.activations_by_rows[i] += o.activations_by_rows[i];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Issued(DramCommand),
    Control,
    /// Chunk finished, more remain.
    ChunkDone { remaining: u64 },
    BbopComplete,
    Idle,
}

#[derive(Clone, Debug)]
struct Active {
    bbop: BbopInstruction,
    program: Option<MicroProgram>,
    upc: usize,
    chunk: u32,
    loop_counter: u64,
    chunk_uops: u64,
}

/// Base rows held by the μReg addressing unit for the current chunk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Addressing {
    pub src1: u32,
    pub src2: u32,
    pub dst: u32,
    pub select: u32,
    pub scratch: u32,
    pub n: u32,
}

#[derive(Clone, Debug)]
pub struct ControlUnit {
    memory: ProgramMemory,
    fifo: VecDeque<BbopInstruction>,
    /// Most recently used last.
    scratchpad: Vec<(ProgramKey, MicroProgram)>,
    active: Option<Active>,
    regs: RegFile,
    addressing: Addressing,
    stats: ExecutionStats,
    trace: Option<Vec<String>>,
}

impl ControlUnit {
    pub fn new(memory: ProgramMemory) -> Self {
        ControlUnit {
            memory,
            fifo: VecDeque::new(),
            scratchpad: Vec::new(),
            active: None,
            regs: [0; 32],
            addressing: Addressing::default(),
            stats: ExecutionStats::default(),
            trace: None,
        }
    }

    pub fn memory(&self) -> &ProgramMemory {
        &self.memory
    }

    /// Records one line per issued DRAM command from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn stats(&self) -> ExecutionStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ExecutionStats::default();
    }

    pub fn queued(&self) -> usize {
        self.fifo.len()
    }

    pub fn registers(&self) -> &RegFile {
        &self.regs
    }

    pub fn addressing(&self) -> Addressing {
        self.addressing
    }

    pub fn loop_counter(&self) -> Option<u64> {
        self.active.as_ref().map(|a| a.loop_counter)
    }

    pub fn upc(&self) -> Option<usize> {
        self.active.as_ref().map(|a| a.upc)
    }

    /// Keys of the programs in the scratchpad, least recently used first.
    pub fn scratchpad(&self) -> Vec<ProgramKey> {
        self.scratchpad.iter().map(|(k, _)| *k).collect()
    }

    pub fn enqueue(&mut self, bbop: BbopInstruction) -> Result<(), CuError> {
        if self.fifo.len() >= FIFO_CAPACITY {
            return Err(CuError::FifoFull);
        }
        if !WIDTHS.contains(&bbop.n) {
            return Err(CuError::BadWidth(bbop.n));
        }
        if bbop.size == 0 {
            return Err(CuError::EmptyBbop);
        }
        if let Some(p) = self.memory.get(bbop.opcode, bbop.n) {
            match (p.needs_select, bbop.select.is_some()) {
                (true, false) => return Err(CuError::MissingSelect(p.name.clone())),
                (false, true) => return Err(CuError::UnexpectedSelect(p.name.clone())),
                _ => {}
            }
        }
        self.fifo.push_back(bbop);
        Ok(())
    }

    /// Takes the next bbop and sets up the loop counter and base rows.
    pub fn decode_stage(&mut self, lanes: usize) -> Result<(), CuError> {
        let bbop = self.fifo.front().ok_or(CuError::Idle)?;
        let known = self.scratchpad.iter().any(|(k, _)| *k == (bbop.opcode, bbop.n))
            || self.memory.get(bbop.opcode, bbop.n).is_some();
        if !known {
            return Err(CuError::UnknownOp(bbop.opcode, bbop.n));
        }
        let bbop = self.fifo.pop_front().unwrap();
        let loop_counter = bbop.size.div_ceil(lanes) as u64;
        self.active = Some(Active { bbop, program: None, upc: 0, chunk: 0, loop_counter, chunk_uops: 0 });
        self.start_chunk();
        Ok(())
    }

    /// Copies the decoded bbop's program into μOp memory, fetching it from
    /// program memory on a scratchpad miss.
    pub fn load_stage(&mut self) -> Result<(), CuError> {
        let act = self.active.as_ref().ok_or(CuError::NotDecoded)?;
        let key = (act.bbop.opcode, act.bbop.n);
        let program = match self.scratchpad.iter().position(|(k, _)| *k == key) {
            Some(i) => {
                let slot = self.scratchpad.remove(i);
                let p = slot.1.clone();
                self.scratchpad.push(slot);
                p
            }
            None => {
                let stored = self.memory.get(key.0, key.1).ok_or(CuError::UnknownOp(key.0, key.1))?;
                let p = MicroProgram::decode(&stored.bytes)?;
                p.check()?;
                self.stats.scratchpad_misses += 1;
                if self.scratchpad.len() >= SCRATCHPAD_SLOTS {
                    self.scratchpad.remove(0);
                }
                self.scratchpad.push((key, p.clone()));
                p
            }
        };
        let act = self.active.as_mut().unwrap();
        act.program = Some(program);
        act.upc = 0;
        Ok(())
    }

    fn start_chunk(&mut self) {
        let act = self.active.as_ref().unwrap();
        let b = &act.bbop;
        let k = act.chunk;
        let src1 = b.src1.chunk_base(k);
        let scratch = SCRATCH_BASE as u32;
        self.addressing = Addressing {
            src1,
            src2: b.src2.map_or(src1, |o| o.chunk_base(k)),
            dst: b.dst.chunk_base(k),
            select: b.select.map_or(scratch, |o| o.chunk_base(k)),
            scratch,
            n: b.n,
        };
        self.regs = [0; 32];
        self.regs[SRC1 as usize] = self.addressing.src1;
        self.regs[SRC2 as usize] = self.addressing.src2;
        self.regs[DST as usize] = self.addressing.dst;
        self.regs[SELECT as usize] = self.addressing.select;
        self.regs[SCRATCH as usize] = self.addressing.scratch;
        for r in FIRST_GP..SPILL_REGS[0] {
            self.regs[r as usize] = 0;
        }
        for (i, r) in SPILL_REGS.iter().enumerate() {
            self.regs[*r as usize] = SPILL_BASE as u32 + i as u32;
        }
    }

    fn check_rows(&self, cmd: &DramCommand) -> Result<(), CuError> {
        let rows = match *cmd {
            DramCommand::Aap { dst, src } => vec![dst, src],
            DramCommand::Ap { addr } => vec![addr],
        };
        for r in rows {
            if let subarray_sim::RowAddr::D(d) = r {
                if d as usize >= D_ROWS {
                    return Err(CuError::RowOutOfRange(d as u32));
                }
            }
        }
        Ok(())
    }

    /// Executes one μOp, decoding and loading the next bbop when idle.
    pub fn step(&mut self, sub: &mut Subarray) -> Result<Event, CuError> {
        if self.active.is_none() {
            if self.fifo.is_empty() {
                return Ok(Event::Idle);
            }
            self.decode_stage(sub.lanes())?;
        }
        if self.active.as_ref().unwrap().program.is_none() {
            self.load_stage()?;
        }
        let act = self.active.as_mut().unwrap();
        let prog = act.program.as_ref().unwrap();
        let op = *prog.ops.get(act.upc).ok_or(CuError::BadPc(act.upc))?;
        self.stats.uops += 1;
        act.chunk_uops += 1;
        if act.chunk_uops > MAX_UOPS_PER_CHUNK {
            return Err(CuError::Runaway);
        }
        let regs = &mut self.regs;
        let event = match op {
            MicroOp::Aap { dst, src } => {
                let cmd = DramCommand::Aap { dst: resolve(dst, regs), src: resolve(src, regs) };
                act.upc += 1;
                Event::Issued(cmd)
            }
            MicroOp::Ap { src } => {
                act.upc += 1;
                Event::Issued(DramCommand::Ap { addr: resolve(src, regs) })
            }
            MicroOp::Addi { reg, imm } => {
                regs[reg as usize] = regs[reg as usize].wrapping_add(imm as u32);
                act.upc += 1;
                Event::Control
            }
            MicroOp::Subi { reg, imm } => {
                regs[reg as usize] = regs[reg as usize].wrapping_sub(imm as u32);
                act.upc += 1;
                Event::Control
            }
            MicroOp::Comp { reg, imm } => {
                regs[reg as usize] = (regs[reg as usize] != imm as u32) as u32;
                act.upc += 1;
                Event::Control
            }
            MicroOp::Mod { reg, imm } => {
                if imm != 0 {
                    regs[reg as usize] %= imm as u32;
                }
                act.upc += 1;
                Event::Control
            }
            MicroOp::Bnez { reg, offset } => {
                if regs[reg as usize] != 0 {
                    let t = act.upc as i64 + offset as i64;
                    if t < 0 || t as usize >= prog.ops.len() {
                        return Err(CuError::BadPc(t.max(0) as usize));
                    }
                    act.upc = t as usize;
                } else {
                    act.upc += 1;
                }
                Event::Control
            }
            MicroOp::Done => {
                act.loop_counter -= 1;
                self.stats.iterations += 1;
                if act.loop_counter > 0 {
                    act.chunk += 1;
                    act.upc = 0;
                    act.chunk_uops = 0;
                    let remaining = act.loop_counter;
                    self.start_chunk();
                    Event::ChunkDone { remaining }
                } else {
                    self.active = None;
                    self.stats.bbops += 1;
                    Event::BbopComplete
                }
            }
        };
        if let Event::Issued(cmd) = &event {
            self.check_rows(cmd)?;
            sub.execute(*cmd)?;
            match *cmd {
                DramCommand::Aap { dst, src } => {
                    self.stats.aap += 1;
                    self.stats.activations_by_rows[sub.activation_width(src).min(3)] += 1;
                    self.stats.activations_by_rows[sub.activation_width(dst).min(3)] += 1;
                }
                DramCommand::Ap { addr } => {
                    self.stats.ap += 1;
                    self.stats.activations_by_rows[sub.activation_width(addr).min(3)] += 1;
                }
            }
            if let Some(t) = self.trace.as_mut() {
                t.push(cmd.to_string());
            }
        }
        Ok(event)
    }

    /// Steps until the FIFO is drained; returns the stats of this run.
    pub fn run_to_completion(&mut self, sub: &mut Subarray) -> Result<ExecutionStats, CuError> {
        let before = self.stats;
        loop {
            if self.step(sub)? == Event::Idle {
                break;
            }
        }
        let mut d = self.stats;
        d.aap -= before.aap;
        d.ap -= before.ap;
        d.uops -= before.uops;
        d.scratchpad_misses -= before.scratchpad_misses;
        d.iterations -= before.iterations;
        d.bbops -= before.bbops;
        for i in 0..4 {
            d.activations_by_rows[i] -= before.activations_by_rows[i];
        }
        Ok(d)
    }
}
