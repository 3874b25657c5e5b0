use std::sync::OnceLock;

use control_unit::{BbopInstruction, ControlUnit, ExecutionStats, ObjectRef, ProgramMemory, DATA_BASE, DATA_ROWS};
use op_library::{expected_aap_count, program_memory, scalar_oracle, ExpectedCount, Mode, OpError, OpKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subarray_sim::{DramCommand, RowAddr, Subarray};
use transposition::{Handle, ObjectDescriptor, TranspositionStats, TranspositionUnit};

use crate::config::{RunConfig, Target};
use crate::energy::energy_model;
use crate::HarnessError;

/// Program memory for a mode, built once per process.
pub fn program_memory_for(mode: Mode) -> Result<&'static ProgramMemory, HarnessError> {
    static OPT: OnceLock<Result<ProgramMemory, OpError>> = OnceLock::new();
    static NAIVE: OnceLock<Result<ProgramMemory, OpError>> = OnceLock::new();
    let cell = match mode {
        Mode::Optimized => &OPT,
        Mode::AmbitNaive => &NAIVE,
    };
    cell.get_or_init(|| program_memory(mode)).as_ref().map_err(|e| HarnessError::Build(e.clone()))
}

/// One bank: a subarray, its control unit and transposition unit, and a
/// bump allocator for object rows.
pub struct BankState {
    pub sub: Subarray,
    pub cu: ControlUnit,
    pub tu: TranspositionUnit,
    /// Commands issued directly rather than through a bbop.
    pub direct: ExecutionStats,
    next_row: u16,
    next_addr: u64,
}

impl BankState {
    pub fn new(lanes: usize, mode: Mode) -> Result<Self, HarnessError> {
        Ok(BankState {
            sub: Subarray::new(lanes),
            cu: ControlUnit::new(program_memory_for(mode)?.clone()),
            tu: TranspositionUnit::default(),
            direct: ExecutionStats::default(),
            next_row: DATA_BASE,
            next_addr: 0x1000,
        })
    }

    pub fn lanes(&self) -> usize {
        self.sub.lanes()
    }

    /// Reserves rows for `count` elements of `bits` bits.
    pub fn alloc(&mut self, bits: u32, count: usize) -> Result<Handle, HarnessError> {
        let rows = count.div_ceil(self.lanes()) * bits as usize;
        let end = DATA_BASE as usize + DATA_ROWS as usize;
        if self.next_row as usize + rows > end {
            return Err(transposition::TransposeError::OutOfRows { need: rows, left: end - self.next_row as usize }.into());
        }
        let d = ObjectDescriptor { address: self.next_addr, size: count, element_bits: bits, base_row: self.next_row };
        let h = self.tu.register(d)?;
        self.next_row += rows as u16;
        self.next_addr += d.byte_len().div_ceil(64) * 64;
        Ok(h)
    }

    pub fn put(&mut self, bits: u32, values: &[u64]) -> Result<Handle, HarnessError> {
        let h = self.alloc(bits, values.len())?;
        self.tu.store(h, values, &mut self.sub)?;
        Ok(h)
    }

    pub fn get(&mut self, h: Handle) -> Result<Vec<u64>, HarnessError> {
        Ok(self.tu.fetch(h, &self.sub)?)
    }

    fn obj(&self, h: Handle) -> Result<ObjectRef, HarnessError> {
        let o = self.tu.object(h)?;
        Ok(ObjectRef::new(o.base_row, o.element_bits as u16))
    }

    /// Issues one bbop over the whole of `src1` and runs it.
    pub fn bbop(
        &mut self,
        kind: OpKind,
        n: u32,
        dst: Handle,
        src1: Handle,
        src2: Option<Handle>,
        select: Option<Handle>,
    ) -> Result<(), HarnessError> {
        let size = self.tu.object(src1)?.element_count;
        let bbop = BbopInstruction {
            opcode: kind.opcode(),
            dst: self.obj(dst)?,
            src1: self.obj(src1)?,
            src2: src2.map(|h| self.obj(h)).transpose()?,
            select: select.map(|h| self.obj(h)).transpose()?,
            size,
            n,
        };
        self.cu.enqueue(bbop)?;
        self.cu.run_to_completion(&mut self.sub)?;
        Ok(())
    }

    fn issue(&mut self, cmd: DramCommand) -> Result<(), HarnessError> {
        self.sub.execute(cmd)?;
        let s = &mut self.direct;
        match cmd {
            DramCommand::Aap { dst, src } => {
                s.aap += 1;
                s.activations_by_rows[self.sub.activation_width(src).min(3)] += 1;
                s.activations_by_rows[self.sub.activation_width(dst).min(3)] += 1;
            }
            DramCommand::Ap { addr } => {
                s.ap += 1;
                s.activations_by_rows[self.sub.activation_width(addr).min(3)] += 1;
            }
        }
        Ok(())
    }

    /// Lane-wise AND of two one-bit objects: both operands and the zero
    /// row go into T0..T2, one triple activation, one copy out.
    pub fn and_bits(&mut self, dst: Handle, a: Handle, b: Handle) -> Result<(), HarnessError> {
        let chunks = self.tu.object(a)?.chunks(self.lanes());
        let (a, b, dst) = (self.obj(a)?, self.obj(b)?, self.obj(dst)?);
        for c in 0..chunks as u32 {
            let row = |o: ObjectRef| RowAddr::D(o.chunk_base(c) as u16);
            self.issue(DramCommand::Aap { dst: RowAddr::B(0), src: row(a) })?;
            self.issue(DramCommand::Aap { dst: RowAddr::B(1), src: row(b) })?;
            self.issue(DramCommand::Aap { dst: RowAddr::B(2), src: RowAddr::C0 })?;
            self.issue(DramCommand::Ap { addr: RowAddr::B(12) })?;
            self.issue(DramCommand::Aap { dst: row(dst), src: RowAddr::B(0) })?;
            self.direct.iterations += 1;
        }
        Ok(())
    }

    pub fn stats(&self) -> ExecutionStats {
        let mut s = self.cu.stats();
        s.merge(&self.direct);
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BankReport {
    pub bank: usize,
    pub elements: usize,
    pub exec: ExecutionStats,
    pub transposition: TranspositionStats,
    pub latency_ns: u64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub label: String,
    pub mode: Mode,
    pub n: u32,
    pub elements: usize,
    pub lanes: usize,
    pub aap: u64,
    pub ap: u64,
    pub iterations: u64,
    /// Slowest bank; banks run concurrently.
    pub latency_ns: u64,
    pub energy: f64,
    /// Elements per second.
    pub throughput: f64,
    /// Elements per unit of energy.
    pub throughput_per_energy: f64,
    /// Reference count and commands per chunk of the first bank, for a
    /// single operation.
    pub formula: Option<(&'static str, ExpectedCount, u64)>,
    pub banks: Vec<BankReport>,
}

impl StatsReport {
    pub fn commands(&self) -> u64 {
        self.aap + self.ap
    }

    pub fn total_lanes(&self) -> usize {
        self.lanes * self.banks.len()
    }

    /// Builds the totals from finished banks.
    pub fn collect(label: String, cfg: &RunConfig, banks: Vec<(usize, BankState)>) -> StatsReport {
        let banks: Vec<BankReport> = banks
            .into_iter()
            .enumerate()
            .map(|(i, (elements, b))| {
                let exec = b.stats();
                let transposition = b.tu.stats();
                let latency_ns = exec.aap * cfg.timing.t_aap_ns
                    + exec.ap * cfg.timing.t_ap_ns
                    + transposition.cycles() * cfg.timing.t_transpose_ns;
                BankReport { bank: i, elements, exec, transposition, latency_ns, energy: energy_model(&exec, &cfg.energy) }
            })
            .collect();
        let aap = banks.iter().map(|b| b.exec.aap).sum();
        let ap = banks.iter().map(|b| b.exec.ap).sum();
        let iterations = banks.iter().map(|b| b.exec.iterations).sum();
        let energy: f64 = banks.iter().map(|b| b.energy).sum();
        let latency_ns = banks.iter().map(|b| b.latency_ns).max().unwrap_or(0);
        let elements = banks.iter().map(|b| b.elements).sum::<usize>();
        let throughput = if latency_ns == 0 { 0.0 } else { elements as f64 * 1e9 / latency_ns as f64 };
        let throughput_per_energy = if energy == 0.0 { 0.0 } else { elements as f64 / energy };
        let formula = match cfg.target {
            Target::Op(kind) => banks.first().filter(|b| b.exec.iterations > 0).map(|b| {
                (kind.spec().formula, expected_aap_count(kind, cfg.n), b.exec.commands() / b.exec.iterations)
            }),
            Target::Kernel(_) => None,
        };
        StatsReport {
            label,
            mode: cfg.mode,
            n: cfg.n,
            elements,
            lanes: cfg.lanes,
            aap,
            ap,
            iterations,
            latency_ns,
            energy,
            throughput,
            throughput_per_energy,
            formula,
            banks,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: StatsReport,
    pub outputs: Vec<u64>,
    pub expected: Vec<u64>,
}

impl RunOutcome {
    /// Element indices where the output differs from the reference.
    pub fn mismatches(&self) -> Vec<usize> {
        (0..self.outputs.len()).filter(|&i| self.outputs[i] != self.expected[i]).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.outputs.len() == self.expected.len() && self.mismatches().is_empty()
    }
}

fn mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

/// Seeded operands: every pairing of 0, 1, 2^(n-1) and 2^n - 1 first,
/// then random values. A quarter of the second operands are small and a
/// quarter differ from the first in one bit.
pub fn operands(n: u32, count: usize, seed: u64) -> (Vec<u64>, Vec<u64>, Vec<bool>) {
    let m = mask(n);
    let corners = [0, 1, 1 << (n - 1), m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(count);
    let mut b = Vec::with_capacity(count);
    for (i, j) in (0..16).map(|k| (k / 4, k % 4)).take(count) {
        a.push(corners[i]);
        b.push(corners[j]);
    }
    while a.len() < count {
        let x = rng.gen::<u64>() & m;
        let y = match rng.gen_range(0..4) {
            0 => rng.gen::<u64>() & m & 0xff,
            1 => x ^ (1 << rng.gen_range(0..n)),
            _ => rng.gen::<u64>() & m,
        };
        a.push(x);
        b.push(y);
    }
    let sel = (0..count).map(|_| rng.gen()).collect();
    (a, b, sel)
}

/// Element ranges per bank, in order; banks past the data stay idle.
pub(crate) fn split(elements: usize, banks: usize) -> Vec<std::ops::Range<usize>> {
    let per = elements.div_ceil(banks);
    (0..banks).map(|i| (i * per).min(elements)..((i + 1) * per).min(elements)).filter(|r| !r.is_empty()).collect()
}

/// Runs `work` on every bank's share of the elements, banks in parallel.
pub(crate) fn on_banks<T: Send>(
    cfg: &RunConfig,
    work: impl Fn(&mut BankState, std::ops::Range<usize>) -> Result<T, HarnessError> + Sync,
) -> Result<Vec<(usize, BankState, T)>, HarnessError> {
    let ranges = split(cfg.elements, cfg.banks);
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let work = &work;
                s.spawn(move || {
                    let mut bank = BankState::new(cfg.lanes, cfg.mode)?;
                    let len = r.len();
                    let out = work(&mut bank, r)?;
                    Ok((len, bank, out))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bank thread panicked")).collect()
    })
}

/// Full pipeline for one operation on seeded operands.
pub fn run_operation(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    let (a, b, sel) = operands(cfg.n, cfg.elements, cfg.seed);
    run_operation_with(cfg, &a, &b, &sel)
}

/// Full pipeline for one operation on given operands. `b` and `sel` are
/// ignored by operations that do not take them.
pub fn run_operation_with(cfg: &RunConfig, a: &[u64], b: &[u64], sel: &[bool]) -> Result<RunOutcome, HarnessError> {
    let Target::Op(kind) = cfg.target else {
        return Err(HarnessError::Config("not an operation".into()));
    };
    let cfg = &RunConfig { elements: a.len(), ..cfg.clone() };
    cfg.validate()?;
    let spec = kind.spec();
    let n = cfg.n;
    let banks = on_banks(cfg, |bank, r| {
        let src1 = bank.put(n, &a[r.clone()])?;
        let src2 = if spec.arity == 2 { Some(bank.put(n, &b[r.clone()])?) } else { None };
        let select = if spec.select {
            let s: Vec<u64> = sel[r.clone()].iter().map(|&x| x as u64).collect();
            Some(bank.put(1, &s)?)
        } else {
            None
        };
        let dst = bank.alloc(kind.result_bits(n), r.len())?;
        bank.bbop(kind, n, dst, src1, src2, select)?;
        bank.get(dst)
    })?;
    let expected =
        (0..a.len()).map(|i| scalar_oracle(kind, n, a[i], b.get(i).copied().unwrap_or(0), sel.get(i).copied().unwrap_or(false))).collect();
    let mut outputs = Vec::with_capacity(a.len());
    let mut states = Vec::new();
    for (len, bank, out) in banks {
        outputs.extend(out);
        states.push((len, bank));
    }
    let label = format!("{kind}");
    Ok(RunOutcome { report: StatsReport::collect(label, cfg, states), outputs, expected })
}
