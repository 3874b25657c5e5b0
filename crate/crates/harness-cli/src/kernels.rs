use op_library::OpKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transposition::{from_signed, sign_extend};

use crate::config::{Kernel, RunConfig, Target};
use crate::run::{on_banks, RunOutcome, StatsReport};
use crate::HarnessError;

/// Kernel operands as raw n-bit two's complement patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelInputs {
    /// `c[i] = a[i] > pred[i] ? a[i] + b[i] : a[i] - b[i]`
    Brightness { a: Vec<u64>, b: Vec<u64>, pred: Vec<u64> },
    /// `match[i] = low <= values[i] <= high`
    TableScan { values: Vec<u64>, low: u64, high: u64 },
}

impl KernelInputs {
    pub fn kernel(&self) -> Kernel {
        match self {
            KernelInputs::Brightness { .. } => Kernel::Brightness,
            KernelInputs::TableScan { .. } => Kernel::TableScan,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            KernelInputs::Brightness { a, .. } => a.len(),
            KernelInputs::TableScan { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn random(kernel: Kernel, n: u32, count: usize, seed: u64) -> KernelInputs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = -(1i64 << (n - 1));
        let hi = (1i64 << (n - 1)) - 1;
        let draw = |rng: &mut ChaCha8Rng| from_signed(rng.gen_range(lo..=hi), n);
        match kernel {
            Kernel::Brightness => KernelInputs::Brightness {
                a: (0..count).map(|_| draw(&mut rng)).collect(),
                b: (0..count).map(|_| draw(&mut rng)).collect(),
                pred: (0..count).map(|_| draw(&mut rng)).collect(),
            },
            Kernel::TableScan => {
                let x = rng.gen_range(lo..=hi);
                let y = rng.gen_range(lo..=hi);
                let (low, high) = (x.min(y), x.max(y));
                let mut values: Vec<u64> = (0..count).map(|_| draw(&mut rng)).collect();
                // Bounds and their neighbours show up in the data.
                for (i, v) in [low, high, low - 1, high + 1].into_iter().enumerate() {
                    if i < count && (lo..=hi).contains(&v) {
                        values[i] = from_signed(v, n);
                    }
                }
                KernelInputs::TableScan { values, low: from_signed(low, n), high: from_signed(high, n) }
            }
        }
    }
}

fn wrap(v: i64, n: u32) -> u64 {
    from_signed(v, n) & if n == 64 { u64::MAX } else { (1 << n) - 1 }
}

pub fn brightness_oracle(n: u32, a: u64, b: u64, pred: u64) -> u64 {
    let (a, b, pred) = (sign_extend(a, n), sign_extend(b, n), sign_extend(pred, n));
    if a > pred {
        wrap(a.wrapping_add(b), n)
    } else {
        wrap(a.wrapping_sub(b), n)
    }
}

pub fn table_scan_oracle(n: u32, v: u64, low: u64, high: u64) -> u64 {
    let v = sign_extend(v, n);
    (sign_extend(low, n) <= v && v <= sign_extend(high, n)) as u64
}

pub fn run_kernel(kernel: Kernel, cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    run_kernel_with(cfg, &KernelInputs::random(kernel, cfg.n, cfg.elements, cfg.seed))
}

pub fn run_kernel_with(cfg: &RunConfig, inputs: &KernelInputs) -> Result<RunOutcome, HarnessError> {
    let kernel = inputs.kernel();
    let cfg = &RunConfig { target: Target::Kernel(kernel), elements: inputs.len(), ..cfg.clone() };
    cfg.validate()?;
    let n = cfg.n;
    let banks = on_banks(cfg, |bank, r| match inputs {
        KernelInputs::Brightness { a, b, pred } => {
            let a = bank.put(n, &a[r.clone()])?;
            let b = bank.put(n, &b[r.clone()])?;
            let pred = bank.put(n, &pred[r.clone()])?;
            let d = bank.alloc(n, r.len())?;
            let e = bank.alloc(n, r.len())?;
            let f = bank.alloc(1, r.len())?;
            let c = bank.alloc(n, r.len())?;
            bank.bbop(OpKind::Add, n, d, a, Some(b), None)?;
            bank.bbop(OpKind::Sub, n, e, a, Some(b), None)?;
            bank.bbop(OpKind::Gt, n, f, a, Some(pred), None)?;
            bank.bbop(OpKind::IfElse, n, c, d, Some(e), Some(f))?;
            bank.get(c)
        }
        KernelInputs::TableScan { values, low, high } => {
            let v = bank.put(n, &values[r.clone()])?;
            let lo = bank.put(n, &vec![*low; r.len()])?;
            let hi = bank.put(n, &vec![*high; r.len()])?;
            let above = bank.alloc(1, r.len())?;
            let below = bank.alloc(1, r.len())?;
            let hit = bank.alloc(1, r.len())?;
            bank.bbop(OpKind::Ge, n, above, v, Some(lo), None)?;
            bank.bbop(OpKind::Ge, n, below, hi, Some(v), None)?;
            bank.and_bits(hit, above, below)?;
            bank.get(hit)
        }
    })?;
    let expected = match inputs {
        KernelInputs::Brightness { a, b, pred } => (0..a.len()).map(|i| brightness_oracle(n, a[i], b[i], pred[i])).collect(),
        KernelInputs::TableScan { values, low, high } => values.iter().map(|&v| table_scan_oracle(n, v, *low, *high)).collect(),
    };
    let mut outputs = Vec::new();
    let mut states = Vec::new();
    for (len, bank, out) in banks {
        outputs.extend(out);
        states.push((len, bank));
    }
    Ok(RunOutcome { report: StatsReport::collect(kernel.name().to_string(), cfg, states), outputs, expected })
}
