use control_unit::{BbopInstruction, ControlUnit, ObjectRef, ProgramMemory, DATA_BASE};
use op_library::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use subarray_sim::{BitRow, RowAddr, Subarray};

const SRC1: u16 = DATA_BASE;
const SRC2: u16 = DATA_BASE + 64;
const SEL: u16 = DATA_BASE + 128;
const DST: u16 = DATA_BASE + 192;

fn memory(mode: Mode) -> &'static ProgramMemory {
    static OPT: OnceLock<ProgramMemory> = OnceLock::new();
    static NAIVE: OnceLock<ProgramMemory> = OnceLock::new();
    let cell = if mode == Mode::Optimized { &OPT } else { &NAIVE };
    cell.get_or_init(|| program_memory(mode).unwrap())
}

fn mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

fn store(sub: &mut Subarray, base: u16, n: u32, vals: &[u64]) {
    for i in 0..n {
        let bits: Vec<bool> = vals.iter().map(|v| v >> i & 1 == 1).collect();
        sub.write_row(RowAddr::D(base + i as u16), &BitRow::from_bools(&bits)).unwrap();
    }
}

fn fetch(sub: &Subarray, base: u16, n: u32, lanes: usize) -> Vec<u64> {
    let mut out = vec![0u64; lanes];
    for i in 0..n {
        let row = sub.read_row(RowAddr::D(base + i as u16)).unwrap();
        for (l, v) in out.iter_mut().enumerate() {
            *v |= (row.get(l) as u64) << i;
        }
    }
    out
}

/// Runs one bbop over a single chunk; returns results and commands.
fn run(kind: OpKind, n: u32, mode: Mode, a: &[u64], b: &[u64], sel: &[bool]) -> (Vec<u64>, u64) {
    let lanes = a.len();
    let mut sub = Subarray::new(lanes);
    store(&mut sub, SRC1, n, a);
    let spec = kind.spec();
    if spec.arity == 2 {
        store(&mut sub, SRC2, n, b);
    }
    if spec.select {
        let s: Vec<u64> = sel.iter().map(|&x| x as u64).collect();
        store(&mut sub, SEL, 1, &s);
    }
    let rb = kind.result_bits(n);
    let mut cu = ControlUnit::new(memory(mode).clone());
    cu.enqueue(BbopInstruction {
        opcode: kind.opcode(),
        dst: ObjectRef::new(DST, rb as u16),
        src1: ObjectRef::new(SRC1, n as u16),
        src2: (spec.arity == 2).then(|| ObjectRef::new(SRC2, n as u16)),
        select: spec.select.then(|| ObjectRef::new(SEL, 1)),
        size: lanes,
        n,
    })
    .unwrap();
    let stats = cu.run_to_completion(&mut sub).unwrap();
    (fetch(&sub, DST, rb, lanes), stats.aap + stats.ap)
}

fn operands(n: u32, lanes: usize, seed: u64) -> (Vec<u64>, Vec<u64>, Vec<bool>) {
    let m = mask(n);
    let corners = [0, 1, 1 << (n - 1), m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &x in &corners {
        for &y in &corners {
            a.push(x);
            b.push(y);
        }
    }
    while a.len() < lanes {
        a.push(rng.gen::<u64>() & m);
        // Small divisors and near-equal pairs exercise more paths.
        let y = match rng.gen_range(0..4) {
            0 => rng.gen::<u64>() & m & 0xff,
            1 => a[a.len() - 1] ^ (1 << rng.gen_range(0..n)),
            _ => rng.gen::<u64>() & m,
        };
        b.push(y);
    }
    let sel = (0..lanes).map(|_| rng.gen()).collect();
    (a, b, sel)
}

fn check(kind: OpKind, n: u32, mode: Mode) {
    let (a, b, sel) = operands(n, 200, n as u64 * 31 + kind.opcode() as u64);
    let (got, _) = run(kind, n, mode, &a, &b, &sel);
    for l in 0..a.len() {
        let want = scalar_oracle(kind, n, a[l], b[l], sel[l]);
        assert_eq!(got[l], want, "{kind} n={n} {} a={:#x} b={:#x} sel={}", mode.name(), a[l], b[l], sel[l]);
    }
}

#[test]
fn every_op_matches_oracle_optimized() {
    for kind in OpKind::ALL {
        for n in WIDTHS {
            check(kind, n, Mode::Optimized);
        }
    }
}

#[test]
fn every_op_matches_oracle_naive() {
    for kind in OpKind::ALL {
        for n in WIDTHS {
            check(kind, n, Mode::AmbitNaive);
        }
    }
}

#[test]
fn counts_follow_the_formulas() {
    let mut report = Vec::new();
    for kind in OpKind::ALL {
        for n in WIDTHS {
            let (a, b, sel) = operands(n, 64, 1);
            let (_, got) = run(kind, n, Mode::Optimized, &a, &b, &sel);
            let want = expected_aap_count(kind, n);
            let ok = match kind {
                OpKind::Add | OpKind::Sub => want == ExpectedCount::Exact(got),
                _ => want.within(got, 20),
            };
            if !ok {
                report.push(format!("{kind} n={n}: {got} vs {want}"));
            }
        }
    }
    assert!(report.is_empty(), "{report:#?}");
}

#[test]
fn static_count_matches_execution() {
    for kind in [OpKind::Div, OpKind::Bitcount, OpKind::Mul] {
        let p = build_program(kind, 16, Mode::Optimized).unwrap();
        let (a, b, sel) = operands(16, 64, 2);
        assert_eq!(p.command_count().unwrap(), run(kind, 16, Mode::Optimized, &a, &b, &sel).1);
    }
}

#[test]
fn division_fits_in_128_bytes() {
    for n in WIDTHS {
        assert!(build_program(OpKind::Div, n, Mode::Optimized).unwrap().byte_len() <= 128);
    }
}

#[test]
fn op_graph_shapes() {
    let g = build_op_graph(OpKind::Add, 32).unwrap();
    assert_eq!(g.shape, uprogram::LoopShape::Linear);
    assert_eq!(g.carried, vec!["carry"]);
    assert_eq!(build_op_graph(OpKind::XorRed, 8).unwrap().shape, uprogram::LoopShape::Logarithmic);
    assert_eq!(build_op_graph(OpKind::IfElse, 8).unwrap().shape, uprogram::LoopShape::Linear);
    assert!(matches!(build_op_graph(OpKind::Add, 12), Err(OpError::Width(12))));
}
