use logic_graph::{random_mig, LogicGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use row_allocator::{allocate_with, validate_allocation, Bindings, ComputeRow, DRef, Decoder, InputLoc, OutputSink};
use subarray_sim::{BitRow, RowAddr, Subarray};
use uprogram::{coalesce, translate, run_straight, RegFile};

const LANES: usize = 256;

fn bindings(g: &LogicGraph) -> Bindings {
    Bindings {
        inputs: (0..g.num_inputs as u8).map(|i| InputLoc::D(DRef::new(18 + i / 4, i % 4))).collect(),
        outputs: (0..g.outputs.len() as u8).map(|j| OutputSink::D(DRef::new(20 + j / 4, j % 4))).collect(),
        spill: (26..32).map(|r| DRef::new(r, 0)).collect(),
    }
}

fn regs() -> RegFile {
    let mut r = [0u32; 32];
    r[18] = 0;
    r[19] = 4;
    r[20] = 100;
    r[21] = 104;
    for (k, reg) in (26..32).enumerate() {
        r[reg] = 200 + k as u32;
    }
    r
}

/// Allocates, translates and runs `g`, then checks every lane.
fn check_on_subarray(g: &LogicGraph, seed: u64, merge: bool) {
    let bind = bindings(g);
    let alloc = allocate_with(g, &bind, &Decoder::default()).expect("allocation");
    assert!(validate_allocation(g, &alloc).passed());
    let mut ops = translate(g, &alloc).expect("translation");
    if merge {
        ops = coalesce(&ops);
    }
    let r = regs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sub = Subarray::new(LANES);
    let mut lanes_in = vec![vec![false; g.num_inputs as usize]; LANES];
    for i in 0..g.num_inputs as usize {
        let bits: Vec<bool> = (0..LANES).map(|_| rng.gen()).collect();
        for (l, b) in bits.iter().enumerate() {
            lanes_in[l][i] = *b;
        }
        let d = bind.inputs[i];
        let InputLoc::D(d) = d else { unreachable!() };
        sub.write_row(RowAddr::D((r[d.reg as usize] + d.offset as u32) as u16), &BitRow::from_bools(&bits)).unwrap();
    }
    run_straight(&ops, &r, &mut sub).expect("execution");
    for (j, o) in bind.outputs.iter().enumerate() {
        let OutputSink::D(d) = o else { unreachable!() };
        let row = sub.read_row(RowAddr::D((r[d.reg as usize] + d.offset as u32) as u16)).unwrap();
        for (l, a) in lanes_in.iter().enumerate() {
            assert_eq!(row.get(l), g.evaluate(a).unwrap()[j], "output {j} lane {l}\n{}", g.to_text());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_migs_execute_correctly(seed in any::<u64>(), inputs in 1u32..7, nodes in 1usize..13, outs in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_mig(&mut rng, inputs, nodes, outs);
        check_on_subarray(&g, seed, false);
        check_on_subarray(&g, seed, true);
    }
}

#[test]
fn full_adder_is_eight_commands_per_bit() {
    let aoig = LogicGraph::parse(
        "kind AOIG\ninputs 3\nn0 = AND(x0, x1)\nn1 = OR(x0, x1)\nn2 = AND(!n0, n1)\nn3 = AND(n2, x2)\n\
         n4 = OR(n2, x2)\nn5 = AND(!n3, n4)\nn6 = OR(n0, n3)\noutput n5\noutput n6\n",
    )
    .unwrap();
    let mig = logic_graph::optimize(&aoig, logic_graph::DEFAULT_ROUNDS).unwrap();
    assert_eq!(mig.node_count(), 3);
    let bind = Bindings {
        inputs: vec![InputLoc::D(DRef::new(18, 0)), InputLoc::D(DRef::new(19, 0)), InputLoc::Resident(ComputeRow::Dcc1)],
        outputs: vec![OutputSink::D(DRef::new(20, 0)), OutputSink::Resident(ComputeRow::Dcc1)],
        spill: vec![],
    };
    let alloc = allocate_with(&mig, &bind, &Decoder::default()).unwrap();
    let ops = coalesce(&translate(&mig, &alloc).unwrap());
    assert_eq!(ops.len(), 8, "{ops:?}");
    let prog = uprogram::loopify_with(
        &ops,
        32,
        uprogram::LoopShape::Linear,
        &uprogram::LoopSpec {
            prologue: vec![uprogram::MicroOp::Aap { dst: uprogram::Operand::Reg(6), src: uprogram::Operand::Reg(16) }],
            carried: vec![ComputeRow::Dcc1],
            ..Default::default()
        },
        &Decoder::default(),
    )
    .unwrap();
    assert_eq!(prog.command_count().unwrap(), 257);
}
