use harness_cli::*;
use op_library::{Mode, OpKind};

#[test]
fn add_one_chunk() {
    let out = run_operation(&RunConfig::op(OpKind::Add, 8, 1024, 1024)).unwrap();
    assert!(out.is_exact());
    assert_eq!(out.report.commands(), 65);
    assert_eq!(out.report.iterations, 1);
    let (formula, _, measured) = out.report.formula.unwrap();
    assert_eq!((formula, measured), ("8n+1", 65));
}

#[test]
fn sixteen_banks_repeat_one() {
    let cfg = RunConfig { banks: 16, ..RunConfig::op(OpKind::Add, 8, 16 * 1024, 1024) };
    let out = run_operation(&cfg).unwrap();
    assert!(out.is_exact());
    assert_eq!(out.report.banks.len(), 16);
    assert!(out.report.banks.iter().all(|b| b.exec.commands() == 65 && b.elements == 1024));
    assert_eq!(out.report.total_lanes(), 16 * 1024);
    assert_eq!(out.report.commands(), 16 * 65);
}

#[test]
fn naive_add_is_correct_and_longer() {
    let opt = run_operation(&RunConfig::op(OpKind::Add, 8, 1024, 1024)).unwrap();
    let cfg = RunConfig { mode: Mode::AmbitNaive, ..RunConfig::op(OpKind::Add, 8, 1024, 1024) };
    let naive = run_operation(&cfg).unwrap();
    assert!(naive.is_exact());
    assert!(naive.report.aap + naive.report.ap > opt.report.aap + opt.report.ap);
    assert!(naive.report.energy > opt.report.energy);
}

#[test]
fn brightness_by_hand() {
    let cfg = RunConfig { lanes: 64, ..Default::default() };
    let run = |pred| {
        let inputs = KernelInputs::Brightness { a: vec![10], b: vec![5], pred: vec![pred] };
        run_kernel_with(&cfg, &inputs).unwrap()
    };
    let then = run(0);
    assert_eq!((then.outputs.clone(), then.expected.clone()), (vec![15], vec![15]));
    let other = run(20);
    assert_eq!((other.outputs.clone(), other.expected.clone()), (vec![5], vec![5]));
}

#[test]
fn table_scan_bounds_are_inclusive() {
    let cfg = RunConfig { n: 16, lanes: 64, ..Default::default() };
    let inputs = KernelInputs::TableScan { values: vec![100, 200, 99, 201, 150], low: 100, high: 200 };
    let out = run_kernel_with(&cfg, &inputs).unwrap();
    assert_eq!(out.outputs, vec![1, 1, 0, 0, 1]);
    assert!(out.is_exact());
}

#[test]
fn latency_doubles_with_elements() {
    let one = run_operation(&RunConfig::op(OpKind::Sub, 16, 1024, 1024)).unwrap().report;
    let two = run_operation(&RunConfig::op(OpKind::Sub, 16, 2048, 1024)).unwrap().report;
    assert_eq!(two.iterations, 2 * one.iterations);
    assert_eq!(two.commands(), 2 * one.commands());
    assert_eq!(two.latency_ns, 2 * one.latency_ns);
    let t = RunConfig::default().timing;
    let cycles = one.banks[0].transposition.cycles();
    assert_eq!(one.latency_ns, one.aap * t.t_aap_ns + one.ap * t.t_ap_ns + cycles * t.t_transpose_ns);
}

#[test]
fn throughput_scales_with_banks() {
    let base = RunConfig::op(OpKind::Max, 8, 512, 512);
    let one = run_operation(&base).unwrap().report;
    let four = run_operation(&RunConfig { banks: 4, elements: 4 * 512, ..base }).unwrap().report;
    assert_eq!(four.latency_ns, one.latency_ns);
    assert!((four.throughput / one.throughput - 4.0).abs() < 1e-9);
}

#[test]
fn reports_are_deterministic() {
    let cfg = RunConfig { banks: 3, seed: 42, ..RunConfig::op(OpKind::Mul, 8, 700, 128) };
    let a = render_machine(&run_operation(&cfg).unwrap().report);
    let b = render_machine(&run_operation(&cfg).unwrap().report);
    assert_eq!(a, b);
    for key in ["formula=11n^2-5n-1", "expected_per_chunk=", "measured_per_chunk=", "bank.2.aap="] {
        assert!(a.contains(key), "{key} missing from\n{a}");
    }
    let dir = std::env::temp_dir().join(format!("report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("r.txt");
    emit_report(&p, &run_operation(&cfg).unwrap().report, Format::Machine).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), a);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ratio_table_has_a_row_per_op_and_a_mean() {
    let cfg = RunConfig { lanes: 64, ..Default::default() };
    let t = compare_modes(&OpKind::ALL, 8, Mode::Optimized, Mode::AmbitNaive, &cfg).unwrap();
    assert!(t.all_exact());
    let human = render_ratio_human(&t);
    assert_eq!(human.lines().count(), 1 + 16 + 1);
    assert!(human.lines().last().unwrap().starts_with("geomean"));
    let machine = render_ratio_machine(&t);
    assert_eq!(machine.lines().count(), 2 + 16 + 1);
    assert!(t.rows.iter().all(|r| r.count_ratio() >= 1.0));
}

#[test]
fn pipeline_errors_name_their_stage() {
    // Sixty-four bit operands over too many chunks cannot be placed.
    let err = run_operation(&RunConfig::op(OpKind::Add, 64, 64 * 8, 64)).unwrap_err();
    assert!(err.to_string().starts_with("transposition:"), "{err}");
    let err = run_operation(&RunConfig { banks: 0, ..Default::default() }).unwrap_err();
    assert!(err.to_string().starts_with("config:"), "{err}");
}
