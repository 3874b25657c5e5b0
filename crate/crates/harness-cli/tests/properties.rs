use harness_cli::*;
use op_library::{Mode, OpKind, WIDTHS};
use proptest::prelude::*;

fn op() -> impl Strategy<Value = OpKind> {
    prop::sample::select(OpKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outputs_match_and_totals_are_bank_sums(
        kind in op(),
        n in prop::sample::select(WIDTHS.to_vec()),
        elements in 1usize..300,
        banks in 1usize..5,
        naive in any::<bool>(),
        seed in any::<u64>(),
    ) {
        // At most three chunks, so three 64-bit objects still fit.
        let lanes = 128;
        let mode = if naive { Mode::AmbitNaive } else { Mode::Optimized };
        let cfg = RunConfig { banks, mode, seed, ..RunConfig::op(kind, n, elements, lanes) };
        let out = run_operation(&cfg).unwrap();
        prop_assert!(out.is_exact(), "{kind} n={n}: {:?}", out.mismatches());
        let r = &out.report;
        prop_assert_eq!(r.aap, r.banks.iter().map(|b| b.exec.aap).sum::<u64>());
        prop_assert_eq!(r.ap, r.banks.iter().map(|b| b.exec.ap).sum::<u64>());
        prop_assert_eq!(r.iterations, r.banks.iter().map(|b| b.exec.iterations).sum::<u64>());
        prop_assert!((r.energy - r.banks.iter().map(|b| b.energy).sum::<f64>()).abs() < 1e-6);
        prop_assert_eq!(r.elements, elements);
        prop_assert_eq!(r.latency_ns, r.banks.iter().map(|b| b.latency_ns).max().unwrap());
    }

    #[test]
    fn same_seed_same_everything(kind in op(), seed in any::<u64>(), banks in 1usize..4) {
        let cfg = RunConfig { banks, seed, ..RunConfig::op(kind, 8, 300, 128) };
        let a = run_operation(&cfg).unwrap();
        let b = run_operation(&cfg).unwrap();
        prop_assert_eq!(&a.outputs, &b.outputs);
        prop_assert_eq!(render_machine(&a.report), render_machine(&b.report));
    }

    #[test]
    fn bank_count_does_not_change_results(kind in op(), banks in 2usize..6) {
        let base = RunConfig::op(kind, 16, 500, 64);
        let one = run_operation(&base).unwrap();
        let many = run_operation(&RunConfig { banks, ..base }).unwrap();
        prop_assert_eq!(one.outputs, many.outputs);
    }

    #[test]
    fn kernels_match_their_references(seed in any::<u64>(), n in prop::sample::select(vec![8u32, 16, 32]), banks in 1usize..3) {
        for kernel in [Kernel::Brightness, Kernel::TableScan] {
            let cfg = RunConfig { n, lanes: 128, elements: 300, banks, seed, ..Default::default() };
            let out = run_kernel(kernel, &cfg).unwrap();
            prop_assert!(out.is_exact(), "{}: {:?}", kernel.name(), out.mismatches());
        }
    }

    #[test]
    fn energy_is_additive_over_runs(a in op(), b in op()) {
        let p = EnergyParams { e_precharge: 0.25, ..Default::default() };
        let stats = |k| {
            let cfg = RunConfig { energy: p, ..RunConfig::op(k, 8, 64, 64) };
            run_operation(&cfg).unwrap().report.banks[0].exec
        };
        let (sa, sb) = (stats(a), stats(b));
        let mut both = sa;
        both.merge(&sb);
        prop_assert!((energy_model(&both, &p) - energy_model(&sa, &p) - energy_model(&sb, &p)).abs() < 1e-6);
    }
}
