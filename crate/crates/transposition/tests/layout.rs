use proptest::prelude::*;
use subarray_sim::{RowAddr, Subarray};
use transposition::*;

fn desc(address: u64, size: usize, n: u32, base_row: u16) -> ObjectDescriptor {
    ObjectDescriptor { address, size, element_bits: n, base_row }
}

#[test]
fn register_and_overlap() {
    let mut t = TranspositionUnit::default();
    t.register(desc(0x1000, 65536, 8, 0)).unwrap();
    assert_eq!(t.tracker.len(), 1);
    assert_eq!(t.register(desc(0x1000 + 100, 10, 8, 8)), Err(TransposeError::Overlap));
}

#[test]
fn tracker_capacity() {
    let mut t = ObjectTracker::new();
    for i in 0..TRACKER_CAPACITY as u64 {
        t.register(desc(i * 64, 8, 8, 0)).unwrap();
    }
    assert_eq!(t.register(desc(1 << 40, 8, 8, 0)), Err(TransposeError::TrackerFull));
}

#[test]
fn three_in_four_bits() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(64);
    let h = t.register(desc(0, 1, 4, 0)).unwrap();
    t.store(h, &[3], &mut sub).unwrap();
    let bit = |r: u16| sub.read_row(RowAddr::D(r)).unwrap().get(0);
    assert_eq!([bit(0), bit(1), bit(2), bit(3)], [true, true, false, false]);
}

#[test]
fn full_slice_is_eight_lines() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(1024);
    let h = t.register(desc(0, 512, 8, 0)).unwrap();
    t.store(h, &vec![7; 512], &mut sub).unwrap();
    assert_eq!(t.stats().slices_written, 1);
    assert_eq!(t.stats().lines_written, 8);
    assert_eq!(t.stats().h2v_cycles, 8);
}

#[test]
fn small_roundtrip() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(64);
    let h = t.register(desc(0, 16, 8, 10)).unwrap();
    let vals: Vec<u64> = (0..16).collect();
    t.store(h, &vals, &mut sub).unwrap();
    assert_eq!(t.fetch(h, &sub).unwrap(), vals);
}

#[test]
fn single_element_fetch_reads_whole_slice() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(1024);
    let h = t.register(desc(0, 512, 8, 0)).unwrap();
    t.store(h, &vec![1; 512], &mut sub).unwrap();
    t.reset_stats();
    assert_eq!(t.fetch_range(h, 100, 1, &sub).unwrap(), vec![1]);
    assert_eq!(t.stats().lines_read, 8);
}

#[test]
fn untracked_address_passes_through() {
    let mut t = TranspositionUnit::default();
    t.register(desc(0x1000, 16, 8, 0)).unwrap();
    assert_eq!(t.access(0x1004), Access::Object { handle: 0, element: 4 });
    assert_eq!(t.access(0x9000), Access::PassThrough);
    assert_eq!(t.stats().passthrough, 1);
}

#[test]
fn overflow_rejected() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(64);
    let h = t.register(desc(0, 1, 8, 0)).unwrap();
    assert!(matches!(t.store(h, &[256], &mut sub), Err(TransposeError::Overflow { .. })));
}

#[test]
fn dump_lists_elements() {
    let mut t = TranspositionUnit::default();
    let mut sub = Subarray::new(64);
    let h = t.register(desc(0, 2, 8, 0)).unwrap();
    t.store(h, &[5, 9], &mut sub).unwrap();
    let d = t.dump(h, &sub).unwrap();
    assert!(d.starts_with("element[0] = 5\nelement[1] = 9\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn store_fetch_identity(
        n in prop::sample::select(vec![8u32, 16, 32, 64]),
        vals in prop::collection::vec(any::<i64>(), 1..300),
        lanes in prop::sample::select(vec![64usize, 128, 1024]),
    ) {
        let mut t = TranspositionUnit::default();
        let mut sub = Subarray::new(lanes);
        let raw: Vec<u64> = vals.iter().map(|&v| from_signed(v, n)).collect();
        let h = t.register(desc(0, raw.len(), n, 3)).unwrap();
        t.store(h, &raw, &mut sub).unwrap();
        let back = t.fetch(h, &sub).unwrap();
        prop_assert_eq!(&back, &raw);
        for (j, &v) in raw.iter().enumerate() {
            let want = vals[j];
            prop_assert_eq!(sign_extend(v, n), if n == 64 { want } else { sign_extend(from_signed(want, n), n) });
        }
        // bit i of element j sits at row base + chunk*n + i, lane j mod lanes
        let obj = t.object(h).unwrap();
        for (j, &v) in raw.iter().enumerate().step_by(7) {
            for i in 0..n {
                let row = 3 + (j / lanes) * n as usize + i as usize;
                prop_assert_eq!(obj.position(j, i, lanes), (row as u16, j % lanes));
                prop_assert_eq!(sub.read_row(RowAddr::D(row as u16)).unwrap().get(j % lanes), v >> i & 1 == 1);
            }
        }
    }
}
