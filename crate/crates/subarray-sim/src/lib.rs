//! Bit-exact model of a compute-capable DRAM subarray.
//!
//! Rows are bit vectors with one bit per lane. The B-group holds four
//! regular compute rows and two dual-contact rows whose n-wordline reads
//! and writes the complement. Activating three B rows at once leaves the
//! lane-wise majority in all of them.

mod bits;
mod decoder;
mod state;

pub use bits::BitRow;
pub use decoder::{ComputeRow, Decoder, DecoderError, Wordline, DECODER_ENTRIES};
pub use state::{Bank, DramCommand, RowAddr, SimError, Subarray, DEFAULT_LANES, D_ROWS, MAX_LANES};

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bits: &str) -> BitRow {
        BitRow::from_bools(&bits.chars().map(|c| c == '1').collect::<Vec<_>>())
    }

    #[test]
    fn ap_takes_majority_into_all_three() {
        let mut s = Subarray::new(4);
        s.write_row(RowAddr::B(0), &row("1100")).unwrap();
        s.write_row(RowAddr::B(1), &row("1010")).unwrap();
        s.write_row(RowAddr::B(2), &row("0110")).unwrap();
        s.execute(DramCommand::Ap { addr: RowAddr::B(12) }).unwrap();
        for e in 0..3 {
            assert_eq!(s.read_row(RowAddr::B(e)).unwrap(), row("1110"));
        }
    }

    #[test]
    fn copy_leaves_source() {
        let mut s = Subarray::new(8);
        let p = row("10110010");
        s.write_row(RowAddr::D(3), &p).unwrap();
        s.execute(DramCommand::Aap { dst: RowAddr::B(1), src: RowAddr::D(3) }).unwrap();
        assert_eq!(s.read_row(RowAddr::B(1)).unwrap(), p);
        assert_eq!(s.read_row(RowAddr::D(3)).unwrap(), p);
    }

    #[test]
    fn n_wordline_reads_complement() {
        let mut s = Subarray::new(4);
        s.write_row(RowAddr::B(4), &row("0100")).unwrap();
        s.execute(DramCommand::Aap { dst: RowAddr::D(0), src: RowAddr::B(5) }).unwrap();
        assert_eq!(s.read_row(RowAddr::D(0)).unwrap(), row("1011"));
        s.write_row(RowAddr::B(6), &row("0011")).unwrap();
        assert_eq!(s.read_row(RowAddr::B(7)).unwrap(), row("1100"));
    }

    #[test]
    fn unequal_pair_is_an_error() {
        let mut s = Subarray::new(2);
        s.write_row(RowAddr::B(2), &row("10")).unwrap();
        s.write_row(RowAddr::B(3), &row("11")).unwrap();
        let err = s.execute(DramCommand::Aap { dst: RowAddr::D(0), src: RowAddr::B(10) });
        assert_eq!(err, Err(SimError::UnequalPair(10)));
    }

    #[test]
    fn ap_on_non_triple_rejected() {
        let mut s = Subarray::new(2);
        assert!(matches!(s.execute(DramCommand::Ap { addr: RowAddr::B(10) }), Err(SimError::NotTriple(_))));
        assert!(matches!(s.execute(DramCommand::Ap { addr: RowAddr::D(1) }), Err(SimError::NotTriple(_))));
    }

    #[test]
    fn constant_rows() {
        let mut s = Subarray::new(5);
        assert_eq!(s.read_row(RowAddr::C1).unwrap(), BitRow::ones(5));
        assert_eq!(s.read_row(RowAddr::C0).unwrap(), BitRow::zeros(5));
        assert!(s.write_row(RowAddr::C0, &BitRow::ones(5)).is_err());
        assert!(s.execute(DramCommand::Aap { dst: RowAddr::C1, src: RowAddr::D(0) }).is_err());
    }

    #[test]
    fn multi_row_host_access_rejected() {
        let s = Subarray::new(2);
        assert_eq!(s.read_row(RowAddr::B(12)), Err(SimError::MultiRow(RowAddr::B(12))));
    }

    #[test]
    fn mixed_polarity_destination() {
        // B13 = {!DCC0, T1, T0}: a copy stores the complement in DCC0.
        let mut s = Subarray::new(4);
        s.write_row(RowAddr::D(0), &row("1100")).unwrap();
        s.execute(DramCommand::Aap { dst: RowAddr::B(13), src: RowAddr::D(0) }).unwrap();
        assert_eq!(s.read_row(RowAddr::B(4)).unwrap(), row("0011"));
        assert_eq!(s.read_row(RowAddr::B(0)).unwrap(), row("1100"));
    }

    #[test]
    fn bank_lanes() {
        assert_eq!(Bank::new(16, 65536).total_lanes(), 16 * 65536);
        assert_eq!(Bank::new(1, 8192).total_lanes(), 8192);
    }

    #[test]
    fn dump_lists_rows() {
        let mut s = Subarray::new(4);
        s.write_row(RowAddr::D(7), &row("0101")).unwrap();
        let d = s.dump();
        assert!(d.starts_with("T0: 0000\n"));
        assert!(d.contains("D7: 0101\n"));
    }
}
