use std::fmt;

use crate::bits::BitRow;
use crate::decoder::{ComputeRow, Decoder, Wordline};

pub const D_ROWS: usize = 1006;
pub const DEFAULT_LANES: usize = 1024;
pub const MAX_LANES: usize = 65536;

/// A row address as seen by the memory controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowAddr {
    D(u16),
    C0,
    C1,
    /// Index into the B-group decoder.
    B(u8),
}

impl fmt::Display for RowAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowAddr::D(r) => write!(f, "D{r}"),
            RowAddr::C0 => f.write_str("C0"),
            RowAddr::C1 => f.write_str("C1"),
            RowAddr::B(e) => write!(f, "B{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DramCommand {
    Aap { dst: RowAddr, src: RowAddr },
    Ap { addr: RowAddr },
}

impl fmt::Display for DramCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DramCommand::Aap { dst, src } => write!(f, "AAP {dst} {src}"),
            DramCommand::Ap { addr } => write!(f, "AP {addr}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("pair B{0} read while its rows differ")]
    UnequalPair(u8),
    #[error("AP needs a triple address, got {0}")]
    NotTriple(RowAddr),
    #[error("constant row {0} cannot be written")]
    ConstantWrite(RowAddr),
    #[error("D-group row {0} out of range")]
    RowOutOfRange(u16),
    #[error("B-group entry {0} out of range")]
    EntryOutOfRange(u8),
    #[error("{0} is a multi-row address")]
    MultiRow(RowAddr),
    #[error("row has {got} lanes, subarray has {want}")]
    LaneMismatch { got: usize, want: usize },
}

/// One subarray: D rows, two constant rows and the six compute rows.
#[derive(Clone, Debug)]
pub struct Subarray {
    lanes: usize,
    d_rows: Vec<Option<BitRow>>,
    compute: Vec<BitRow>,
    decoder: Decoder,
    row_buffer: BitRow,
}

impl Subarray {
    pub fn new(lanes: usize) -> Self {
        Self::with_decoder(lanes, Decoder::default())
    }

    pub fn with_decoder(lanes: usize, decoder: Decoder) -> Self {
        assert!(lanes >= 1 && lanes <= MAX_LANES, "lanes must be in 1..={MAX_LANES}");
        Subarray {
            lanes,
            d_rows: vec![None; D_ROWS],
            compute: vec![BitRow::zeros(lanes); 6],
            decoder,
            row_buffer: BitRow::zeros(lanes),
        }
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    pub fn row_buffer(&self) -> &BitRow {
        &self.row_buffer
    }

    /// Stored contents of a compute row, independent of wordline.
    pub fn compute_row(&self, row: ComputeRow) -> &BitRow {
        &self.compute[row.index()]
    }

    fn entry(&self, e: u8) -> Result<&[Wordline], SimError> {
        if (e as usize) < self.decoder.entries().len() {
            Ok(self.decoder.entry(e as usize))
        } else {
            Err(SimError::EntryOutOfRange(e))
        }
    }

    fn d_row(&self, r: u16) -> Result<BitRow, SimError> {
        match self.d_rows.get(r as usize) {
            Some(Some(row)) => Ok(row.clone()),
            Some(None) => Ok(BitRow::zeros(self.lanes)),
            None => Err(SimError::RowOutOfRange(r)),
        }
    }

    fn read_wordline(&self, w: Wordline) -> BitRow {
        let v = &self.compute[w.row.index()];
        if w.negated {
            v.not()
        } else {
            v.clone()
        }
    }

    fn write_wordline(&mut self, w: Wordline, value: &BitRow) {
        self.compute[w.row.index()] = if w.negated { value.not() } else { value.clone() };
    }

    /// First activation: what the sense amplifiers settle to. A triple
    /// resolves to the lane-wise majority and restores it into all three
    /// cells.
    fn sense(&mut self, addr: RowAddr) -> Result<BitRow, SimError> {
        match addr {
            RowAddr::D(r) => self.d_row(r),
            RowAddr::C0 => Ok(BitRow::zeros(self.lanes)),
            RowAddr::C1 => Ok(BitRow::ones(self.lanes)),
            RowAddr::B(e) => {
                let members = self.entry(e)?.to_vec();
                let vals: Vec<BitRow> = members.iter().map(|&w| self.read_wordline(w)).collect();
                match vals.len() {
                    1 => Ok(vals.into_iter().next().unwrap()),
                    2 => {
                        if vals[0] != vals[1] {
                            return Err(SimError::UnequalPair(e));
                        }
                        Ok(vals.into_iter().next().unwrap())
                    }
                    _ => {
                        let m = BitRow::maj(&vals[0], &vals[1], &vals[2]);
                        for w in members {
                            self.write_wordline(w, &m);
                        }
                        Ok(m)
                    }
                }
            }
        }
    }

    fn store(&mut self, addr: RowAddr, value: &BitRow) -> Result<(), SimError> {
        match addr {
            RowAddr::D(r) => {
                let slot = self.d_rows.get_mut(r as usize).ok_or(SimError::RowOutOfRange(r))?;
                *slot = Some(value.clone());
                Ok(())
            }
            RowAddr::C0 | RowAddr::C1 => Err(SimError::ConstantWrite(addr)),
            RowAddr::B(e) => {
                let members = self.entry(e)?.to_vec();
                for w in members {
                    self.write_wordline(w, value);
                }
                Ok(())
            }
        }
    }

    /// Number of physical rows raised by one activation of `addr`.
    pub fn activation_width(&self, addr: RowAddr) -> usize {
        match addr {
            RowAddr::B(e) => self.decoder.entries().get(e as usize).map_or(1, |x| x.len()),
            _ => 1,
        }
    }

    pub fn execute(&mut self, cmd: DramCommand) -> Result<(), SimError> {
        match cmd {
            DramCommand::Aap { dst, src } => {
                if matches!(dst, RowAddr::C0 | RowAddr::C1) {
                    return Err(SimError::ConstantWrite(dst));
                }
                let v = self.sense(src)?;
                self.store(dst, &v)?;
                self.row_buffer = v;
                Ok(())
            }
            DramCommand::Ap { addr } => {
                match addr {
                    RowAddr::B(e) if self.entry(e)?.len() == 3 => {}
                    _ => return Err(SimError::NotTriple(addr)),
                }
                self.row_buffer = self.sense(addr)?;
                Ok(())
            }
        }
    }

    fn single(&self, addr: RowAddr) -> Result<Option<Wordline>, SimError> {
        match addr {
            RowAddr::B(e) => {
                let m = self.entry(e)?;
                if m.len() != 1 {
                    return Err(SimError::MultiRow(addr));
                }
                Ok(Some(m[0]))
            }
            _ => Ok(None),
        }
    }

    /// Host-side read of a single row.
    pub fn read_row(&self, addr: RowAddr) -> Result<BitRow, SimError> {
        match self.single(addr)? {
            Some(w) => Ok(self.read_wordline(w)),
            None => match addr {
                RowAddr::D(r) => self.d_row(r),
                RowAddr::C0 => Ok(BitRow::zeros(self.lanes)),
                _ => Ok(BitRow::ones(self.lanes)),
            },
        }
    }

    /// Host-side write of a single row.
    pub fn write_row(&mut self, addr: RowAddr, bits: &BitRow) -> Result<(), SimError> {
        if bits.lanes() != self.lanes {
            return Err(SimError::LaneMismatch { got: bits.lanes(), want: self.lanes });
        }
        if matches!(addr, RowAddr::C0 | RowAddr::C1) {
            return Err(SimError::ConstantWrite(addr));
        }
        match self.single(addr)? {
            Some(w) => {
                self.write_wordline(w, bits);
                Ok(())
            }
            None => self.store(addr, bits),
        }
    }

    /// Text grid of the compute rows followed by every D row that has
    /// been written.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in ComputeRow::ALL {
            out.push_str(&format!("{}: {}\n", r, self.compute[r.index()]));
        }
        for (i, row) in self.d_rows.iter().enumerate() {
            if let Some(row) = row {
                out.push_str(&format!("D{i}: {row}\n"));
            }
        }
        out
    }
}

/// Independent subarrays driven in parallel.
#[derive(Clone, Debug)]
pub struct Bank {
    pub subarrays: Vec<Subarray>,
}

impl Bank {
    pub fn new(count: usize, lanes: usize) -> Self {
        assert!(count >= 1, "a bank needs at least one subarray");
        Bank { subarrays: (0..count).map(|_| Subarray::new(lanes)).collect() }
    }

    pub fn total_lanes(&self) -> usize {
        self.subarrays.iter().map(|s| s.lanes()).sum()
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Subarray {
        &mut self.subarrays[i]
    }
}
