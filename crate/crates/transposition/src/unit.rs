use std::fmt::Write;

use subarray_sim::{BitRow, RowAddr, Subarray};

use crate::object::{h2v, v2h, SimdObject, DEFAULT_LINE_BITS};
use crate::tracker::{Handle, ObjectDescriptor, ObjectTracker};
use crate::TransposeError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranspositionStats {
    pub h2v_cycles: u64,
    pub v2h_cycles: u64,
    pub lines_written: u64,
    pub lines_read: u64,
    pub slices_written: u64,
    pub slices_read: u64,
    pub passthrough: u64,
}

impl TranspositionStats {
    pub fn cycles(&self) -> u64 {
        self.h2v_cycles + self.v2h_cycles
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Object { handle: Handle, element: usize },
    /// Not a tracked object: an ordinary memory access.
    PassThrough,
}

#[derive(Clone, Debug)]
pub struct TranspositionUnit {
    pub tracker: ObjectTracker,
    pub line_bits: usize,
    stats: TranspositionStats,
}

impl Default for TranspositionUnit {
    fn default() -> Self {
        Self::new(DEFAULT_LINE_BITS)
    }
}

impl TranspositionUnit {
    pub fn new(line_bits: usize) -> Self {
        TranspositionUnit { tracker: ObjectTracker::new(), line_bits, stats: TranspositionStats::default() }
    }

    pub fn stats(&self) -> TranspositionStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = TranspositionStats::default();
    }

    pub fn register(&mut self, d: ObjectDescriptor) -> Result<Handle, TransposeError> {
        self.tracker.register(d)
    }

    pub fn object(&self, h: Handle) -> Result<SimdObject, TransposeError> {
        let d = self.tracker.get(h).ok_or(TransposeError::UnknownHandle(h))?;
        Ok(SimdObject { base_row: d.base_row, element_bits: d.element_bits, element_count: d.size, line_bits: self.line_bits })
    }

    /// Classifies a host access; untracked addresses pass through.
    pub fn access(&mut self, addr: u64) -> Access {
        match self.tracker.lookup(addr) {
            Some((handle, element)) => Access::Object { handle, element },
            None => {
                self.stats.passthrough += 1;
                Access::PassThrough
            }
        }
    }

    /// Writes back every slice of the object: each slice's lines are
    /// transposed and stored together.
    pub fn store(&mut self, h: Handle, values: &[u64], sub: &mut Subarray) -> Result<(), TransposeError> {
        let obj = self.object(h)?;
        if values.len() != obj.element_count {
            return Err(TransposeError::Count { got: values.len(), want: obj.element_count });
        }
        let n = obj.element_bits;
        if let Some(&value) = values.iter().find(|&&v| n < 64 && v >> n != 0) {
            return Err(TransposeError::Overflow { value, bits: n });
        }
        if self.line_bits % n as usize != 0 {
            return Err(TransposeError::Width(n));
        }
        let lanes = sub.lanes();
        let chunks = obj.chunks(lanes);
        let mut rows: Vec<BitRow> = Vec::with_capacity(chunks * n as usize);
        for c in 0..chunks {
            for b in 0..n {
                let r = obj.base_row as usize + c * n as usize + b as usize;
                rows.push(sub.read_row(RowAddr::D(r as u16)).unwrap_or_else(|_| BitRow::zeros(lanes)));
            }
        }
        let per_line = obj.elements_per_line();
        for k in 0..obj.slice_count() {
            let first = k * obj.slice_elements();
            // n lines per slice, zero-padded past the last element
            for line_no in 0..n as usize {
                let mut line = vec![false; self.line_bits];
                for e in 0..per_line {
                    let j = first + line_no * per_line + e;
                    let v = values.get(j).copied().unwrap_or(0);
                    for bit in 0..n as usize {
                        line[e * n as usize + bit] = v >> bit & 1 == 1;
                    }
                }
                let cols = h2v(&line, n, self.line_bits)?;
                self.stats.h2v_cycles += 1;
                self.stats.lines_written += 1;
                for e in 0..per_line {
                    let j = first + line_no * per_line + e;
                    if j >= obj.element_count {
                        break;
                    }
                    for (bit, col) in cols.iter().enumerate() {
                        let (row, lane) = obj.position(j, bit as u32, lanes);
                        rows[row as usize - obj.base_row as usize].set(lane, col[e]);
                    }
                }
            }
            self.stats.slices_written += 1;
        }
        for (i, r) in rows.iter().enumerate() {
            sub.write_row(RowAddr::D(obj.base_row + i as u16), r)?;
        }
        Ok(())
    }

    /// Reads elements `[start, start+count)`; whole slices are fetched.
    pub fn fetch_range(&mut self, h: Handle, start: usize, count: usize, sub: &Subarray) -> Result<Vec<u64>, TransposeError> {
        let obj = self.object(h)?;
        let end = (start + count).min(obj.element_count);
        if start >= end {
            return Ok(Vec::new());
        }
        let n = obj.element_bits as usize;
        if self.line_bits % n != 0 {
            return Err(TransposeError::Width(n as u32));
        }
        let lanes = sub.lanes();
        let per_line = obj.elements_per_line();
        let mut out = vec![0u64; end - start];
        let mut row_cache: Vec<Option<BitRow>> = vec![None; obj.rows(lanes)];
        for k in start / obj.slice_elements()..=(end - 1) / obj.slice_elements() {
            let first = k * obj.slice_elements();
            for line_no in 0..n {
                let mut cols = vec![vec![false; per_line]; n];
                for e in 0..per_line {
                    let j = first + line_no * per_line + e;
                    if j >= obj.element_count {
                        break;
                    }
                    for (bit, col) in cols.iter_mut().enumerate() {
                        let (row, lane) = obj.position(j, bit as u32, lanes);
                        let idx = row as usize - obj.base_row as usize;
                        if row_cache[idx].is_none() {
                            row_cache[idx] = Some(sub.read_row(RowAddr::D(row))?);
                        }
                        col[e] = row_cache[idx].as_ref().unwrap().get(lane);
                    }
                }
                let line = v2h(&cols, self.line_bits)?;
                self.stats.v2h_cycles += 1;
                self.stats.lines_read += 1;
                for e in 0..per_line {
                    let j = first + line_no * per_line + e;
                    if j >= start && j < end {
                        let mut v = 0u64;
                        for bit in 0..n {
                            v |= (line[e * n + bit] as u64) << bit;
                        }
                        out[j - start] = v;
                    }
                }
            }
            self.stats.slices_read += 1;
        }
        Ok(out)
    }

    pub fn fetch(&mut self, h: Handle, sub: &Subarray) -> Result<Vec<u64>, TransposeError> {
        let count = self.object(h)?.element_count;
        self.fetch_range(h, 0, count, sub)
    }

    /// `element[j] = value` lines followed by the row map.
    pub fn dump(&mut self, h: Handle, sub: &Subarray) -> Result<String, TransposeError> {
        let obj = self.object(h)?;
        let vals = self.fetch(h, sub)?;
        let mut s = String::new();
        for (j, v) in vals.iter().enumerate() {
            let _ = writeln!(s, "element[{j}] = {v}");
        }
        let lanes = sub.lanes();
        for c in 0..obj.chunks(lanes) {
            let (lo, _) = obj.position(c * lanes, 0, lanes);
            let _ = writeln!(
                s,
                "chunk {c}: rows D{}..D{}, elements {}..{}",
                lo,
                lo as usize + obj.element_bits as usize - 1,
                c * lanes,
                ((c + 1) * lanes).min(obj.element_count) - 1
            );
        }
        Ok(s)
    }
}
