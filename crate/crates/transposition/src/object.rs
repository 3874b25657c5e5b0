use crate::TransposeError;

pub const DEFAULT_LINE_BITS: usize = 512;

/// Geometry of a vertically stored object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimdObject {
    pub base_row: u16,
    pub element_bits: u32,
    pub element_count: usize,
    pub line_bits: usize,
}

impl SimdObject {
    pub fn new(base_row: u16, element_bits: u32, element_count: usize) -> Self {
        SimdObject { base_row, element_bits, element_count, line_bits: DEFAULT_LINE_BITS }
    }

    /// Elements per slice; a slice is `element_bits` lines.
    pub fn slice_elements(&self) -> usize {
        self.line_bits
    }

    pub fn slice_count(&self) -> usize {
        self.element_count.div_ceil(self.slice_elements())
    }

    pub fn elements_per_line(&self) -> usize {
        self.line_bits / self.element_bits as usize
    }

    pub fn chunks(&self, lanes: usize) -> usize {
        self.element_count.div_ceil(lanes)
    }

    pub fn rows(&self, lanes: usize) -> usize {
        self.chunks(lanes) * self.element_bits as usize
    }

    /// Row and lane holding bit `bit` of element `j`.
    pub fn position(&self, j: usize, bit: u32, lanes: usize) -> (u16, usize) {
        let chunk = j / lanes;
        let row = self.base_row as usize + chunk * self.element_bits as usize + bit as usize;
        (row as u16, j % lanes)
    }
}

/// Bits of an `n`-bit horizontal line, `line.len()/n` elements packed
/// LSB first, rearranged so that result[j][e] is bit j of element e.
pub fn h2v(line: &[bool], n: u32, line_bits: usize) -> Result<Vec<Vec<bool>>, TransposeError> {
    if line.len() != line_bits {
        return Err(TransposeError::LineLength { got: line.len(), want: line_bits });
    }
    if n == 0 || line_bits % n as usize != 0 {
        return Err(TransposeError::Width(n));
    }
    let n = n as usize;
    let per = line_bits / n;
    Ok((0..n).map(|j| (0..per).map(|e| line[e * n + j]).collect()).collect())
}

pub fn v2h(cols: &[Vec<bool>], line_bits: usize) -> Result<Vec<bool>, TransposeError> {
    let n = cols.len();
    if n == 0 || line_bits % n != 0 {
        return Err(TransposeError::Width(n as u32));
    }
    let per = line_bits / n;
    if let Some(c) = cols.iter().find(|c| c.len() != per) {
        return Err(TransposeError::LineLength { got: c.len() * n, want: line_bits });
    }
    let mut line = vec![false; line_bits];
    for (j, c) in cols.iter().enumerate() {
        for (e, &b) in c.iter().enumerate() {
            line[e * n + j] = b;
        }
    }
    Ok(line)
}

/// Two's-complement encoding of `v` in `n` bits.
pub fn from_signed(v: i64, n: u32) -> u64 {
    if n >= 64 {
        v as u64
    } else {
        (v as u64) & ((1u64 << n) - 1)
    }
}

pub fn sign_extend(raw: u64, n: u32) -> i64 {
    if n >= 64 {
        raw as i64
    } else {
        let s = 64 - n;
        ((raw << s) as i64) >> s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_fill_row_zero() {
        let mut line = vec![false; 512];
        for e in 0..64 {
            line[e * 8] = true;
        }
        let cols = h2v(&line, 8, 512).unwrap();
        assert!(cols[0].iter().all(|&b| b));
        assert!(cols[1..].iter().all(|c| c.iter().all(|&b| !b)));
    }

    #[test]
    fn zero_line_gives_zero_columns() {
        let cols = h2v(&vec![false; 512], 16, 512).unwrap();
        assert_eq!(cols.len(), 16);
        assert!(cols.iter().flatten().all(|&b| !b));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(h2v(&[false; 100], 8, 512), Err(TransposeError::LineLength { .. })));
    }

    #[test]
    fn signed_roundtrip() {
        for n in [8, 16, 32, 64] {
            for v in [-1i64, -128, 0, 5, 127] {
                assert_eq!(sign_extend(from_signed(v, n), n), v);
            }
        }
    }
}
