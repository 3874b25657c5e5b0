use std::fmt;

/// One row of bits, one bit per lane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    lanes: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(lanes: usize) -> Self {
        BitRow { lanes, words: vec![0; lanes.div_ceil(64)] }
    }

    pub fn ones(lanes: usize) -> Self {
        let mut r = BitRow { lanes, words: vec![!0; lanes.div_ceil(64)] };
        r.mask_tail();
        r
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut r = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            r.set(i, b);
        }
        r
    }

    pub fn from_words(lanes: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), lanes.div_ceil(64));
        let mut r = BitRow { lanes, words };
        r.mask_tail();
        r
    }

    fn mask_tail(&mut self) {
        let rem = self.lanes % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, lane: usize) -> bool {
        assert!(lane < self.lanes);
        self.words[lane / 64] >> (lane % 64) & 1 == 1
    }

    pub fn set(&mut self, lane: usize, bit: bool) {
        assert!(lane < self.lanes);
        let m = 1u64 << (lane % 64);
        if bit {
            self.words[lane / 64] |= m;
        } else {
            self.words[lane / 64] &= !m;
        }
    }

    pub fn not(&self) -> BitRow {
        let mut r = BitRow { lanes: self.lanes, words: self.words.iter().map(|w| !w).collect() };
        r.mask_tail();
        r
    }

    pub fn maj(a: &BitRow, b: &BitRow, c: &BitRow) -> BitRow {
        let words = a
            .words
            .iter()
            .zip(&b.words)
            .zip(&c.words)
            .map(|((x, y), z)| (x & y) | (x & z) | (y & z))
            .collect();
        BitRow { lanes: a.lanes, words }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Display for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.lanes {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({self})")
    }
}
