use std::fmt;

/// The six physical compute rows of the B-group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComputeRow {
    T0,
    T1,
    T2,
    T3,
    Dcc0,
    Dcc1,
}

impl ComputeRow {
    pub const ALL: [ComputeRow; 6] =
        [ComputeRow::T0, ComputeRow::T1, ComputeRow::T2, ComputeRow::T3, ComputeRow::Dcc0, ComputeRow::Dcc1];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> ComputeRow {
        Self::ALL[i]
    }

    /// Only dual-contact rows have an n-wordline.
    pub fn supports_negation(self) -> bool {
        matches!(self, ComputeRow::Dcc0 | ComputeRow::Dcc1)
    }

    pub fn name(self) -> &'static str {
        match self {
            ComputeRow::T0 => "T0",
            ComputeRow::T1 => "T1",
            ComputeRow::T2 => "T2",
            ComputeRow::T3 => "T3",
            ComputeRow::Dcc0 => "DCC0",
            ComputeRow::Dcc1 => "DCC1",
        }
    }
}

impl fmt::Display for ComputeRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A row reached through one of its wordlines. `negated` selects the
/// n-wordline of a DCC row, which reads and writes the complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wordline {
    pub row: ComputeRow,
    pub negated: bool,
}

impl Wordline {
    pub fn d(row: ComputeRow) -> Self {
        Wordline { row, negated: false }
    }

    pub fn n(row: ComputeRow) -> Self {
        assert!(row.supports_negation(), "{row} has no n-wordline");
        Wordline { row, negated: true }
    }
}

impl fmt::Display for Wordline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!{}", self.row)
        } else {
            write!(f, "{}", self.row)
        }
    }
}

pub const DECODER_ENTRIES: usize = 16;

/// The B-group address table: each entry raises one, two or three
/// wordlines at once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoder {
    entries: Vec<Vec<Wordline>>,
}

impl Default for Decoder {
    fn default() -> Self {
        use ComputeRow::*;
        let d = Wordline::d;
        let n = Wordline::n;
        Decoder::new(vec![
            vec![d(T0)],
            vec![d(T1)],
            vec![d(T2)],
            vec![d(T3)],
            vec![d(Dcc0)],
            vec![n(Dcc0)],
            vec![d(Dcc1)],
            vec![n(Dcc1)],
            vec![d(Dcc0), d(T2)],
            vec![d(T1), d(T3)],
            vec![d(T2), d(T3)],
            vec![d(Dcc0), d(Dcc1)],
            vec![d(T0), d(T1), d(T2)],
            vec![n(Dcc0), d(T1), d(T0)],
            vec![d(Dcc1), d(T2), d(T3)],
            vec![n(Dcc1), d(T2), d(T3)],
        ])
        .expect("default decoder is well formed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecoderError {
    #[error("decoder needs {DECODER_ENTRIES} entries, got {0}")]
    EntryCount(usize),
    #[error("entry B{0} has {1} wordlines; expected 1 to 3")]
    Width(usize, usize),
    #[error("entry B{0} raises the same row twice")]
    RepeatedRow(usize),
}

impl Decoder {
    pub fn new(entries: Vec<Vec<Wordline>>) -> Result<Self, DecoderError> {
        if entries.len() != DECODER_ENTRIES {
            return Err(DecoderError::EntryCount(entries.len()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.is_empty() || e.len() > 3 {
                return Err(DecoderError::Width(i, e.len()));
            }
            for (a, x) in e.iter().enumerate() {
                if e[a + 1..].iter().any(|y| y.row == x.row) {
                    return Err(DecoderError::RepeatedRow(i));
                }
            }
        }
        Ok(Decoder { entries })
    }

    pub fn entry(&self, i: usize) -> &[Wordline] {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Vec<Wordline>] {
        &self.entries
    }

    /// Entry whose wordline set equals `set` exactly (order ignored).
    pub fn find(&self, set: &[Wordline]) -> Option<usize> {
        self.entries.iter().position(|e| e.len() == set.len() && set.iter().all(|w| e.contains(w)))
    }

    pub fn triples(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.entries.len()).filter(|&i| self.entries[i].len() == 3)
    }

    pub fn format_entry(&self, i: usize) -> String {
        let parts: Vec<String> = self.entries[i].iter().map(|w| w.to_string()).collect();
        format!("B{i}={{{}}}", parts.join(","))
    }
}
