//! Conversion between the CPU's horizontal layout and the vertical
//! layout used in DRAM, plus the object tracker that tells the two apart.

mod object;
mod tracker;
mod unit;

pub use object::{from_signed, h2v, sign_extend, v2h, SimdObject, DEFAULT_LINE_BITS};
pub use tracker::{Handle, ObjectDescriptor, ObjectTracker, RowArena, TRACKER_CAPACITY};
pub use unit::{Access, TranspositionStats, TranspositionUnit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransposeError {
    #[error("line has {got} bits, expected {want}")]
    LineLength { got: usize, want: usize },
    #[error("element width {0} does not divide the line")]
    Width(u32),
    #[error("value {value:#x} does not fit in {bits} bits")]
    Overflow { value: u64, bits: u32 },
    #[error("expected {want} values, got {got}")]
    Count { got: usize, want: usize },
    #[error("object tracker is full")]
    TrackerFull,
    #[error("object overlaps an existing one")]
    Overlap,
    #[error("unknown object handle {0}")]
    UnknownHandle(u32),
    #[error("out of D-group rows: need {need}, {left} left")]
    OutOfRows { need: usize, left: usize },
    #[error(transparent)]
    Sim(#[from] subarray_sim::SimError),
}
