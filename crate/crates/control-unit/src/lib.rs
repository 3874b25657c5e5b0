//! Memory-controller extension that queues bbop instructions, keeps the
//! most recently used μPrograms in a scratchpad and steps them against a
//! subarray, one data chunk per loop iteration.

mod unit;

pub use unit::*;
