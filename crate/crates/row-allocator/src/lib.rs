//! Binds the operands of every majority node to the six compute rows,
//! phase by phase, and records the copy and triple-activation schedule
//! that realises the binding.
//!
//! Copies that feed a phase are hoisted ahead of its first triple
//! activation, so copies from the same source can later be merged into
//! one multi-row write. Placement is greedy: among ready nodes, every
//! triple entry and operand order is costed (new copies after merging,
//! plus the activation and any result copies) and the cheapest wins.

mod allocate;
mod types;
mod validate;

pub use allocate::{allocate, allocate_with, Allocator};
pub use subarray_sim::{ComputeRow, Decoder, Wordline};
pub use types::{
    AllocEntry, AllocError, AllocationMap, Bindings, CopyDst, CopySrc, DRef, InputLoc, OutputSink, PhaseSchedule,
    RowCopy, Step,
};
pub use validate::{validate_allocation, validate_allocation_with, ValidationReport};
