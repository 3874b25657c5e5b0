//! The sixteen bulk operations: bit-slice circuits, loop skeletons,
//! reference semantics and the command counts they are expected to hit.

mod programs;
mod registry;
mod slice;
mod slices;

pub use programs::{build_op_graph, build_program, program_memory, OpGraph};
pub use registry::{
    expected_aap_count, scalar_oracle, scalar_oracle_as, ExpectedCount, LatencyClass, OpKind, OpSpec, WIDTHS,
};
pub use slice::{check_slice, compile_fixed, compile_mig, compile_slice, d, single_entry, to_mig, Loc, Mode, Slice, SliceCode};
pub use slices::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpError {
    #[error("element width {0} is not supported")]
    Width(u32),
    #[error(transparent)]
    Graph(#[from] logic_graph::GraphError),
    #[error(transparent)]
    Alloc(#[from] row_allocator::AllocError),
    #[error(transparent)]
    Translate(#[from] uprogram::TranslateError),
    #[error(transparent)]
    Program(#[from] uprogram::ProgramError),
    #[error(transparent)]
    Sim(#[from] subarray_sim::SimError),
    #[error("compiled slice disagrees with its circuit")]
    SliceMismatch,
    #[error("no schedule found for slice")]
    NoSchedule,
}
