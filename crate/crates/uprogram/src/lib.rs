//! μOp programs for the in-DRAM control unit: translation of an
//! allocated majority graph into row copies and activations, copy
//! merging, loop construction and the 2-byte binary encoding.

mod builder;
mod coalesce;
mod exec;
mod op;
mod program;
mod translate;

pub use builder::{check_carried, loopify, loopify_with, LoopError, LoopShape, LoopSpec, ProgramBuilder};
pub use coalesce::{coalesce, coalesce_with, exact_cover};
pub use exec::{resolve, run_straight, to_command, RegFile};
pub use op::*;
pub use program::{decode_op, encode_op, MicroProgram, ProgramError, MAX_OPS};
pub use translate::{d_operand, translate, translate_with, TranslateError};
