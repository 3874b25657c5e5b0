//! AND/OR and majority-inverter graphs, the algebraic rewrite rules over
//! majority graphs, and the optimizer that turns an AND/OR bit-slice
//! into a small majority graph.

mod graph;
mod optimize;
mod rebuild;
mod rules;

pub use graph::{random_mig, Edge, GraphError, GraphKind, LogicGraph, Node, Op, Source, TruthTable};
pub use optimize::{
    build_naive_mig, optimize, reduce_nodes, reshape, resubstitute, DEFAULT_RESHAPE_BUDGET, DEFAULT_ROUNDS,
};
pub use rules::{apply_rule, bindings, bindings_at, Binding, Direction, RewriteRule, RuleError, RuleName};
