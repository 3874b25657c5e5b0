//! End-to-end runs of bulk operations and kernels over simulated banks,
//! the count-based latency and energy model, and the optimized versus
//! naive comparison.

mod compare;
mod config;
mod energy;
mod kernels;
mod report;
mod run;

pub use compare::{compare_modes, geomean, RatioRow, RatioTable};
pub use config::{parse_mode, EnergyParams, Kernel, RunConfig, Target, Timing};
pub use energy::{activation_energy, energy_model};
pub use kernels::{brightness_oracle, run_kernel, run_kernel_with, table_scan_oracle, KernelInputs};
pub use report::{emit_report, render_human, render_machine, render_ratio_human, render_ratio_machine, Format};
pub use run::{operands, program_memory_for, run_operation, run_operation_with, BankReport, BankState, RunOutcome, StatsReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("program build: {0}")]
    Build(#[from] op_library::OpError),
    #[error("transposition: {0}")]
    Layout(#[from] transposition::TransposeError),
    #[error("control unit: {0}")]
    Execute(#[from] control_unit::CuError),
    #[error("subarray: {0}")]
    Sim(#[from] subarray_sim::SimError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
