use op_library::{expected_aap_count, ExpectedCount, Mode, OpKind};

use crate::config::{RunConfig, Target};
use crate::run::run_operation;
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub op: OpKind,
    pub formula: &'static str,
    pub expected: ExpectedCount,
    /// Commands for one chunk in the baseline and the compared mode.
    pub base_count: u64,
    pub other_count: u64,
    pub base_energy: f64,
    pub other_energy: f64,
    /// Both runs matched the reference.
    pub exact: bool,
}

impl RatioRow {
    pub fn count_ratio(&self) -> f64 {
        self.other_count as f64 / self.base_count as f64
    }

    pub fn energy_ratio(&self) -> f64 {
        self.other_energy / self.base_energy
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioTable {
    pub n: u32,
    pub base: Mode,
    pub other: Mode,
    pub rows: Vec<RatioRow>,
}

impl RatioTable {
    pub fn mean_count_ratio(&self) -> f64 {
        geomean(self.rows.iter().map(RatioRow::count_ratio))
    }

    pub fn mean_energy_ratio(&self) -> f64 {
        geomean(self.rows.iter().map(RatioRow::energy_ratio))
    }

    pub fn all_exact(&self) -> bool {
        self.rows.iter().all(|r| r.exact)
    }
}

pub fn geomean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, k) = xs.into_iter().fold((0.0, 0usize), |(s, k), x| (s + x.ln(), k + 1));
    if k == 0 {
        1.0
    } else {
        (sum / k as f64).exp()
    }
}

/// Runs each op over one chunk in both modes. Ratios are `other / base`,
/// so with the optimized mode as base they read as the speedup and the
/// energy saving of optimization.
pub fn compare_modes(ops: &[OpKind], n: u32, base: Mode, other: Mode, cfg: &RunConfig) -> Result<RatioTable, HarnessError> {
    let mut rows = Vec::with_capacity(ops.len());
    for &op in ops {
        let run = |mode| {
            let c = RunConfig { target: Target::Op(op), n, mode, elements: cfg.lanes, banks: 1, ..cfg.clone() };
            run_operation(&c)
        };
        let b = run(base)?;
        let o = if other == base { b.clone() } else { run(other)? };
        rows.push(RatioRow {
            op,
            formula: op.spec().formula,
            expected: expected_aap_count(op, n),
            base_count: b.report.commands(),
            other_count: o.report.commands(),
            base_energy: b.report.energy,
            other_energy: o.report.energy,
            exact: b.is_exact() && o.is_exact(),
        });
    }
    Ok(RatioTable { n, base, other, rows })
}
