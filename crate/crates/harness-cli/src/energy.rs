use control_unit::ExecutionStats;

use crate::config::EnergyParams;

/// Energy of one activation raising `rows` rows at once.
pub fn activation_energy(rows: usize, p: &EnergyParams) -> f64 {
    p.e_act * (1.0 + p.extra_row_factor * (rows.max(1) - 1) as f64)
}

/// Sum over every activation and precharge the run issued. An AAP
/// contributes its source and destination activations separately.
pub fn energy_model(stats: &ExecutionStats, p: &EnergyParams) -> f64 {
    let act: f64 = (1..4).map(|rows| stats.activations_by_rows[rows] as f64 * activation_energy(rows, p)).sum();
    act + stats.precharges() as f64 * p.e_precharge
}
