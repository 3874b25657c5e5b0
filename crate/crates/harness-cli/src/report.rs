use std::fmt::Write as _;
use std::path::Path;

use crate::compare::RatioTable;
use crate::run::StatsReport;
use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `key=value` lines with fixed field names.
    Machine,
    Human,
}

/// `key=value` lines. Floats are printed with a fixed number of digits
/// so equal runs give equal bytes.
pub fn render_machine(r: &StatsReport) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("label", r.label.clone());
    kv("mode", r.mode.name().into());
    kv("n", r.n.to_string());
    kv("elements", r.elements.to_string());
    kv("lanes", r.lanes.to_string());
    kv("banks", r.banks.len().to_string());
    kv("total_lanes", r.total_lanes().to_string());
    kv("aap", r.aap.to_string());
    kv("ap", r.ap.to_string());
    kv("commands", r.commands().to_string());
    kv("iterations", r.iterations.to_string());
    kv("latency_ns", r.latency_ns.to_string());
    kv("energy", format!("{:.6}", r.energy));
    kv("throughput", format!("{:.6}", r.throughput));
    kv("throughput_per_energy", format!("{:.6}", r.throughput_per_energy));
    if let Some((formula, expected, measured)) = r.formula {
        kv("formula", formula.into());
        kv("expected_per_chunk", expected.to_string());
        kv("measured_per_chunk", measured.to_string());
    }
    for b in &r.banks {
        let p = format!("bank.{}", b.bank);
        kv(&format!("{p}.elements"), b.elements.to_string());
        kv(&format!("{p}.aap"), b.exec.aap.to_string());
        kv(&format!("{p}.ap"), b.exec.ap.to_string());
        kv(&format!("{p}.iterations"), b.exec.iterations.to_string());
        kv(&format!("{p}.transposition_cycles"), b.transposition.cycles().to_string());
        kv(&format!("{p}.latency_ns"), b.latency_ns.to_string());
        kv(&format!("{p}.energy"), format!("{:.6}", b.energy));
    }
    s
}

pub fn render_human(r: &StatsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({}-bit, {}), {} elements on {} bank(s) x {} lanes", r.label, r.n, r.mode.name(), r.elements, r.banks.len(), r.lanes);
    let _ = writeln!(s, "  commands    {} ({} AAP, {} AP) over {} iterations", r.commands(), r.aap, r.ap, r.iterations);
    if let Some((formula, expected, measured)) = r.formula {
        let _ = writeln!(s, "  per chunk   {measured} measured, {expected} from {formula}");
    }
    let _ = writeln!(s, "  latency     {} ns", r.latency_ns);
    let _ = writeln!(s, "  energy      {:.3}", r.energy);
    let _ = writeln!(s, "  throughput  {:.3e} elem/s, {:.3} elem/energy", r.throughput, r.throughput_per_energy);
    if r.banks.len() > 1 {
        let _ = writeln!(s, "  {:>5} {:>9} {:>10} {:>8} {:>12} {:>12}", "bank", "elements", "commands", "iters", "latency_ns", "energy");
        for b in &r.banks {
            let _ = writeln!(
                s,
                "  {:>5} {:>9} {:>10} {:>8} {:>12} {:>12.3}",
                b.bank,
                b.elements,
                b.exec.commands(),
                b.exec.iterations,
                b.latency_ns,
                b.energy
            );
        }
    }
    s
}

pub fn render_ratio_machine(t: &RatioTable) -> String {
    let mut s = format!("# n={} base={} other={}\nop,formula,expected,{},{},count_ratio,energy_ratio,exact\n", t.n, t.base.name(), t.other.name(), t.base.name(), t.other.name());
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{:.6},{}",
            r.op,
            r.formula,
            r.expected,
            r.base_count,
            r.other_count,
            r.count_ratio(),
            r.energy_ratio(),
            r.exact
        );
    }
    let _ = writeln!(s, "geomean,,,,,{:.6},{:.6},{}", t.mean_count_ratio(), t.mean_energy_ratio(), t.all_exact());
    s
}

pub fn render_ratio_human(t: &RatioTable) -> String {
    let mut s = format!(
        "{:<9} {:<20} {:>9} {:>10} {:>10} {:>7} {:>7}\n",
        "op",
        "formula",
        "expected",
        t.base.name(),
        t.other.name(),
        "count",
        "energy"
    );
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{:<9} {:<20} {:>9} {:>10} {:>10} {:>7.3} {:>7.3}{}",
            r.op.name(),
            r.formula,
            r.expected.to_string(),
            r.base_count,
            r.other_count,
            r.count_ratio(),
            r.energy_ratio(),
            if r.exact { "" } else { "  MISMATCH" }
        );
    }
    let _ = writeln!(s, "{:<9} {:<20} {:>9} {:>10} {:>10} {:>7.3} {:>7.3}", "geomean", "", "", "", "", t.mean_count_ratio(), t.mean_energy_ratio());
    s
}

pub fn emit_report(path: &Path, r: &StatsReport, format: Format) -> Result<(), HarnessError> {
    let text = match format {
        Format::Machine => render_machine(r),
        Format::Human => render_human(r),
    };
    std::fs::write(path, text)?;
    Ok(())
}
