use std::str::FromStr;

use op_library::{Mode, OpKind};

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Timing {
    pub t_aap_ns: u64,
    pub t_ap_ns: u64,
    /// Cost of one line through the transposition unit.
    pub t_transpose_ns: u64,
}

impl Default for Timing {
    fn default() -> Self {
        // 2*tRAS + tRP and tRAS + tRP for tRAS = 32, tRP = 14.
        Timing { t_aap_ns: 78, t_ap_ns: 46, t_transpose_ns: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    pub e_act: f64,
    /// Extra cost of each row raised beyond the first, relative to e_act.
    pub extra_row_factor: f64,
    pub e_precharge: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams { e_act: 1.0, extra_row_factor: 0.22, e_precharge: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Op(OpKind),
    Kernel(Kernel),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Brightness,
    TableScan,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Brightness => "brightness",
            Kernel::TableScan => "table_scan",
        }
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "brightness" => Ok(Kernel::Brightness),
            "table_scan" | "table-scan" => Ok(Kernel::TableScan),
            _ => Err(format!("unknown kernel `{s}`")),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.to_ascii_lowercase().as_str() {
        "optimized" | "opt" => Ok(Mode::Optimized),
        "naive" | "ambit" | "ambitnaive" | "ambit_naive" => Ok(Mode::AmbitNaive),
        _ => Err(format!("unknown mode `{s}`")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub target: Target,
    pub n: u32,
    pub elements: usize,
    pub lanes: usize,
    pub banks: usize,
    pub mode: Mode,
    pub timing: Timing,
    pub energy: EnergyParams,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            target: Target::Op(OpKind::Add),
            n: 8,
            elements: 1024,
            lanes: 1024,
            banks: 1,
            mode: Mode::Optimized,
            timing: Timing::default(),
            energy: EnergyParams::default(),
            seed: 1,
        }
    }
}

impl RunConfig {
    pub fn op(kind: OpKind, n: u32, elements: usize, lanes: usize) -> Self {
        RunConfig { target: Target::Op(kind), n, elements, lanes, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.banks == 0 {
            return Err(HarnessError::Config("banks must be at least 1".into()));
        }
        if self.lanes == 0 || self.lanes > subarray_sim::MAX_LANES {
            return Err(HarnessError::Config(format!("lanes must be in 1..={}", subarray_sim::MAX_LANES)));
        }
        if self.elements == 0 {
            return Err(HarnessError::Config("element count must be positive".into()));
        }
        if !op_library::WIDTHS.contains(&self.n) {
            return Err(HarnessError::Config(format!("unsupported width {}", self.n)));
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// skipped; unknown keys are an error.
    pub fn apply_text(&mut self, text: &str) -> Result<(), HarnessError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| HarnessError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad number `{v}`"))
        }
        match key {
            "op" => self.target = Target::Op(value.parse()?),
            "kernel" => self.target = Target::Kernel(value.parse()?),
            "bits" | "n" => self.n = num(value)?,
            "elems" | "elements" => self.elements = num(value)?,
            "lanes" => self.lanes = num(value)?,
            "banks" => self.banks = num(value)?,
            "mode" => self.mode = parse_mode(value)?,
            "seed" => self.seed = num(value)?,
            "t_aap" => self.timing.t_aap_ns = num(value)?,
            "t_ap" => self.timing.t_ap_ns = num(value)?,
            "t_transpose" => self.timing.t_transpose_ns = num(value)?,
            "e_act" => self.energy.e_act = num(value)?,
            "extra_row_factor" => self.energy.extra_row_factor = num(value)?,
            "e_precharge" => self.energy.e_precharge = num(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# sweep\nop = mul\nbits=16\n\nbanks = 4\nmode=naive\nt_aap = 80 # slower part\n").unwrap();
        assert_eq!(c.target, Target::Op(OpKind::Mul));
        assert_eq!((c.n, c.banks, c.mode, c.timing.t_aap_ns), (16, 4, Mode::AmbitNaive, 80));
        assert_eq!(c.timing.t_ap_ns, 46);
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("bits").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("bits = eight").is_err());
    }

    #[test]
    fn zero_banks_rejected() {
        let c = RunConfig { banks: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
