use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Abs,
    Add,
    Bitcount,
    Div,
    Max,
    Min,
    Mul,
    Relu,
    Sub,
    IfElse,
    AndRed,
    OrRed,
    XorRed,
    Eq,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatencyClass {
    Linear,
    Logarithmic,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpSpec {
    pub kind: OpKind,
    pub class: LatencyClass,
    /// Number of data operands, not counting the select of if_else.
    pub arity: u8,
    pub select: bool,
    pub signed: bool,
    pub formula: &'static str,
}

/// Command count the reference implementation reports for an op.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedCount {
    Exact(u64),
    /// Lower and upper bound.
    Band(u64, u64),
}

impl ExpectedCount {
    /// Whether `measured` lies within `pct` percent of the count; for a
    /// band the lower bound is relaxed downwards and the upper bound
    /// upwards.
    pub fn within(self, measured: u64, pct: u64) -> bool {
        let (lo, hi) = match self {
            ExpectedCount::Exact(v) => (v, v),
            ExpectedCount::Band(lo, hi) => (lo, hi),
        };
        measured * 100 >= lo * (100 - pct) && measured * 100 <= hi * (100 + pct)
    }

    pub fn upper(self) -> u64 {
        match self {
            ExpectedCount::Exact(v) | ExpectedCount::Band(_, v) => v,
        }
    }
}

impl fmt::Display for ExpectedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedCount::Exact(v) => write!(f, "{v}"),
            ExpectedCount::Band(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

pub const WIDTHS: [u32; 4] = [8, 16, 32, 64];

impl OpKind {
    pub const ALL: [OpKind; 16] = [
        OpKind::Abs,
        OpKind::Add,
        OpKind::Bitcount,
        OpKind::Div,
        OpKind::Max,
        OpKind::Min,
        OpKind::Mul,
        OpKind::Relu,
        OpKind::Sub,
        OpKind::IfElse,
        OpKind::AndRed,
        OpKind::OrRed,
        OpKind::XorRed,
        OpKind::Eq,
        OpKind::Gt,
        OpKind::Ge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Abs => "abs",
            OpKind::Add => "add",
            OpKind::Bitcount => "bitcount",
            OpKind::Div => "div",
            OpKind::Max => "max",
            OpKind::Min => "min",
            OpKind::Mul => "mul",
            OpKind::Relu => "relu",
            OpKind::Sub => "sub",
            OpKind::IfElse => "if_else",
            OpKind::AndRed => "and_red",
            OpKind::OrRed => "or_red",
            OpKind::XorRed => "xor_red",
            OpKind::Eq => "eq",
            OpKind::Gt => "gt",
            OpKind::Ge => "ge",
        }
    }

    /// bbop opcode; the position in `ALL`.
    pub fn opcode(self) -> u8 {
        OpKind::ALL.iter().position(|&k| k == self).unwrap() as u8
    }

    pub fn from_opcode(op: u8) -> Option<OpKind> {
        OpKind::ALL.get(op as usize).copied()
    }

    pub fn spec(self) -> OpSpec {
        use LatencyClass::*;
        use OpKind::*;
        let (class, arity, signed, formula) = match self {
            Abs => (Linear, 1, true, "10n-2"),
            Add => (Linear, 2, false, "8n+1"),
            Bitcount => (Linear, 1, false, "8n-8log2(n+1) .. 8n"),
            Div => (Quadratic, 2, false, "8n^2+12n"),
            Max => (Linear, 2, true, "10n+2"),
            Min => (Linear, 2, true, "10n+2"),
            Mul => (Quadratic, 2, false, "11n^2-5n-1"),
            Relu => (Linear, 1, true, "3n+((n-1) mod 2)"),
            Sub => (Linear, 2, false, "8n+1"),
            IfElse => (Linear, 2, false, "7n"),
            AndRed => (Logarithmic, 1, false, "5floor(n/2)+2"),
            OrRed => (Logarithmic, 1, false, "5floor(n/2)+2"),
            XorRed => (Logarithmic, 1, false, "6floor(n/2)+1"),
            Eq => (Linear, 2, false, "4n+3"),
            Gt => (Linear, 2, true, "3n+2"),
            Ge => (Linear, 2, true, "3n+2"),
        };
        OpSpec { kind: self, class, arity, select: self == IfElse, signed, formula }
    }

    /// Width in bits of one result element.
    pub fn result_bits(self, n: u32) -> u32 {
        match self {
            OpKind::AndRed | OpKind::OrRed | OpKind::XorRed | OpKind::Eq | OpKind::Gt | OpKind::Ge => 1,
            _ => n,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        let alias = match s.as_str() {
            "addition" => "add",
            "subtraction" => "sub",
            "division" => "div",
            "multiplication" => "mul",
            "and_reduction" => "and_red",
            "or_reduction" => "or_red",
            "xor_reduction" => "xor_red",
            "equal" => "eq",
            "greater" => "gt",
            "greater_equal" => "ge",
            other => other,
        };
        OpKind::ALL.into_iter().find(|k| k.name() == alias).ok_or_else(|| format!("unknown operation `{s}`"))
    }
}

/// Closed-form AAP/AP count per element chunk.
pub fn expected_aap_count(kind: OpKind, n: u32) -> ExpectedCount {
    let n = n as u64;
    let half = n / 2;
    ExpectedCount::Exact(match kind {
        OpKind::Abs => 10 * n - 2,
        OpKind::Add | OpKind::Sub => 8 * n + 1,
        OpKind::Bitcount => {
            let lower = (8 * n) as f64 - 8.0 * ((n + 1) as f64).log2();
            return ExpectedCount::Band(lower.floor().max(0.0) as u64, 8 * n);
        }
        OpKind::Div => 8 * n * n + 12 * n,
        OpKind::Max | OpKind::Min => 10 * n + 2,
        OpKind::Mul => (11 * n * n).saturating_sub(5 * n + 1),
        OpKind::Relu => 3 * n + (n + 1) % 2,
        OpKind::IfElse => 7 * n,
        OpKind::AndRed | OpKind::OrRed => 5 * half + 2,
        OpKind::XorRed => 6 * half + 1,
        OpKind::Eq => 4 * n + 3,
        OpKind::Gt | OpKind::Ge => 3 * n + 2,
    })
}

fn mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn signed(v: u64, n: u32) -> i64 {
    if n >= 64 {
        v as i64
    } else {
        ((v << (64 - n)) as i64) >> (64 - n)
    }
}

/// Reference result for one element. Operands are raw n-bit patterns;
/// signed ops read them as two's complement. `b` is ignored by unary
/// ops and `sel` by everything but if_else.
pub fn scalar_oracle(kind: OpKind, n: u32, a: u64, b: u64, sel: bool) -> u64 {
    scalar_oracle_as(kind, n, a, b, sel, kind.spec().signed)
}

/// `scalar_oracle` with the operand interpretation given explicitly.
pub fn scalar_oracle_as(kind: OpKind, n: u32, a: u64, b: u64, sel: bool, as_signed: bool) -> u64 {
    let m = mask(n);
    let (a, b) = (a & m, b & m);
    let (sa, sb) = if as_signed {
        (signed(a, n) as i128, signed(b, n) as i128)
    } else {
        (a as i128, b as i128)
    };
    let r = match kind {
        OpKind::Abs => sa.unsigned_abs() as u64,
        OpKind::Add => a.wrapping_add(b),
        OpKind::Sub => a.wrapping_sub(b),
        OpKind::Mul => a.wrapping_mul(b),
        OpKind::Div => a.checked_div(b).unwrap_or(m),
        OpKind::Bitcount => a.count_ones() as u64,
        OpKind::Max => if sa > sb { a } else { b },
        OpKind::Min => if sa < sb { a } else { b },
        OpKind::Relu => if sa >= 0 { a } else { 0 },
        OpKind::IfElse => if sel { a } else { b },
        OpKind::AndRed => (a == m) as u64,
        OpKind::OrRed => (a != 0) as u64,
        OpKind::XorRed => (a.count_ones() & 1) as u64,
        OpKind::Eq => (a == b) as u64,
        OpKind::Gt => (sa > sb) as u64,
        OpKind::Ge => (sa >= sb) as u64,
    };
    r & mask(kind.result_bits(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert_eq!(expected_aap_count(OpKind::Add, 32), ExpectedCount::Exact(257));
        assert_eq!(expected_aap_count(OpKind::Gt, 16), ExpectedCount::Exact(50));
        assert_eq!(expected_aap_count(OpKind::Mul, 8), ExpectedCount::Exact(663));
        assert_eq!(expected_aap_count(OpKind::Relu, 8), ExpectedCount::Exact(25));
        assert_eq!(expected_aap_count(OpKind::Relu, 7), ExpectedCount::Exact(21));
        assert_eq!(expected_aap_count(OpKind::Bitcount, 8), ExpectedCount::Band(38, 64));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(scalar_oracle(OpKind::Relu, 8, (-5i64) as u64, 0, false), 0);
        assert_eq!(scalar_oracle_as(OpKind::Max, 8, 3, 200, false, false), 200);
        assert_eq!(scalar_oracle(OpKind::Max, 8, 3, 200, false), 3);
        assert_eq!(scalar_oracle(OpKind::Add, 8, 250, 10, false), 4);
        assert_eq!(scalar_oracle(OpKind::Div, 8, 7, 0, false), 255);
        assert_eq!(scalar_oracle(OpKind::Abs, 8, 0x80, 0, false), 0x80);
        assert_eq!(scalar_oracle(OpKind::Sub, 64, 0, 1, false), u64::MAX);
    }

    #[test]
    fn within_window() {
        let e = ExpectedCount::Exact(100);
        assert!(e.within(120, 20) && e.within(80, 20));
        assert!(!e.within(121, 20) && !e.within(79, 20));
        assert!(ExpectedCount::Band(38, 64).within(76, 20));
    }

    #[test]
    fn names_round_trip() {
        for k in OpKind::ALL {
            assert_eq!(k.name().parse::<OpKind>().unwrap(), k);
            assert_eq!(OpKind::from_opcode(k.opcode()), Some(k));
        }
        assert_eq!("greater_equal".parse::<OpKind>().unwrap(), OpKind::Ge);
    }
}
