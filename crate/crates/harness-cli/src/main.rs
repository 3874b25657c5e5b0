use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harness_cli::*;
use op_library::{build_program, Mode, OpKind};

#[derive(Parser)]
#[command(name = "simdram", about = "Bulk bit-serial operations on a simulated DRAM subarray")]
struct Cli {
    /// key=value file applied before the command line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one operation end to end and check it against the reference.
    Run {
        #[arg(long)]
        op: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimized against naive command counts and energy for all ops.
    Compare {
        #[arg(long, default_value_t = 32)]
        bits: u32,
        #[arg(long, default_value_t = 64)]
        lanes: usize,
        /// Machine-readable table written here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a kernel built from several operations.
    Kernel {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write the encoded μProgram of one operation.
    DumpUprogram {
        #[arg(long)]
        op: String,
        #[arg(long)]
        bits: u32,
        #[arg(long, default_value = "optimized")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the supported operations.
    Ops,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    elems: Option<usize>,
    #[arg(long)]
    lanes: Option<usize>,
    #[arg(long)]
    banks: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Machine-readable report written here.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), String> {
        let pairs = [
            ("bits", self.bits.map(|v| v.to_string())),
            ("elems", self.elems.map(|v| v.to_string())),
            ("lanes", self.lanes.map(|v| v.to_string())),
            ("banks", self.banks.map(|v| v.to_string())),
            ("mode", self.mode.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        Ok(())
    }
}

fn base_config(path: &Option<PathBuf>) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        cfg.apply_text(&text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(cfg)
}

fn finish(outcome: &RunOutcome, report: &Option<PathBuf>) -> Result<ExitCode, String> {
    print!("{}", render_human(&outcome.report));
    if let Some(p) = report {
        emit_report(p, &outcome.report, Format::Machine).map_err(|e| e.to_string())?;
    }
    let bad = outcome.mismatches();
    if bad.is_empty() {
        println!("  outputs     all {} match the reference", outcome.outputs.len());
        return Ok(ExitCode::SUCCESS);
    }
    println!("  outputs     {} of {} differ from the reference", bad.len(), outcome.outputs.len());
    for &i in bad.iter().take(8) {
        println!("    element {i}: got {:#x}, want {:#x}", outcome.outputs[i], outcome.expected[i]);
    }
    Ok(ExitCode::from(3))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    let mut cfg = base_config(&cli.config)?;
    match cli.cmd {
        Cmd::Run { op, common } => {
            if let Some(op) = op {
                cfg.set("op", &op)?;
            }
            common.apply(&mut cfg)?;
            let Target::Op(_) = cfg.target else {
                return Err("no operation given".into());
            };
            let outcome = run_operation(&cfg).map_err(|e| e.to_string())?;
            finish(&outcome, &common.report)
        }
        Cmd::Kernel { name, common } => {
            let kernel: Kernel = name.parse()?;
            common.apply(&mut cfg)?;
            let outcome = run_kernel(kernel, &cfg).map_err(|e| e.to_string())?;
            finish(&outcome, &common.report)
        }
        Cmd::Compare { bits, lanes, report } => {
            cfg.lanes = lanes;
            let t = compare_modes(&OpKind::ALL, bits, Mode::Optimized, Mode::AmbitNaive, &cfg).map_err(|e| e.to_string())?;
            print!("{}", render_ratio_human(&t));
            if let Some(p) = report {
                std::fs::write(&p, render_ratio_machine(&t)).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(if t.all_exact() { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Cmd::DumpUprogram { op, bits, mode, out } => {
            let kind: OpKind = op.parse()?;
            let p = build_program(kind, bits, parse_mode(&mode)?).map_err(|e| e.to_string())?;
            let bytes = p.encode().map_err(|e| e.to_string())?;
            std::fs::write(&out, &bytes).map_err(|e| format!("{}: {e}", out.display()))?;
            println!("{kind} {bits}-bit: {} μOps, {} bytes -> {}", p.len(), bytes.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Ops => {
            println!("{:<9} {:>5} {:<12} formula", "name", "arity", "class");
            for k in OpKind::ALL {
                let s = k.spec();
                println!("{:<9} {:>5} {:<12} {}", k.name(), s.arity, format!("{:?}", s.class), s.formula);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
