//! Command-line front end.
//!
//! Exit codes: 0 success, 1 inconsistent problem or failed check, 2 usage or
//! parse error, 3 timeout or box limit.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchSpec, Family};
use crate::decompose::dump;
use crate::expr::Problem;
use crate::parser::parse;
use crate::propagate::{AgendaOrder, Propagator, Stats, Strategy};
use crate::revise::{hc4_revise, verify_directional, Store};
use crate::solve::{branch_and_prune, SolveOptions, SolveStatus};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INCONSISTENT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hcsolve", version, about = "Interval constraint propagation and branch-and-prune solving")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find all solution boxes of a problem.
    Solve(SolveArgs),
    /// Run benchmark families and write CSV.
    Bench(BenchArgs),
    /// Propagate, then check quiescence and directional consistency per constraint.
    Verify(VerifyArgs),
    /// Print the decomposition of every constraint.
    Dump(DumpArgs),
}

#[derive(Args, Debug)]
pub struct Input {
    /// Model file in the modeling language.
    #[arg(required_unless_present = "family", conflicts_with = "family")]
    pub file: Option<PathBuf>,
    /// Use a generated benchmark instead of a file.
    #[arg(long, requires = "n")]
    pub family: Option<Family>,
    /// Benchmark size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Fold constant subexpressions before decomposition.
    #[arg(long)]
    pub fold_constants: bool,
}

impl Input {
    fn load(&self) -> Result<Problem, String> {
        let p = match (&self.file, self.family, self.n) {
            (Some(path), _, _) => {
                let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                parse(&src).map_err(|e| format!("{}: {e}", path.display()))?
            }
            (None, Some(f), Some(n)) => f.generate(n),
            _ => return Err("no input given".into()),
        };
        Ok(if self.fold_constants { p.fold_constants() } else { p })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Order {
    Fifo,
    Lifo,
}

impl From<Order> for AgendaOrder {
    fn from(o: Order) -> AgendaOrder {
        match o {
            Order::Fifo => AgendaOrder::Fifo,
            Order::Lifo => AgendaOrder::Lifo,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value = "hc4")]
    pub method: Strategy,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub eps: f64,
    /// Seconds; 0 means no limit.
    #[arg(long, default_value_t = 0.0)]
    pub timeout: f64,
    #[arg(long)]
    pub max_boxes: Option<usize>,
    #[arg(long, value_enum, default_value = "fifo")]
    pub order: Order,
    /// Print the decomposition before solving.
    #[arg(long)]
    pub dump_decomposition: bool,
    /// Reserved; the search is deterministic and ignores it.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub family: Vec<Family>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "hc3,hc3sb,hc4,hc4sb")]
    pub methods: Vec<Strategy>,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub eps: f64,
    /// Seconds per run; 0 means no limit.
    #[arg(long, default_value_t = 0.0)]
    pub timeout: f64,
    #[arg(long)]
    pub fold_constants: bool,
    /// Exponent of the second sum in more_cosnard.
    #[arg(long, default_value_t = 3)]
    pub cosnard_exponent: u32,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the HC3/HC4 projection ratios.
    #[arg(long)]
    pub ratios_out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value = "hc4")]
    pub method: Strategy,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[command(flatten)]
    pub input: Input,
    /// Print the model in the modeling language instead.
    #[arg(long)]
    pub model: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn limit(seconds: f64) -> Option<Duration> {
    (seconds > 0.0).then(|| Duration::from_secs_f64(seconds))
}

/// Runs the CLI with explicit arguments and output streams; returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Dump(a) => dump_cmd(a, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    ExitCode::from(run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock()))
}

fn io_err(e: io::Error) -> String {
    e.to_string()
}

fn solve_cmd(a: SolveArgs, out: &mut dyn Write) -> Result<u8, String> {
    let p = a.input.load()?;
    if a.dump_decomposition {
        write!(out, "{}", dump(&p)).map_err(io_err)?;
    }
    let opts = SolveOptions {
        eps: a.eps,
        timeout: limit(a.timeout),
        max_boxes: a.max_boxes,
        order: a.order.into(),
    };
    let r = branch_and_prune(&p, a.method, &opts, &p.domains);
    let sols = r.solutions();
    for (i, b) in sols.iter().enumerate() {
        write!(out, "solution {}:", i + 1).map_err(io_err)?;
        for (k, d) in b.iter().enumerate() {
            write!(out, " {}={}", p.names[k], d).map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    writeln!(out, "status={}", r.status).map_err(io_err)?;
    writeln!(out, "method={}", a.method).map_err(io_err)?;
    writeln!(out, "solutions={}", sols.len()).map_err(io_err)?;
    writeln!(out, "boxes={}", r.boxes.len()).map_err(io_err)?;
    writeln!(out, "explored={}", r.explored).map_err(io_err)?;
    writeln!(out, "{}", r.stats).map_err(io_err)?;
    Ok(match r.status {
        SolveStatus::Complete if sols.is_empty() => EXIT_INCONSISTENT,
        SolveStatus::Complete => EXIT_OK,
        SolveStatus::Timeout | SolveStatus::BoxLimit => EXIT_TIMEOUT,
    })
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write) -> Result<u8, String> {
    let mut specs = Vec::new();
    for &family in &a.family {
        for &n in &a.sizes {
            specs.push(BenchSpec {
                methods: a.methods.clone(),
                eps: a.eps,
                timeout: limit(a.timeout),
                fold_constants: a.fold_constants,
                cosnard_exponent: a.cosnard_exponent,
                ..BenchSpec::new(family, n)
            });
        }
    }
    let rows = bench::run_suite(&specs);
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            bench::write_csv(&rows, f).map_err(|e| e.to_string())?;
        }
        None => bench::write_csv(&rows, &mut *out).map_err(|e| e.to_string())?,
    }
    if let Some(path) = &a.ratios_out {
        let f = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        bench::write_ratio_csv(&bench::ratios(&rows), f).map_err(|e| e.to_string())?;
    }
    Ok(if rows.iter().any(|r| r.status != SolveStatus::Complete) { EXIT_TIMEOUT } else { EXIT_OK })
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> Result<u8, String> {
    let p = a.input.load()?;
    let prop = Propagator::new(&p, a.method);
    let mut state = prop.initial_state(&p.domains);
    if !prop.propagate(&mut state, &mut Stats::default()) {
        writeln!(out, "inconsistent").map_err(io_err)?;
        return Ok(EXIT_INCONSISTENT);
    }
    let quiescent = prop.is_fixed_point(&state);
    let d = prop.project_state(&state);
    let mut all = quiescent;
    writeln!(out, "fixed point: {}", if quiescent { "PASS" } else { "FAIL" }).map_err(io_err)?;
    for (i, dec) in prop.decompositions().iter().enumerate() {
        let mut probe = d.clone();
        let mut fresh = Vec::new();
        let ok = hc4_revise(dec, &mut probe, &mut fresh, &mut Stats::default(), &mut Vec::new())
            && verify_directional(&dec.primitives, &dec.gamma_prime, &Store::new(&mut probe, &mut fresh));
        all &= ok;
        writeln!(out, "constraint {}: {}", i, if ok { "PASS" } else { "FAIL" }).map_err(io_err)?;
    }
    writeln!(out, "box: {d}").map_err(io_err)?;
    Ok(if all { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn dump_cmd(a: DumpArgs, out: &mut dyn Write) -> Result<u8, String> {
    let p = a.input.load()?;
    let text = if a.model { p.to_string() } else { dump(&p) };
    write!(out, "{text}").map_err(io_err)?;
    Ok(EXIT_OK)
}
