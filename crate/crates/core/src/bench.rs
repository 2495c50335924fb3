//! Benchmark families and the experiment harness.
//!
//! Generators write the modeling language and parse it, so every instance
//! can also be dumped to a file and solved from the command line.

use std::fmt::{self, Write as _};
use std::io;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;

use crate::expr::Problem;
use crate::parser::parse;
use crate::propagate::Strategy;
use crate::solve::{branch_and_prune, SolveOptions, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Bratu,
    BroydenBanded,
    MoreCosnard,
    Feigenbaum,
    FeigenbaumFactored,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Bratu, Family::BroydenBanded, Family::MoreCosnard, Family::Feigenbaum, Family::FeigenbaumFactored];

    pub fn name(self) -> &'static str {
        match self {
            Family::Bratu => "bratu",
            Family::BroydenBanded => "broyden_banded",
            Family::MoreCosnard => "more_cosnard",
            Family::Feigenbaum => "feigenbaum",
            Family::FeigenbaumFactored => "feigenbaum_factored",
        }
    }

    pub fn generate(self, n: usize) -> Problem {
        match self {
            Family::Bratu => bratu(n),
            Family::BroydenBanded => broyden_banded(n),
            Family::MoreCosnard => more_cosnard(n),
            Family::Feigenbaum => feigenbaum(n),
            Family::FeigenbaumFactored => feigenbaum_factored(n),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Family, String> {
        let key = s.replace('-', "_").to_ascii_lowercase();
        Family::ALL.into_iter().find(|f| f.name() == key).ok_or_else(|| {
            format!("unknown family `{s}` (expected bratu, broyden_banded, more_cosnard, feigenbaum or feigenbaum_factored)")
        })
    }
}

fn build(src: String) -> Problem {
    parse(&src).unwrap_or_else(|e| panic!("generated model does not parse: {e}\n{src}"))
}

/// Discretized Bratu problem: `n` interior points plus the two zero
/// boundary values.
pub fn bratu(n: usize) -> Problem {
    assert!(n >= 1, "bratu needs n >= 1");
    let mut s = String::new();
    writeln!(s, "var x0 in [0, 0];").unwrap();
    for k in 1..=n {
        writeln!(s, "var x{k} in [-1e8, 1e8];").unwrap();
    }
    writeln!(s, "var x{} in [0, 0];", n + 1).unwrap();
    let h2 = (n + 1) * (n + 1);
    writeln!(s, "x0 = 0;").unwrap();
    for k in 1..=n {
        writeln!(s, "x{} - 2*x{k} + x{} + exp(x{k})/{h2} = 0;", k - 1, k + 1).unwrap();
    }
    writeln!(s, "x{} = 0;", n + 1).unwrap();
    build(s)
}

/// Index set `J_k` of the banded Broyden system (1-based).
pub fn broyden_band(n: usize, k: usize) -> Vec<usize> {
    (k.saturating_sub(5).max(1)..=(k + 1).min(n)).filter(|&j| j != k).collect()
}

pub fn broyden_banded(n: usize) -> Problem {
    assert!(n >= 2, "broyden_banded needs n >= 2");
    let mut s = String::new();
    for k in 1..=n {
        writeln!(s, "var x{k} in [-1e8, 1e8];").unwrap();
    }
    for k in 1..=n {
        write!(s, "x{k}*(2 + 5*x{k}^2) + 1").unwrap();
        for j in broyden_band(n, k) {
            write!(s, " - x{j}*(1 + x{j})").unwrap();
        }
        writeln!(s, " = 0;").unwrap();
    }
    build(s)
}

/// Grid point `t_j = j/(n+1)` as an exact fraction.
pub fn more_cosnard_t(n: usize, j: usize) -> (usize, usize) {
    (j, n + 1)
}

/// Moré-Cosnard integral equation with exponent 3 in both sums.
pub fn more_cosnard(n: usize) -> Problem {
    more_cosnard_with(n, 3)
}

/// Moré-Cosnard with the exponent of the second sum chosen by the caller.
pub fn more_cosnard_with(n: usize, second_exponent: u32) -> Problem {
    assert!(n >= 2, "more_cosnard needs n >= 2");
    let m = n + 1;
    let mut s = String::new();
    for k in 1..=n {
        writeln!(s, "var x{k} in [-1e8, 0];").unwrap();
    }
    for k in 1..=n {
        let term = |j: usize| format!("(x{j} + {}/{m})", j + m);
        let first: Vec<String> = (1..=k).map(|j| format!("{j}/{m}*{}^3", term(j))).collect();
        let second: Vec<String> =
            (k + 1..=n).map(|j| format!("{}/{m}*{}^{second_exponent}", m - j, term(j))).collect();
        write!(s, "x{k} + 0.5*({}/{m}*({})", m - k, first.join(" + ")).unwrap();
        if !second.is_empty() {
            write!(s, " + {k}/{m}*({})", second.join(" + ")).unwrap();
        }
        writeln!(s, ") = 0;").unwrap();
    }
    build(s)
}

/// Cyclic logistic-map system.
pub fn feigenbaum(n: usize) -> Problem {
    assert!(n >= 2, "feigenbaum needs n >= 2");
    let mut s = String::new();
    for k in 1..=n {
        writeln!(s, "var x{k} in [0, 100];").unwrap();
    }
    for k in 1..=n {
        let next = k % n + 1;
        writeln!(s, "-3.84*x{k}^2 + 3.84*x{k} - x{next} = 0;").unwrap();
    }
    build(s)
}

/// The same system with every constraint written so that each variable
/// occurs once: `3.84 x (1 - x) = 0.96 - 3.84 (x - 0.5)^2`.
pub fn feigenbaum_factored(n: usize) -> Problem {
    assert!(n >= 2, "feigenbaum_factored needs n >= 2");
    let mut s = String::new();
    for k in 1..=n {
        writeln!(s, "var x{k} in [0, 100];").unwrap();
    }
    for k in 1..=n {
        let next = k % n + 1;
        writeln!(s, "0.96 - 3.84*(x{k} - 0.5)^2 = x{next};").unwrap();
    }
    build(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub family: Family,
    pub n: usize,
    pub methods: Vec<Strategy>,
    pub eps: f64,
    pub timeout: Option<Duration>,
    pub fold_constants: bool,
    /// Exponent of the second sum for [`Family::MoreCosnard`].
    pub cosnard_exponent: u32,
}

impl BenchSpec {
    pub fn new(family: Family, n: usize) -> BenchSpec {
        BenchSpec {
            family,
            n,
            methods: Strategy::ALL.to_vec(),
            eps: 1e-8,
            timeout: None,
            fold_constants: false,
            cosnard_exponent: 3,
        }
    }

    pub fn problem(&self) -> Problem {
        let p = match self.family {
            Family::MoreCosnard => more_cosnard_with(self.n, self.cosnard_exponent),
            f => f.generate(self.n),
        };
        if self.fold_constants {
            p.fold_constants()
        } else {
            p
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub family: Family,
    pub n: usize,
    pub method: Strategy,
    pub status: SolveStatus,
    pub solutions: usize,
    pub projections: usize,
    pub revise_calls: usize,
    pub enqueues: usize,
    pub seconds: f64,
    /// Largest per-constraint node count of the instance.
    pub nodes: usize,
}

/// Projection ratio between two methods on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub family: Family,
    pub n: usize,
    pub nodes: usize,
    pub pair: &'static str,
    pub ratio: f64,
}

pub const CSV_HEADER: [&str; 9] =
    ["family", "n", "method", "status", "solutions", "projections", "revise_calls", "enqueues", "seconds"];
pub const RATIO_HEADER: [&str; 5] = ["family", "n", "nodes", "pair", "ratio"];

/// Solves every (instance, method) pair, in parallel across runs.
pub fn run_suite(specs: &[BenchSpec]) -> Vec<BenchRow> {
    let jobs: Vec<(&BenchSpec, Strategy)> =
        specs.iter().flat_map(|s| s.methods.iter().map(move |&m| (s, m))).collect();
    jobs.par_iter().map(|&(spec, method)| run_one(spec, method)).collect()
}

pub fn run_one(spec: &BenchSpec, method: Strategy) -> BenchRow {
    let p = spec.problem();
    let opts = SolveOptions { eps: spec.eps, timeout: spec.timeout, ..SolveOptions::default() };
    let r = branch_and_prune(&p, method, &opts, &p.domains);
    BenchRow {
        family: spec.family,
        n: spec.n,
        method,
        status: r.status,
        solutions: r.solution_count(),
        projections: r.stats.projections,
        revise_calls: r.stats.revise_calls,
        enqueues: r.stats.enqueues,
        seconds: r.stats.wall_time.as_secs_f64(),
        nodes: p.max_node_count(),
    }
}

/// HC3/HC4 and HC3sb/HC4sb projection ratios for every instance where both
/// runs completed.
pub fn ratios(rows: &[BenchRow]) -> Vec<RatioRow> {
    let mut out = Vec::new();
    let find = |f: Family, n: usize, m: Strategy| {
        rows.iter().find(|r| r.family == f && r.n == n && r.method == m && r.status == SolveStatus::Complete)
    };
    let mut seen = Vec::new();
    for r in rows {
        if seen.contains(&(r.family, r.n)) {
            continue;
        }
        seen.push((r.family, r.n));
        for (pair, a, b) in [
            ("hc3/hc4", Strategy::Hc3, Strategy::Hc4),
            ("hc3sb/hc4sb", Strategy::Hc3Sb, Strategy::Hc4Sb),
        ] {
            if let (Some(x), Some(y)) = (find(r.family, r.n, a), find(r.family, r.n, b)) {
                out.push(RatioRow {
                    family: r.family,
                    n: r.n,
                    nodes: r.nodes,
                    pair,
                    ratio: x.projections as f64 / y.projections.max(1) as f64,
                });
            }
        }
    }
    out
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        wr.write_record([
            r.family.name().to_string(),
            r.n.to_string(),
            r.method.name().to_string(),
            r.status.to_string(),
            r.solutions.to_string(),
            r.projections.to_string(),
            r.revise_calls.to_string(),
            r.enqueues.to_string(),
            format!("{:.6}", r.seconds),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_ratio_csv<W: io::Write>(rows: &[RatioRow], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RATIO_HEADER)?;
    for r in rows {
        wr.write_record([
            r.family.name().to_string(),
            r.n.to_string(),
            r.nodes.to_string(),
            r.pair.to_string(),
            format!("{:.6}", r.ratio),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
