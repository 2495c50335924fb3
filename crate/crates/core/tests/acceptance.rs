//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{Float, ToPrimitive};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hcsolve::bench::{self, Family};
use hcsolve::decompose::{decompose, Decomposition, PrimOp, Primitive, Slot};
use hcsolve::expr::{BinaryOp, Constraint, Expr, UnaryOp};
use hcsolve::interval::Interval;
use hcsolve::propagate::{bounds_consistency, bounds_consistency_with, AgendaOrder, Propagator, Stats, Strategy};
use hcsolve::revise::{hc4_revise, verify_directional, Store};
use hcsolve::solve::{branch_and_prune, certify, SolveOptions};
use hcsolve::{IntervalBox, Problem, VarId};

const SOUNDNESS_SAMPLES: usize = 100_000;
const SOUNDNESS_BUDGET: Duration = Duration::from_secs(10);
const RANDOM_TREES: usize = 200;
const MAX_TREE_DEPTH: usize = 6;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(30);
const AGREEMENT_ULPS: u64 = 1;
const AGREEMENT_BUDGET: Duration = Duration::from_secs(60);
const SOLVE_EPS: f64 = 1e-8;
const SOLVER_BUDGET: Duration = Duration::from_secs(600);
const FLAT_RATIO_SPREAD: f64 = 2.0;

type Outcome = Result<String, String>;

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("interval soundness", c1_interval_soundness),
        ("hc4revise equals the primitive fixed point", c2_equivalence),
        ("directional consistency after hc4revise", c3_directional),
        ("projection budget", c4_budget),
        ("fixed-point agreement across methods", c5_agreement),
        ("solver agreement and certification", c6_solver),
        ("projection ratio trends", c7_ratios),
        ("admissible form needs fewer projections", c8_factored),
        ("fifo and lifo agendas agree", c9_confluence),
        ("decomposition dump snapshot", c10_snapshot),
    ];
    // numeric arguments select criteria, e.g. `-- 1 7`
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {} failed", ran - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

/// Exact binary fraction `m * 2^e`.
#[derive(Clone, Debug)]
struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    fn of(x: f64) -> Dyadic {
        if x == 0.0 {
            return Dyadic { m: BigInt::from(0), e: 0 };
        }
        let (mant, exp, sign) = x.integer_decode();
        Dyadic { m: BigInt::from(sign as i64 * mant as i64), e: exp as i64 }
    }

    fn one() -> Dyadic {
        Dyadic { m: BigInt::from(1), e: 0 }
    }

    fn align(&self, o: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.e.min(o.e);
        (&self.m << (self.e - e) as usize, &o.m << (o.e - e) as usize, e)
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        let (a, b, e) = self.align(o);
        Dyadic { m: a + b, e }
    }

    fn sub(&self, o: &Dyadic) -> Dyadic {
        let (a, b, e) = self.align(o);
        Dyadic { m: a - b, e }
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic { m: &self.m * &o.m, e: self.e + o.e }
    }

    fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    fn cmp(&self, o: &Dyadic) -> Ordering {
        let (a, b, _) = self.align(o);
        a.cmp(&b)
    }

    fn is_negative(&self) -> bool {
        self.m.sign() == Sign::Minus
    }
}

/// Exact value `num / den` with `den > 0`.
#[derive(Clone, Debug)]
struct Exact {
    num: Dyadic,
    den: Dyadic,
}

impl Exact {
    fn dyadic(num: Dyadic) -> Exact {
        Exact { num, den: Dyadic::one() }
    }

    fn quotient(x: f64, y: f64) -> Exact {
        let (n, d) = (Dyadic::of(x), Dyadic::of(y));
        if d.is_negative() {
            Exact { num: n.neg(), den: d.neg() }
        } else {
            Exact { num: n, den: d }
        }
    }

    /// Ordering of the float `f` relative to this value.
    fn cmp_float(&self, f: f64) -> Ordering {
        Dyadic::of(f).mul(&self.den).cmp(&self.num)
    }

    fn approx(&self) -> f64 {
        // keep 64 significant bits so the scaling stays in range
        let f = |d: &Dyadic| {
            let drop = d.m.bits().saturating_sub(64);
            let m = (&d.m >> drop as usize).to_f64().unwrap();
            m * 2f64.powi((d.e + drop as i64).clamp(-2000, 2000) as i32)
        };
        f(&self.num) / f(&self.den)
    }
}

fn contains_exact(iv: Interval, q: &Exact) -> bool {
    !iv.is_empty()
        && (iv.lo() == f64::NEG_INFINITY || q.cmp_float(iv.lo()) != Ordering::Greater)
        && (iv.hi() == f64::INFINITY || q.cmp_float(iv.hi()) != Ordering::Less)
}

/// Smallest float interval around a value, given a float near it and the
/// ordering of any float relative to it.
fn tight_by(f: f64, cmp: impl Fn(f64) -> Ordering) -> Interval {
    let mut lo = f;
    while cmp(lo) == Ordering::Greater {
        lo = lo.next_down();
    }
    let mut hi = f;
    while cmp(hi) == Ordering::Less {
        hi = hi.next_up();
    }
    Interval::new(lo, hi)
}

fn tight(q: &Exact) -> Interval {
    tight_by(q.approx(), |g| q.cmp_float(g))
}

/// Tightest enclosure of `sqrt(x)`, `x >= 0`.
fn tight_sqrt(x: f64) -> Interval {
    let qx = Dyadic::of(x);
    tight_by(x.sqrt(), |g| if g < 0.0 { Ordering::Less } else { Dyadic::of(g).mul(&Dyadic::of(g)).cmp(&qx) })
}

/// Interval around a libm result whose error is below one ulp.
fn around(v: f64, clamp: Option<(f64, f64)>) -> Interval {
    let (lo, hi) = (v.next_down(), v.next_up());
    match clamp {
        Some((a, b)) => Interval::new(lo.max(a), hi.min(b)),
        None => Interval::new(lo, hi),
    }
}

fn sample(rng: &mut StdRng, max_exp: i32) -> f64 {
    match rng.gen_range(0..20) {
        0 => 0.0,
        1 => rng.gen_range(-8i32..=8) as f64,
        _ => {
            let m: f64 = rng.gen_range(1.0..2.0);
            let e = rng.gen_range(-max_exp..=max_exp);
            let s = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            s * m * 2f64.powi(e)
        }
    }
}

/// A random interval containing `p`.
fn around_point(rng: &mut StdRng, p: f64, max_exp: i32) -> Interval {
    match rng.gen_range(0..10) {
        0 => Interval::point(p),
        1 => Interval::new(f64::NEG_INFINITY, p.max(sample(rng, max_exp))),
        2 => Interval::new(p.min(sample(rng, max_exp)), f64::INFINITY),
        3..=5 => {
            let w = p.abs().max(1.0) * rng.gen_range(0.0..1e-3);
            Interval::new(p - w, p + w)
        }
        _ => {
            let q = sample(rng, max_exp);
            Interval::new(p.min(q), p.max(q))
        }
    }
}

fn widen(rng: &mut StdRng, iv: Interval) -> Interval {
    if rng.gen_bool(0.5) {
        return iv;
    }
    let w = iv.hi().abs().max(iv.lo().abs()).max(1.0) * rng.gen_range(0.0..0.5);
    Interval::new(iv.lo() - w * rng.gen_range(0.0..1.0), iv.hi() + w * rng.gen_range(0.0..1.0))
}

fn pow_exact(x: f64, n: u32) -> Exact {
    let d = Dyadic::of(x);
    Exact::dyadic((1..n).fold(d.clone(), |acc, _| acc.mul(&d)))
}

// ---------------------------------------------------------------- criterion 1

fn c1_interval_soundness() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let mut report = |name: &str, ok: bool, detail: &dyn Fn() -> String| {
        if !ok && violations.len() < 5 {
            violations.push(format!("{name}: {}", detail()));
        }
    };

    for _ in 0..SOUNDNESS_SAMPLES {
        let (x, y) = (sample(&mut rng, 60), sample(&mut rng, 60));
        let (xi, yi) = (around_point(&mut rng, x, 60), around_point(&mut rng, y, 60));
        let (qx, qy) = (Dyadic::of(x), Dyadic::of(y));
        let sum = Exact::dyadic(qx.add(&qy));
        let diff = Exact::dyadic(qx.sub(&qy));
        let prod = Exact::dyadic(qx.mul(&qy));
        report("add", contains_exact(xi + yi, &sum), &|| format!("{xi} + {yi}"));
        report("sub", contains_exact(xi - yi, &diff), &|| format!("{xi} - {yi}"));
        report("mul", contains_exact(xi * yi, &prod), &|| format!("{xi} * {yi}"));
        report("neg", contains_exact(-xi, &Exact::dyadic(qx.neg())), &|| format!("-{xi}"));
        if y != 0.0 {
            let quo = Exact::quotient(x, y);
            report("div", contains_exact(xi / yi, &quo), &|| format!("{xi} / {yi}"));
        }
        let n = rng.gen_range(2..=5);
        let s = sample(&mut rng, 40);
        let si = around_point(&mut rng, s, 40);
        report("pow", contains_exact(si.pow_int(n), &pow_exact(s, n)), &|| format!("{si}^{n}"));
        let a = x.abs();
        let ai = around_point(&mut rng, a, 60).intersect(Interval::POSITIVE);
        let r = ai.sqrt();
        let sqrt_ok = !r.is_empty() && tight_sqrt(a).subset_of(r);
        report("sqrt", sqrt_ok, &|| format!("sqrt {ai}"));
        let e: f64 = rng.gen_range(-700.0..700.0);
        let ei = around_point(&mut rng, e, 9).intersect(Interval::new(-700.0, 700.0));
        let ev = if e == 0.0 { Interval::point(1.0) } else { around(e.exp(), None) };
        report("exp", ev.subset_of(ei.exp()), &|| format!("exp {ei} at {e}"));
        let c: f64 = rng.gen_range(-1e6..1e6) * if rng.gen_bool(0.5) { 1e-6 } else { 1.0 };
        let ci = around_point(&mut rng, c, 20);
        let cv = if c == 0.0 { Interval::point(1.0) } else { around(c.cos(), Some((-1.0, 1.0))) };
        report("cos", cv.subset_of(ci.cos()), &|| format!("cos {ci} at {c}"));
        checks += 9;
    }

    // projections of every primitive operator onto every operand
    let ops = [
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mul,
        PrimOp::Div,
        PrimOp::Neg,
        PrimOp::Exp,
        PrimOp::Cos,
        PrimOp::Sqrt,
        PrimOp::Pow(2),
        PrimOp::Pow(3),
        PrimOp::Pow(4),
    ];
    for op in ops {
        let arity = op.arity();
        let inputs: Vec<Slot> = (0..arity).map(|i| Slot::Var(VarId(i))).collect();
        let prim = Primitive::new(op, inputs, Slot::Var(VarId(arity)));
        for _ in 0..SOUNDNESS_SAMPLES {
            let x = match op {
                PrimOp::Exp => rng.gen_range(-700.0..700.0),
                PrimOp::Cos => rng.gen_range(-1e3..1e3),
                PrimOp::Sqrt => sample(&mut rng, 60).abs(),
                PrimOp::Pow(_) => sample(&mut rng, 40),
                _ => sample(&mut rng, 60),
            };
            let y = sample(&mut rng, 60);
            if op == PrimOp::Div && y == 0.0 {
                continue;
            }
            let z = match op {
                PrimOp::Add => tight(&Exact::dyadic(Dyadic::of(x).add(&Dyadic::of(y)))),
                PrimOp::Sub => tight(&Exact::dyadic(Dyadic::of(x).sub(&Dyadic::of(y)))),
                PrimOp::Mul => tight(&Exact::dyadic(Dyadic::of(x).mul(&Dyadic::of(y)))),
                PrimOp::Div => tight(&Exact::quotient(x, y)),
                PrimOp::Neg => Interval::point(-x),
                PrimOp::Exp if x == 0.0 => Interval::point(1.0),
                PrimOp::Exp => around(x.exp(), Some((0.0, f64::INFINITY))),
                PrimOp::Cos if x == 0.0 => Interval::point(1.0),
                PrimOp::Cos => around(x.cos(), Some((-1.0, 1.0))),
                PrimOp::Sqrt => tight_sqrt(x),
                PrimOp::Pow(n) => tight(&pow_exact(x, n)),
            };
            let mut vals = vec![around_point(&mut rng, x, 60)];
            if arity == 2 {
                vals.push(around_point(&mut rng, y, 60));
            }
            vals.push(widen(&mut rng, z));
            let point = [x, y];
            for pos in 0..prim.width() {
                let r = prim.project(pos, &vals);
                let ok = if pos == arity {
                    z.subset_of(r)
                } else {
                    r.contains(point[pos])
                };
                report(&format!("{op:?} onto {pos}"), ok, &|| format!("{vals:?} -> {r}"));
                checks += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    check(violations.is_empty(), || format!("{} violations, e.g. {}", violations.len(), violations.join("; ")))?;
    check(elapsed < SOUNDNESS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{checks} containment checks, 0 violations"))
}

// ---------------------------------------------------------------- criterion 2-4

/// Fixed point of all projections of a decomposition, iterated round-robin
/// until nothing changes. Returns the final variable box and the number of
/// projections applied.
fn chaotic_fixed_point(dec: &Decomposition, d: &IntervalBox) -> (IntervalBox, usize) {
    let mut vars = d.clone();
    let mut fresh = dec.initial_fresh();
    let mut count = 0;
    loop {
        let mut changed = false;
        for prim in &dec.primitives {
            for pos in 0..prim.width() {
                let slot = prim.slot(pos);
                if matches!(slot, Slot::Const(_)) {
                    continue;
                }
                let store = Store::new(&mut vars, &mut fresh);
                let vals: Vec<Interval> = (0..prim.width()).map(|q| store.get(prim.slot(q))).collect();
                let new = prim.project(pos, &vals);
                count += 1;
                if new != vals[pos] {
                    changed = true;
                    match slot {
                        Slot::Var(v) => vars[v] = new,
                        Slot::Fresh(i) => fresh[i] = new,
                        Slot::Const(_) => unreachable!(),
                    }
                    if new.is_empty() {
                        return (vars.empty_like(), count);
                    }
                }
            }
        }
        if !changed {
            return (vars, count);
        }
    }
}

struct TreeGen {
    rng: StdRng,
    next_var: usize,
    max_vars: usize,
}

impl TreeGen {
    fn leaf(&mut self) -> Expr {
        if self.next_var < self.max_vars && self.rng.gen_bool(0.75) {
            self.next_var += 1;
            Expr::Var(VarId(self.next_var - 1))
        } else {
            let c: f64 = self.rng.gen_range(-4i32..=4) as f64 * 0.5;
            Expr::Const(Interval::point(c))
        }
    }

    fn tree(&mut self, depth: usize) -> Expr {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return self.leaf();
        }
        match self.rng.gen_range(0..12) {
            0..=1 => Expr::binary(BinaryOp::Add, self.tree(depth - 1), self.tree(depth - 1)),
            2..=3 => Expr::binary(BinaryOp::Sub, self.tree(depth - 1), self.tree(depth - 1)),
            4..=5 => Expr::binary(BinaryOp::Mul, self.tree(depth - 1), self.tree(depth - 1)),
            6 => Expr::binary(BinaryOp::Div, self.tree(depth - 1), self.tree(depth - 1)),
            7 => Expr::unary(UnaryOp::Neg, self.tree(depth - 1)),
            8 => Expr::unary(UnaryOp::Exp, self.tree(depth - 1)),
            9 => Expr::unary(UnaryOp::Cos, self.tree(depth - 1)),
            10 => Expr::unary(UnaryOp::Sqrt, self.tree(depth - 1)),
            _ => Expr::pow(self.tree(depth - 1), self.rng.gen_range(2..=3)),
        }
    }
}

/// Whether every divisor in `e` has a range over `d` that excludes zero.
fn divisors_nonzero(e: &Expr, d: &IntervalBox) -> bool {
    match e {
        Expr::Var(_) | Expr::Const(_) => true,
        Expr::Unary(_, a) | Expr::Pow(a, _) => divisors_nonzero(a, d),
        Expr::Binary(op, a, b) => {
            (*op != BinaryOp::Div || !b.evaluate(d).contains(0.0)) && divisors_nonzero(a, d) && divisors_nonzero(b, d)
        }
    }
}

/// Random admissible constraints, each with a box that contains a solution
/// and no divisor that can vanish on it.
fn random_cases() -> Vec<(Constraint, IntervalBox)> {
    let mut gen = TreeGen { rng: StdRng::seed_from_u64(0x5eed_0002), next_var: 0, max_vars: 10 };
    let mut out = Vec::new();
    while out.len() < RANDOM_TREES {
        gen.next_var = 0;
        let lhs = gen.tree(MAX_TREE_DEPTH - 1);
        let rhs = gen.tree(MAX_TREE_DEPTH - 2);
        let n = gen.next_var;
        if n == 0 {
            continue;
        }
        let point: Vec<f64> = (0..n).map(|_| gen.rng.gen_range(0.05..2.0)).collect();
        let at = IntervalBox::new(point.iter().map(|&x| Interval::point(x)).collect());
        let gap = lhs.evaluate(&at) - rhs.evaluate(&at);
        if gap.is_empty() || !gap.is_bounded() || gap.width() > 1e-6 {
            continue;
        }
        // shift so that the sampled point is a solution
        let rhs = Expr::binary(BinaryOp::Add, rhs, Expr::Const(gap));
        let c = Constraint::new(lhs, rhs);
        let dom: IntervalBox = point
            .iter()
            .map(|&x| {
                let w = gen.rng.gen_range(0.1..4.0);
                Interval::new(x - w * gen.rng.gen_range(0.0..1.0), x + w * gen.rng.gen_range(0.0..1.0))
            })
            .collect();
        if c.is_admissible() && divisors_nonzero(&c.lhs, &dom) && divisors_nonzero(&c.rhs, &dom) {
            out.push((c, dom));
        }
    }
    out
}

fn parabola() -> Problem {
    hcsolve::parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap()
}

/// The parabola constraint, feigenbaum_factored(8) and the random trees.
fn equivalence_cases() -> Vec<(String, Constraint, IntervalBox)> {
    let mut cases = Vec::new();
    let p = parabola();
    cases.push(("2*x = z - y^2".to_string(), p.constraints[0].clone(), p.domains.clone()));
    let f = bench::feigenbaum_factored(8);
    for (i, c) in f.constraints.iter().enumerate() {
        cases.push((format!("feigenbaum_factored(8) #{i}"), c.clone(), f.domains.clone()));
    }
    for (i, (c, d)) in random_cases().into_iter().enumerate() {
        cases.push((format!("random tree #{i}"), c, d));
    }
    cases
}

fn run_hc4(dec: &Decomposition, d: &IntervalBox) -> (IntervalBox, Vec<Interval>, Stats, bool) {
    let mut out = d.clone();
    let mut fresh = Vec::new();
    let mut stats = Stats::default();
    let ok = hc4_revise(dec, &mut out, &mut fresh, &mut stats, &mut Vec::new());
    (out, fresh, stats, ok)
}

fn c2_equivalence() -> Outcome {
    let started = Instant::now();
    let cases = equivalence_cases();
    let mut narrowed = 0;
    for (name, c, d) in &cases {
        let dec = decompose(c);
        let (hc4, _, _, ok) = run_hc4(&dec, d);
        let (oracle, _) = chaotic_fixed_point(&dec, d);
        let same = if ok { hc4 == oracle } else { oracle.is_empty() };
        check(same, || {
            let names: Vec<String> = (0..d.len()).map(|i| format!("v{i}")).collect();
            let p = Problem { names, domains: d.clone(), constraints: vec![c.clone()] };
            format!("{name}: {p}hc4revise {hc4} vs fixed point {oracle}")
        })?;
        if ok && hc4 != *d {
            narrowed += 1;
        }
    }
    let elapsed = started.elapsed();
    check(elapsed < EQUIVALENCE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{} constraints identical bound for bound ({narrowed} narrowed)", cases.len()))
}

fn c3_directional() -> Outcome {
    let cases = equivalence_cases();
    for (name, c, d) in &cases {
        let dec = decompose(c);
        let (mut out, mut fresh, _, ok) = run_hc4(&dec, d);
        if !ok {
            continue;
        }
        let store = Store::new(&mut out, &mut fresh);
        check(verify_directional(&dec.primitives, &dec.gamma_prime, &store), || {
            format!("{name}: not directional consistent")
        })?;
    }
    Ok(format!("{} constraints directionally consistent w.r.t. gamma'", cases.len()))
}

fn c4_budget() -> Outcome {
    let cases = equivalence_cases();
    let mut worst = 0.0f64;
    for (name, c, d) in &cases {
        let dec = decompose(c);
        let (_, _, stats, ok) = run_hc4(&dec, d);
        let omega = dec.omega.len();
        let kp = dec.max_arity() * dec.len();
        if ok {
            check(stats.projections == omega, || format!("{name}: {} projections, |omega| = {omega}", stats.projections))?;
        } else {
            check(stats.projections <= omega, || format!("{name}: aborted pass used {} projections", stats.projections))?;
        }
        check(omega <= kp, || format!("{name}: |omega| = {omega} > k*p = {kp}"))?;
        let single = Problem { names: (0..d.len()).map(|i| format!("v{i}")).collect(), domains: d.clone(), constraints: vec![c.clone()] };
        let (_, hc3) = bounds_consistency(&single, Strategy::Hc3, d);
        check(hc3.projections >= omega, || format!("{name}: hc3 used {} < |omega| = {omega}", hc3.projections))?;
        worst = worst.max(omega as f64 / kp as f64);
    }
    Ok(format!("{} constraints, max |omega|/(k*p) = {worst:.3}", cases.len()))
}

// ---------------------------------------------------------------- criterion 5

/// Position of `x` on the line of doubles.
fn ordinal(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        i64::MIN - b
    } else {
        b
    }
}

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        0
    } else {
        ordinal(a).abs_diff(ordinal(b))
    }
}

fn box_ulps(a: &IntervalBox, b: &IntervalBox) -> u64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() == b.is_empty() { 0 } else { u64::MAX };
    }
    a.iter().zip(b.iter()).map(|(x, y)| ulps(x.lo(), y.lo()).max(ulps(x.hi(), y.hi()))).max().unwrap_or(0)
}

fn c5_agreement() -> Outcome {
    let started = Instant::now();
    let instances = [(Family::Bratu, 8), (Family::Feigenbaum, 6), (Family::BroydenBanded, 4), (Family::MoreCosnard, 4)];
    let mut notes = Vec::new();
    for (f, n) in instances {
        let p = f.generate(n);
        let reference = bounds_consistency(&p, Strategy::Hc3, &p.domains).0;
        for s in Strategy::ALL {
            let (d, _) = bounds_consistency(&p, s, &p.domains);
            let gap = box_ulps(&d, &reference);
            check(gap <= AGREEMENT_ULPS, || format!("{f}({n}) {s} differs from hc3 by {gap} ulps"))?;
        }
        notes.push(format!("{f}({n}) width {:.3e}", reference.total_width()));
    }
    let elapsed = started.elapsed();
    check(elapsed < AGREEMENT_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("all four methods within {AGREEMENT_ULPS} ulp: {}", notes.join(", ")))
}

// ---------------------------------------------------------------- criterion 6

fn c6_solver() -> Outcome {
    let started = Instant::now();
    let opts = SolveOptions { eps: SOLVE_EPS, ..SolveOptions::default() };
    let mut notes = Vec::new();
    for f in Family::ALL {
        let p = f.generate(4);
        let mut counts = Vec::new();
        let mut merged: Vec<Vec<IntervalBox>> = Vec::new();
        for s in Strategy::ALL {
            let r = branch_and_prune(&p, s, &opts, &p.domains);
            check(r.status == hcsolve::solve::SolveStatus::Complete, || format!("{f}(4) {s}: {}", r.status))?;
            for b in &r.boxes {
                check(certify(&p, b), || format!("{f}(4) {s}: box {b} fails certify"))?;
                check(b.max_width() <= SOLVE_EPS, || format!("{f}(4) {s}: box {b} wider than eps"))?;
            }
            counts.push(r.solution_count());
            merged.push(r.solutions());
        }
        check(counts.iter().all(|&c| c == counts[0]), || format!("{f}(4): counts {counts:?}"))?;
        // solutions pair up across methods by intersection
        for other in &merged[1..] {
            for a in &merged[0] {
                check(other.iter().any(|b| !a.intersect(b).is_empty()), || format!("{f}(4): unmatched box {a}"))?;
            }
        }
        notes.push(format!("{f}={}", counts[0]));
    }
    let elapsed = started.elapsed();
    check(elapsed < SOLVER_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("solution counts {}", notes.join(" ")))
}

// ---------------------------------------------------------------- criterion 7-8

fn c7_ratios() -> Outcome {
    let mut specs = Vec::new();
    for f in [Family::Bratu, Family::MoreCosnard] {
        for n in [4, 6, 8] {
            specs.push(bench::BenchSpec { methods: vec![Strategy::Hc3, Strategy::Hc4], ..bench::BenchSpec::new(f, n) });
        }
    }
    let rows = bench::run_suite(&specs);
    let ratios = bench::ratios(&rows);
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("projection_ratios.csv");
    bench::write_ratio_csv(&ratios, std::fs::File::create(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let series = |f: Family| -> Vec<f64> {
        ratios.iter().filter(|r| r.family == f && r.pair == "hc3/hc4").map(|r| r.ratio).collect()
    };
    let bratu = series(Family::Bratu);
    let cosnard = series(Family::MoreCosnard);
    check(bratu.len() == 3 && cosnard.len() == 3, || "missing runs".into())?;
    let spread = bratu.iter().cloned().fold(f64::MIN, f64::max) / bratu.iter().cloned().fold(f64::MAX, f64::min);
    check(spread < FLAT_RATIO_SPREAD, || format!("bratu ratios {bratu:?} spread {spread:.3}"))?;
    check(cosnard.windows(2).all(|w| w[1] > w[0]), || format!("more_cosnard ratios {cosnard:?} not increasing"))?;
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(",");
    Ok(format!(
        "bratu [{}] spread {spread:.3}; more_cosnard [{}]; csv {}",
        fmt(&bratu),
        fmt(&cosnard),
        path.display()
    ))
}

fn c8_factored() -> Outcome {
    let opts = SolveOptions { eps: SOLVE_EPS, ..SolveOptions::default() };
    let plain = bench::feigenbaum(6);
    let factored = bench::feigenbaum_factored(6);
    let a = branch_and_prune(&factored, Strategy::Hc4, &opts, &factored.domains).stats.projections;
    let b = branch_and_prune(&plain, Strategy::Hc4, &opts, &plain.domains).stats.projections;
    check(a < b, || format!("factored {a} >= original {b}"))?;
    Ok(format!("factored {a} < original {b} projections ({:.1}x)", b as f64 / a as f64))
}

// ---------------------------------------------------------------- criterion 9-10

fn c9_confluence() -> Outcome {
    let p = bench::bratu(5);
    let mut boxes = vec![p.domains.clone()];
    // a few sub-boxes around the solutions
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    for _ in 0..8 {
        let b: IntervalBox = p
            .domains
            .iter()
            .map(|d| {
                if d.is_point() {
                    *d
                } else {
                    let c: f64 = rng.gen_range(-1.0..1.0);
                    Interval::new(c - rng.gen_range(0.0..2.0), c + rng.gen_range(0.0..2.0))
                }
            })
            .collect();
        boxes.push(b);
    }
    for s in Strategy::ALL {
        let fifo = Propagator::new(&p, s).with_order(AgendaOrder::Fifo);
        let lifo = Propagator::new(&p, s).with_order(AgendaOrder::Lifo);
        for b in &boxes {
            let (x, _) = bounds_consistency_with(&fifo, b);
            let (y, _) = bounds_consistency_with(&lifo, b);
            check(x == y, || format!("{s}: fifo {x} vs lifo {y}"))?;
        }
    }
    Ok(format!("{} boxes x 4 methods identical", boxes.len()))
}

fn c10_snapshot() -> Outcome {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/parabola.txt");
    let golden = include_str!("golden/parabola.dump");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = hcsolve::cli::run(["hcsolve", "dump", data], &mut out, &mut err);
    check(code == 0, || format!("exit code {code}: {}", String::from_utf8_lossy(&err)))?;
    let text = String::from_utf8(out).unwrap();
    check(text == golden, || format!("dump differs from snapshot:\n{text}"))?;
    for line in ["p0: 2*x = α1", "p1: y^2 = α2", "p2: z - α2 = α3", "p3: α1 - α3 = α0"] {
        check(text.contains(line), || format!("missing `{line}`"))?;
    }
    check(text.contains("gamma:  {α0} {α1, α3} {z, α2} {y} {x}"), || "gamma".into())?;
    check(text.contains("gamma': {y} {α2} {z} {α3} {x} {α1} {α0}"), || "gamma'".into())?;
    Ok("dump matches tests/golden/parabola.dump".into())
}
