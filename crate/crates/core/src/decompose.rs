//! Compilation of constraint trees into primitive constraints.
//!
//! Every internal node of `lhs = rhs` becomes one primitive `op(inputs) = αi`
//! with a fresh variable `αi`; fresh variables are numbered in left-to-right
//! post-order starting at 1. The top equality becomes `L - R = α0` with `α0`
//! fixed to zero. Constant leaves stay embedded in their parent primitive, so
//! `2*x` is the single primitive `2*x = α1`.
//!
//! Alongside the primitives a [`Decomposition`] records
//! * `omega`, the two-sweep projection schedule: every output projection
//!   bottom-up, then every input projection top-down;
//! * `gamma`, the partition from a right-to-left preorder walk where visiting
//!   a node yields the variables of its children;
//! * `gamma_prime`, the reverse of a left-to-right preorder walk yielding each
//!   node's own variable.

use std::fmt;
use std::ops::Range;

use crate::domain::IntervalBox;
use crate::expr::{BinaryOp, Constraint, Expr, Problem, UnaryOp, VarId};
use crate::interval::inverse::{inv_cos, inv_exp, inv_mul, inv_pow, inv_sqrt};
use crate::interval::Interval;

/// A variable as seen by a decomposition: a problem variable or a fresh one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    Var(VarId),
    Fresh(usize),
}

/// An operand of a primitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Var(VarId),
    Fresh(usize),
    Const(Interval),
}

impl Slot {
    pub fn var_ref(self) -> Option<VarRef> {
        match self {
            Slot::Var(v) => Some(VarRef::Var(v)),
            Slot::Fresh(i) => Some(VarRef::Fresh(i)),
            Slot::Const(_) => None,
        }
    }
}

impl From<VarRef> for Slot {
    fn from(r: VarRef) -> Slot {
        match r {
            VarRef::Var(v) => Slot::Var(v),
            VarRef::Fresh(i) => Slot::Fresh(i),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Cos,
    Sqrt,
    Pow(u32),
}

impl PrimOp {
    pub fn arity(self) -> usize {
        match self {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul | PrimOp::Div => 2,
            _ => 1,
        }
    }
}

/// `op(inputs) = output`, one operator and at most three operands.
#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub op: PrimOp,
    pub inputs: Vec<Slot>,
    pub output: Slot,
    /// Inputs whose value does not depend on any problem variable.
    pub ground: Vec<bool>,
}

impl Primitive {
    pub fn new(op: PrimOp, inputs: Vec<Slot>, output: Slot) -> Primitive {
        assert_eq!(op.arity(), inputs.len(), "operand count does not match {op:?}");
        let ground = inputs.iter().map(|s| matches!(s, Slot::Const(_))).collect();
        Primitive { op, inputs, output, ground }
    }

    /// Whether the output does not depend on any problem variable.
    pub fn is_ground(&self) -> bool {
        self.ground.iter().all(|&g| g)
    }

    /// Operand at position `pos`; positions `0..arity` are inputs and
    /// `arity` is the output.
    pub fn slot(&self, pos: usize) -> Slot {
        if pos < self.inputs.len() {
            self.inputs[pos]
        } else {
            self.output
        }
    }

    pub fn output_pos(&self) -> usize {
        self.inputs.len()
    }

    /// Number of operand positions (inputs and output).
    pub fn width(&self) -> usize {
        self.inputs.len() + 1
    }

    /// Positions holding variables, inputs left to right then the output.
    pub fn var_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width()).filter(|&p| self.slot(p).var_ref().is_some())
    }

    /// Distinct variables of the primitive.
    pub fn scope(&self) -> Vec<VarRef> {
        let mut out: Vec<VarRef> = Vec::with_capacity(3);
        for p in 0..self.width() {
            if let Some(r) = self.slot(p).var_ref() {
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Position of the operand the projection onto `pos` divides by.
    pub fn divisor(&self, pos: usize) -> Option<usize> {
        match (self.op, pos) {
            (PrimOp::Mul, 0) => Some(1),
            (PrimOp::Mul, 1) => Some(0),
            (PrimOp::Div, 1) => Some(2),
            (PrimOp::Div, 2) => Some(1),
            _ => None,
        }
    }

    /// Projection of the primitive onto the operand at `pos`, intersected
    /// with its current value. `vals[i]` is the current value of `slot(i)`.
    pub fn project(&self, pos: usize, vals: &[Interval]) -> Interval {
        let out = vals[self.output_pos()];
        let is_out = pos == self.output_pos();
        let cur = vals[pos];
        match self.op {
            PrimOp::Add => {
                let (a, b) = (vals[0], vals[1]);
                match pos {
                    0 => a.intersect(out - b),
                    1 => b.intersect(out - a),
                    _ => out.intersect(a + b),
                }
            }
            PrimOp::Sub => {
                let (a, b) = (vals[0], vals[1]);
                match pos {
                    0 => a.intersect(out + b),
                    1 => b.intersect(a - out),
                    _ => out.intersect(a - b),
                }
            }
            PrimOp::Mul => {
                let (a, b) = (vals[0], vals[1]);
                match pos {
                    0 => inv_mul(out, b, a),
                    1 => inv_mul(out, a, b),
                    _ => out.intersect(a * b),
                }
            }
            PrimOp::Div => {
                // a / b = out  is handled as  out * b = a
                let (a, b) = (vals[0], vals[1]);
                match pos {
                    0 => a.intersect(out * b),
                    1 => inv_mul(a, out, b),
                    _ => inv_mul(a, b, out),
                }
            }
            PrimOp::Neg => {
                if is_out {
                    out.intersect(-vals[0])
                } else {
                    cur.intersect(-out)
                }
            }
            PrimOp::Exp => {
                if is_out {
                    out.intersect(vals[0].exp())
                } else {
                    cur.intersect(inv_exp(out))
                }
            }
            PrimOp::Cos => {
                if is_out {
                    out.intersect(vals[0].cos())
                } else {
                    inv_cos(out, cur)
                }
            }
            PrimOp::Sqrt => {
                if is_out {
                    out.intersect(vals[0].sqrt())
                } else {
                    cur.intersect(inv_sqrt(out))
                }
            }
            PrimOp::Pow(n) => {
                if is_out {
                    out.intersect(vals[0].pow_int(n))
                } else {
                    inv_pow(out, n, cur)
                }
            }
        }
    }
}

/// An ordered partition of variables; block order induces the strict
/// partial order `x ≺ y` iff `x` sits in an earlier block than `y`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Partition {
    pub blocks: Vec<Vec<VarRef>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<VarRef>>) -> Partition {
        Partition { blocks }
    }

    /// Block index of `v`, if it belongs to the partition.
    pub fn rank(&self, v: VarRef) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&v))
    }

    /// Blocks are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = Vec::new();
        for b in &self.blocks {
            for v in b {
                if seen.contains(v) {
                    return false;
                }
                seen.push(*v);
            }
        }
        true
    }

    /// Every pair `(x, y)` meaning `x ≺ y` puts `x` in an earlier block.
    pub fn is_compatible(&self, precedes: &[(VarRef, VarRef)]) -> bool {
        precedes.iter().all(|&(x, y)| match (self.rank(x), self.rank(y)) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        })
    }

    fn dedup(blocks: Vec<Vec<VarRef>>) -> Partition {
        let mut seen: Vec<VarRef> = Vec::new();
        let mut out = Vec::new();
        for b in blocks {
            let mut kept = Vec::new();
            for v in b {
                if !seen.contains(&v) {
                    seen.push(v);
                    kept.push(v);
                }
            }
            if !kept.is_empty() {
                out.push(kept);
            }
        }
        Partition { blocks: out }
    }
}

/// The primitives of one constraint with its projection schedule and
/// partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Post-order; primitive `i < len-1` outputs `α(i+1)`, the last one is
    /// the root `L - R = α0`.
    pub primitives: Vec<Primitive>,
    /// Number of fresh variables including `α0`.
    pub fresh_count: usize,
    /// `(primitive, position)` pairs in application order.
    pub omega: Vec<(usize, usize)>,
    pub gamma: Partition,
    pub gamma_prime: Partition,
    /// Nodes of the source tree, leaves included.
    pub node_count: usize,
    pub admissible: bool,
}

impl Decomposition {
    pub fn root(&self) -> usize {
        self.primitives.len() - 1
    }

    /// Number of primitives (p).
    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Maximum primitive arity in variables (k).
    pub fn max_arity(&self) -> usize {
        self.primitives.iter().map(|p| p.scope().len()).max().unwrap_or(0)
    }

    /// Initial values of the fresh variables: unbounded, `α0 = 0`.
    pub fn initial_fresh(&self) -> Vec<Interval> {
        let mut v = vec![Interval::ENTIRE; self.fresh_count];
        v[0] = Interval::ZERO;
        v
    }

    /// Primitive producing fresh variable `i`.
    pub fn producer(&self, fresh: usize) -> usize {
        if fresh == 0 {
            self.root()
        } else {
            fresh - 1
        }
    }

    fn children(&self, prim: usize) -> impl Iterator<Item = usize> + '_ {
        self.primitives[prim].inputs.iter().filter_map(move |s| match s {
            Slot::Fresh(i) => Some(self.producer(*i)),
            _ => None,
        })
    }

    /// Renders primitives, schedule and partitions with the variable names of
    /// `problem`.
    pub fn render(&self, problem: &Problem) -> String {
        let names = &problem.names;
        let mut s = String::new();
        s.push_str("  primitives:\n");
        for (i, p) in self.primitives.iter().enumerate() {
            s.push_str(&format!("    p{}: {}\n", i, PrimDisplay { prim: p, names }));
        }
        s.push_str("  omega:\n");
        for (k, &(pi, pos)) in self.omega.iter().enumerate() {
            let target = slot_name(self.primitives[pi].slot(pos), names);
            s.push_str(&format!("    {:>2}. p{} -> {}\n", k + 1, pi, target));
        }
        s.push_str(&format!("  gamma:  {}\n", render_partition(&self.gamma, names)));
        s.push_str(&format!("  gamma': {}\n", render_partition(&self.gamma_prime, names)));
        s
    }
}

pub fn slot_name(s: Slot, names: &[String]) -> String {
    match s {
        Slot::Var(v) => names[v.0].clone(),
        Slot::Fresh(i) => format!("α{i}"),
        Slot::Const(c) => crate::expr::format_const(c),
    }
}

fn render_partition(p: &Partition, names: &[String]) -> String {
    p.blocks
        .iter()
        .map(|b| {
            let inner: Vec<String> = b.iter().map(|&v| slot_name(v.into(), names)).collect();
            format!("{{{}}}", inner.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Display adaptor for a primitive, e.g. `z - α2 = α3`.
pub struct PrimDisplay<'a> {
    pub prim: &'a Primitive,
    pub names: &'a [String],
}

impl fmt::Display for PrimDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |s: Slot| slot_name(s, self.names);
        let p = self.prim;
        let out = n(p.output);
        match p.op {
            PrimOp::Add => write!(f, "{} + {} = {}", n(p.inputs[0]), n(p.inputs[1]), out),
            PrimOp::Sub => write!(f, "{} - {} = {}", n(p.inputs[0]), n(p.inputs[1]), out),
            PrimOp::Mul => write!(f, "{}*{} = {}", n(p.inputs[0]), n(p.inputs[1]), out),
            PrimOp::Div => write!(f, "{}/{} = {}", n(p.inputs[0]), n(p.inputs[1]), out),
            PrimOp::Neg => write!(f, "-{} = {}", n(p.inputs[0]), out),
            PrimOp::Exp => write!(f, "exp({}) = {}", n(p.inputs[0]), out),
            PrimOp::Cos => write!(f, "cos({}) = {}", n(p.inputs[0]), out),
            PrimOp::Sqrt => write!(f, "sqrt({}) = {}", n(p.inputs[0]), out),
            PrimOp::Pow(k) => write!(f, "{}^{} = {}", n(p.inputs[0]), k, out),
        }
    }
}

struct Lowering {
    prims: Vec<Primitive>,
}

impl Lowering {
    fn is_ground(&self, s: Slot) -> bool {
        match s {
            Slot::Const(_) => true,
            Slot::Var(_) => false,
            Slot::Fresh(i) => self.prims[i - 1].is_ground(),
        }
    }
}

impl Lowering {
    fn lower(&mut self, e: &Expr) -> Slot {
        let (op, inputs) = match e {
            Expr::Var(v) => return Slot::Var(*v),
            Expr::Const(c) => return Slot::Const(*c),
            Expr::Unary(op, c) => {
                let op = match op {
                    UnaryOp::Neg => PrimOp::Neg,
                    UnaryOp::Exp => PrimOp::Exp,
                    UnaryOp::Cos => PrimOp::Cos,
                    UnaryOp::Sqrt => PrimOp::Sqrt,
                };
                (op, vec![self.lower(c)])
            }
            Expr::Pow(c, n) => (PrimOp::Pow(*n), vec![self.lower(c)]),
            Expr::Binary(op, l, r) => {
                let op = match op {
                    BinaryOp::Add => PrimOp::Add,
                    BinaryOp::Sub => PrimOp::Sub,
                    BinaryOp::Mul => PrimOp::Mul,
                    BinaryOp::Div => PrimOp::Div,
                };
                let l = self.lower(l);
                let r = self.lower(r);
                (op, vec![l, r])
            }
        };
        let fresh = self.prims.len() + 1;
        let mut prim = Primitive::new(op, inputs, Slot::Fresh(fresh));
        prim.ground = prim.inputs.iter().map(|&s| self.is_ground(s)).collect();
        self.prims.push(prim);
        Slot::Fresh(fresh)
    }
}

/// Decomposes one constraint.
pub fn decompose(c: &Constraint) -> Decomposition {
    let mut low = Lowering { prims: Vec::new() };
    let l = low.lower(&c.lhs);
    let r = low.lower(&c.rhs);
    let mut root = Primitive::new(PrimOp::Sub, vec![l, r], Slot::Fresh(0));
    root.ground = vec![low.is_ground(l), low.is_ground(r)];
    let mut prims = low.prims;
    prims.push(root);
    let fresh_count = prims.len();

    let mut dec = Decomposition {
        primitives: prims,
        fresh_count,
        omega: Vec::new(),
        gamma: Partition::default(),
        gamma_prime: Partition::default(),
        node_count: c.node_count(),
        admissible: c.is_admissible(),
    };
    dec.omega = schedule(&dec);
    dec.gamma = gamma(&dec);
    dec.gamma_prime = gamma_prime(&dec);
    dec
}

fn schedule(dec: &Decomposition) -> Vec<(usize, usize)> {
    let mut omega: Vec<(usize, usize)> = (0..dec.len()).map(|i| (i, dec.primitives[i].output_pos())).collect();
    fn down(dec: &Decomposition, prim: usize, omega: &mut Vec<(usize, usize)>) {
        let p = &dec.primitives[prim];
        let mut positions: Vec<usize> = (0..p.inputs.len()).filter(|&i| p.inputs[i].var_ref().is_some()).collect();
        if prim == dec.root() {
            // the top equality projects onto its right side first
            positions.reverse();
        }
        omega.extend(positions.into_iter().map(|pos| (prim, pos)));
        for child in dec.children(prim).collect::<Vec<_>>() {
            down(dec, child, omega);
        }
    }
    down(dec, dec.root(), &mut omega);
    omega
}

fn gamma(dec: &Decomposition) -> Partition {
    let mut blocks = vec![vec![VarRef::Fresh(0)]];
    fn visit(dec: &Decomposition, prim: usize, blocks: &mut Vec<Vec<VarRef>>) {
        let p = &dec.primitives[prim];
        blocks.push(p.inputs.iter().filter_map(|s| s.var_ref()).collect());
        let children: Vec<usize> = dec.children(prim).collect();
        for &child in children.iter().rev() {
            visit(dec, child, blocks);
        }
    }
    visit(dec, dec.root(), &mut blocks);
    Partition::dedup(blocks)
}

fn gamma_prime(dec: &Decomposition) -> Partition {
    let mut order = Vec::new();
    fn visit(dec: &Decomposition, prim: usize, order: &mut Vec<VarRef>) {
        let p = &dec.primitives[prim];
        order.push(p.output.var_ref().expect("primitive output is a variable"));
        for s in &p.inputs {
            match s {
                Slot::Fresh(i) => visit(dec, dec.producer(*i), order),
                Slot::Var(v) => order.push(VarRef::Var(*v)),
                Slot::Const(_) => {}
            }
        }
    }
    visit(dec, dec.root(), &mut order);
    // a repeated variable keeps its first (deepest) place after inversion
    Partition::dedup(order.into_iter().rev().map(|v| vec![v]).collect())
}

/// All constraints compiled into one system of primitives. Fresh variables
/// become ordinary variables numbered after the original ones; names look
/// like `α3@c1` (fresh α3 of constraint 1).
#[derive(Clone, Debug)]
pub struct FlatProblem {
    pub names: Vec<String>,
    pub domains: IntervalBox,
    pub primitives: Vec<Primitive>,
    /// Source constraint of each primitive.
    pub source: Vec<usize>,
    /// Primitive range of each constraint.
    pub ranges: Vec<Range<usize>>,
    /// First state index of each constraint's fresh variables.
    pub fresh_offset: Vec<usize>,
    pub original_vars: usize,
    /// Primitives mentioning each variable.
    pub watchers: Vec<Vec<usize>>,
}

impl FlatProblem {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Extends a box over the original variables with fresh-variable domains.
    pub fn extend_box(&self, d: &IntervalBox) -> IntervalBox {
        let mut out = d.clone();
        for i in self.original_vars..self.num_vars() {
            out.push(self.domains.as_slice()[i]);
        }
        out
    }

    /// The flattened system as a [`Problem`] is not expressible (primitives
    /// are not trees), so this renders it for inspection.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.primitives.iter().enumerate() {
            s.push_str(&format!("p{}: {}\n", i, PrimDisplay { prim: p, names: &self.names }));
        }
        s
    }
}

/// Decomposes every constraint and flattens the result.
pub fn decompose_problem(p: &Problem) -> FlatProblem {
    let n = p.num_vars();
    let mut names = p.names.clone();
    let mut domains = p.domains.clone();
    let mut primitives = Vec::new();
    let mut source = Vec::new();
    let mut ranges = Vec::new();
    let mut fresh_offset = Vec::new();
    for (ci, c) in p.constraints.iter().enumerate() {
        let dec = decompose(c);
        let base = names.len();
        fresh_offset.push(base);
        for (i, d) in dec.initial_fresh().into_iter().enumerate() {
            names.push(format!("α{i}@c{ci}"));
            domains.push(d);
        }
        let start = primitives.len();
        let globalize = |s: Slot| match s {
            Slot::Fresh(i) => Slot::Var(VarId(base + i)),
            other => other,
        };
        for prim in dec.primitives {
            primitives.push(Primitive {
                op: prim.op,
                inputs: prim.inputs.into_iter().map(globalize).collect(),
                output: globalize(prim.output),
                ground: prim.ground,
            });
            source.push(ci);
        }
        ranges.push(start..primitives.len());
    }
    let mut watchers = vec![Vec::new(); names.len()];
    for (i, prim) in primitives.iter().enumerate() {
        for r in prim.scope() {
            if let VarRef::Var(v) = r {
                watchers[v.0].push(i);
            }
        }
    }
    FlatProblem {
        names,
        domains,
        primitives,
        source,
        ranges,
        fresh_offset,
        original_vars: n,
        watchers,
    }
}

/// Human-readable listing of every constraint's decomposition.
pub fn dump(p: &Problem) -> String {
    let mut s = String::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let dec = decompose(c);
        s.push_str(&format!("constraint {}: {}\n", i, p.display_constraint(c)));
        s.push_str(&format!(
            "  nodes={} primitives={} fresh={} omega={} admissible={}\n",
            dec.node_count,
            dec.len(),
            dec.fresh_count,
            dec.omega.len(),
            dec.admissible
        ));
        s.push_str(&dec.render(p));
    }
    s
}
