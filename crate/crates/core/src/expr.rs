//! Constraint expression trees, problems, and their natural interval
//! evaluation.

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::IntervalBox;
use crate::interval::Interval;

/// Index of a variable in its owning [`Problem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Cos,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl UnaryOp {
    pub fn apply(self, a: Interval) -> Interval {
        match self {
            UnaryOp::Neg => -a,
            UnaryOp::Exp => a.exp(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Sqrt => a.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

impl BinaryOp {
    pub fn apply(self, a: Interval, b: Interval) -> Interval {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

/// One side of a constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(VarId),
    /// Literal constants are stored as enclosures, so `3.84` is the pair of
    /// floats around it rather than the nearest one.
    Const(Interval),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `child^n`, `n >= 2`.
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn var(id: usize) -> Expr {
        Expr::Var(VarId(id))
    }

    pub fn constant(x: f64) -> Expr {
        Expr::Const(Interval::point(x))
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn pow(child: Expr, n: u32) -> Expr {
        Expr::Pow(Box::new(child), n)
    }

    /// Number of nodes in the tree (leaves included).
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Unary(_, c) | Expr::Pow(c, _) => 1 + c.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    pub fn internal_node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Unary(_, c) | Expr::Pow(c, _) => 1 + c.internal_node_count(),
            Expr::Binary(_, l, r) => 1 + l.internal_node_count() + r.internal_node_count(),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Var(v) => f(*v),
            Expr::Const(_) => {}
            Expr::Unary(_, c) | Expr::Pow(c, _) => c.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut any = false;
        self.visit_vars(&mut |_| any = true);
        !any
    }

    /// Natural interval extension over `d`.
    pub fn evaluate(&self, d: &IntervalBox) -> Interval {
        match self {
            Expr::Var(v) => d[*v],
            Expr::Const(c) => *c,
            Expr::Unary(op, c) => op.apply(c.evaluate(d)),
            Expr::Binary(op, l, r) => op.apply(l.evaluate(d), r.evaluate(d)),
            Expr::Pow(c, n) => c.evaluate(d).pow_int(*n),
        }
    }

    /// Replaces every variable-free subtree by its interval value.
    pub fn fold_constants(&self) -> Expr {
        if self.is_constant() {
            if let Expr::Const(_) = self {
                return self.clone();
            }
            return Expr::Const(self.evaluate(&IntervalBox::new(Vec::new())));
        }
        match self {
            Expr::Unary(op, c) => Expr::unary(*op, c.fold_constants()),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.fold_constants(), r.fold_constants()),
            Expr::Pow(c, n) => Expr::pow(c.fold_constants(), *n),
            leaf => leaf.clone(),
        }
    }
}

/// `lhs = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Constraint {
    pub fn new(lhs: Expr, rhs: Expr) -> Constraint {
        Constraint { lhs, rhs }
    }

    /// Occurrence count of each variable.
    pub fn occurrences(&self) -> BTreeMap<VarId, usize> {
        let mut counts = BTreeMap::new();
        let mut bump = |v: VarId| *counts.entry(v).or_insert(0) += 1;
        self.lhs.visit_vars(&mut bump);
        self.rhs.visit_vars(&mut bump);
        counts
    }

    /// Distinct variables, in first-occurrence order.
    pub fn scope(&self) -> Vec<VarId> {
        let mut seen = Vec::new();
        let mut push = |v: VarId| {
            if !seen.contains(&v) {
                seen.push(v)
            }
        };
        self.lhs.visit_vars(&mut push);
        self.rhs.visit_vars(&mut push);
        seen
    }

    /// No variable occurs more than once.
    pub fn is_admissible(&self) -> bool {
        self.occurrences().values().all(|&c| c == 1)
    }

    pub fn node_count(&self) -> usize {
        self.lhs.node_count() + self.rhs.node_count()
    }

    /// Interval evaluation of `lhs - rhs`.
    pub fn residual(&self, d: &IntervalBox) -> Interval {
        self.lhs.evaluate(d) - self.rhs.evaluate(d)
    }

    pub fn fold_constants(&self) -> Constraint {
        Constraint::new(self.lhs.fold_constants(), self.rhs.fold_constants())
    }
}

/// Variables with their initial domains and a list of equations.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub names: Vec<String>,
    pub domains: IntervalBox,
    pub constraints: Vec<Constraint>,
}

impl Problem {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn fold_constants(&self) -> Problem {
        Problem {
            names: self.names.clone(),
            domains: self.domains.clone(),
            constraints: self.constraints.iter().map(Constraint::fold_constants).collect(),
        }
    }

    /// Largest node count over the constraints.
    pub fn max_node_count(&self) -> usize {
        self.constraints.iter().map(Constraint::node_count).max().unwrap_or(0)
    }

    pub fn display_expr<'a>(&'a self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay { expr: e, names: &self.names }
    }

    pub fn display_constraint<'a>(&'a self, c: &'a Constraint) -> ConstraintDisplay<'a> {
        ConstraintDisplay { constraint: c, names: &self.names }
    }
}

/// Renders a problem in the modeling language; the output parses back to an
/// identical problem.
impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.names.iter().enumerate() {
            let d = self.domains[VarId(i)];
            writeln!(f, "var {} in [{}, {}];", name, literal(d.lo()), literal(d.hi()))?;
        }
        for c in &self.constraints {
            writeln!(f, "{};", self.display_constraint(c))?;
        }
        Ok(())
    }
}

/// Decimal literal denoting exactly `x`.
pub(crate) fn literal(x: f64) -> String {
    if x == f64::INFINITY {
        return "inf".into();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".into();
    }
    let exact = |s: &str| crate::parser::enclose_decimal(s.trim_start_matches('-')).ok() == Some(Interval::point(x.abs()));
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x);
    }
    let short = format!("{:?}", x);
    if exact(&short) {
        return short;
    }
    (17..=800)
        .map(|d| format!("{:.*e}", d, x))
        .find(|s| exact(s))
        .expect("every double has a finite decimal expansion")
}

/// Shortest decimal literal whose enclosure is exactly `c`, if any.
fn const_literal(c: Interval) -> Option<String> {
    if c.is_point() && c.lo() >= 0.0 {
        return Some(literal(c.lo()));
    }
    if c.is_empty() || c.lo() < 0.0 || !c.is_bounded() {
        return None;
    }
    for x in [c.lo(), c.hi()] {
        let s = format!("{}", x);
        if crate::parser::enclose_decimal(&s).ok() == Some(c) {
            return Some(s);
        }
    }
    for digits in 1..=17 {
        for x in [c.lo(), c.hi()] {
            let s = format!("{:.*e}", digits - 1, x);
            if crate::parser::enclose_decimal(&s).ok() == Some(c) {
                return Some(s);
            }
        }
    }
    None
}

/// Literal for a constant, or its bounds when no literal encloses it.
pub fn format_const(c: Interval) -> String {
    const_literal(c).unwrap_or_else(|| format!("[{}, {}]", literal(c.lo()), literal(c.hi())))
}

// precedence levels used by the printer
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const PRIMARY: u8 = 4;

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn write(&self, e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = match e {
            Expr::Var(_) | Expr::Const(_) => PRIMARY,
            Expr::Unary(UnaryOp::Neg, _) => FACTOR,
            Expr::Unary(..) => PRIMARY,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
            Expr::Binary(..) => PRODUCT,
            Expr::Pow(..) => FACTOR,
        };
        let paren = prec < min_prec;
        if paren {
            write!(f, "(")?;
        }
        match e {
            Expr::Var(v) => write!(f, "{}", self.names[v.0])?,
            Expr::Const(c) => match const_literal(*c) {
                Some(s) => write!(f, "{s}")?,
                None => write!(f, "[{}, {}]", literal(c.lo()), literal(c.hi()))?,
            },
            Expr::Unary(UnaryOp::Neg, c) => {
                write!(f, "-")?;
                self.write(c, FACTOR, f)?;
            }
            Expr::Unary(op, c) => {
                write!(f, "{}(", op.name())?;
                self.write(c, SUM, f)?;
                write!(f, ")")?;
            }
            Expr::Binary(op, l, r) => {
                let level = if matches!(op, BinaryOp::Add | BinaryOp::Sub) { SUM } else { PRODUCT };
                self.write(l, level, f)?;
                if level == SUM {
                    write!(f, " {} ", op.symbol())?;
                } else {
                    write!(f, "{}", op.symbol())?;
                }
                self.write(r, level + 1, f)?;
            }
            Expr::Pow(c, n) => {
                self.write(c, PRIMARY, f)?;
                write!(f, "^{n}")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, SUM, f)
    }
}

pub struct ConstraintDisplay<'a> {
    constraint: &'a Constraint,
    names: &'a [String],
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = ExprDisplay { expr: &self.constraint.lhs, names: self.names };
        let r = ExprDisplay { expr: &self.constraint.rhs, names: self.names };
        write!(f, "{l} = {r}")
    }
}
