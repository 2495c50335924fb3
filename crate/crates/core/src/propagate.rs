//! Worklist propagation to the greatest common fixed point.
//!
//! Four strategies share one agenda loop:
//! * [`Strategy::Hc3`] flattens all constraints into primitives and revises
//!   one primitive at a time with persistent fresh variables;
//! * [`Strategy::Hc3Sb`] keeps the flattened state but revises a whole user
//!   constraint at a time, running an inner primitive worklist to its fixed
//!   point;
//! * [`Strategy::Hc4`] revises user constraints with one HC4revise pass;
//! * [`Strategy::Hc4Sb`] repeats HC4revise on a constraint until it stops
//!   narrowing.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::decompose::{decompose, decompose_problem, Decomposition, FlatProblem};
use crate::domain::IntervalBox;
use crate::expr::{Problem, VarId};
use crate::interval::Interval;
use crate::revise::{hc3_revise, hc4_revise, Store};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Hc3,
    Hc3Sb,
    Hc4,
    Hc4Sb,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Hc3, Strategy::Hc3Sb, Strategy::Hc4, Strategy::Hc4Sb];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Hc3 => "hc3",
            Strategy::Hc3Sb => "hc3sb",
            Strategy::Hc4 => "hc4",
            Strategy::Hc4Sb => "hc4sb",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Strategy, String> {
        Strategy::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected hc3, hc3sb, hc4 or hc4sb)"))
    }
}

/// Agenda discipline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AgendaOrder {
    #[default]
    Fifo,
    Lifo,
}

/// Work counters. A projection is one application of a projection operator
/// onto one variable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub projections: usize,
    pub revise_calls: usize,
    pub enqueues: usize,
    /// Projections that divided by an interval with zero strictly inside.
    pub split_divisions: usize,
    pub wall_time: Duration,
}

impl Stats {
    pub fn add(&mut self, other: &Stats) {
        self.projections += other.projections;
        self.revise_calls += other.revise_calls;
        self.enqueues += other.enqueues;
        self.split_divisions += other.split_divisions;
        self.wall_time += other.wall_time;
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "projections={}", self.projections)?;
        writeln!(f, "revise_calls={}", self.revise_calls)?;
        writeln!(f, "enqueues={}", self.enqueues)?;
        writeln!(f, "split_divisions={}", self.split_divisions)?;
        write!(f, "seconds={:.6}", self.wall_time.as_secs_f64())
    }
}

/// Set-like queue of unit indices.
#[derive(Clone, Debug)]
pub struct Agenda {
    queue: VecDeque<usize>,
    member: Vec<bool>,
    order: AgendaOrder,
}

impl Agenda {
    pub fn new(len: usize, order: AgendaOrder) -> Agenda {
        Agenda { queue: VecDeque::with_capacity(len), member: vec![false; len], order }
    }

    /// Adds `u` unless already queued; returns whether it was added.
    pub fn push(&mut self, u: usize) -> bool {
        if self.member[u] {
            return false;
        }
        self.member[u] = true;
        self.queue.push_back(u);
        true
    }

    pub fn pop(&mut self) -> Option<usize> {
        let u = match self.order {
            AgendaOrder::Fifo => self.queue.pop_front(),
            AgendaOrder::Lifo => self.queue.pop_back(),
        }?;
        self.member[u] = false;
        Some(u)
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// A compiled problem ready for repeated propagation on sub-boxes.
#[derive(Clone, Debug)]
pub struct Propagator {
    strategy: Strategy,
    order: AgendaOrder,
    original_vars: usize,
    flat: FlatProblem,
    decs: Vec<Decomposition>,
    /// User constraints mentioning each original variable.
    constraint_watchers: Vec<Vec<usize>>,
}

impl Propagator {
    pub fn new(p: &Problem, strategy: Strategy) -> Propagator {
        let decs: Vec<Decomposition> = p.constraints.iter().map(decompose).collect();
        let mut constraint_watchers = vec![Vec::new(); p.num_vars()];
        for (ci, c) in p.constraints.iter().enumerate() {
            for v in c.scope() {
                constraint_watchers[v.0].push(ci);
            }
        }
        Propagator {
            strategy,
            order: AgendaOrder::Fifo,
            original_vars: p.num_vars(),
            flat: decompose_problem(p),
            decs,
            constraint_watchers,
        }
    }

    pub fn with_order(mut self, order: AgendaOrder) -> Propagator {
        self.order = order;
        self
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn flat(&self) -> &FlatProblem {
        &self.flat
    }

    pub fn decompositions(&self) -> &[Decomposition] {
        &self.decs
    }

    fn uses_flat_state(&self) -> bool {
        matches!(self.strategy, Strategy::Hc3 | Strategy::Hc3Sb)
    }

    /// Number of propagation units: primitives for HC3, user constraints
    /// otherwise.
    pub fn units(&self) -> usize {
        match self.strategy {
            Strategy::Hc3 => self.flat.primitives.len(),
            _ => self.decs.len(),
        }
    }

    /// Propagation state for a box over the original variables. HC3 style
    /// strategies append the fresh variables.
    pub fn initial_state(&self, d: &IntervalBox) -> IntervalBox {
        if self.uses_flat_state() {
            self.flat.extend_box(d)
        } else {
            d.clone()
        }
    }

    /// The original-variable part of a state.
    pub fn project_state(&self, state: &IntervalBox) -> IntervalBox {
        state.truncated(self.original_vars)
    }

    /// Revises one unit. Changed state variables are appended to `changed`.
    fn revise_unit(
        &self,
        u: usize,
        state: &mut IntervalBox,
        scratch: &mut Vec<Interval>,
        stats: &mut Stats,
        changed: &mut Vec<VarId>,
    ) -> bool {
        match self.strategy {
            Strategy::Hc3 => hc3_revise(&self.flat.primitives[u], &mut Store::new(state, &mut []), stats, changed),
            Strategy::Hc3Sb => self.hc3_inner(u, state, stats, changed),
            Strategy::Hc4 => hc4_revise(&self.decs[u], state, scratch, stats, changed),
            Strategy::Hc4Sb => loop {
                let before = changed.len();
                if !hc4_revise(&self.decs[u], state, scratch, stats, changed) {
                    break false;
                }
                if changed.len() == before {
                    break true;
                }
            },
        }
    }

    /// Primitive worklist restricted to constraint `c`.
    fn hc3_inner(&self, c: usize, state: &mut IntervalBox, stats: &mut Stats, changed: &mut Vec<VarId>) -> bool {
        let range = self.flat.ranges[c].clone();
        let start = range.start;
        let mut agenda = Agenda::new(range.len(), self.order);
        for i in range.clone() {
            agenda.push(i - start);
            stats.enqueues += 1;
        }
        let mut local = Vec::new();
        while let Some(i) = agenda.pop() {
            local.clear();
            let splits = stats.split_divisions;
            let prim = &self.flat.primitives[start + i];
            if !hc3_revise(prim, &mut Store::new(state, &mut []), stats, &mut local) {
                changed.extend_from_slice(&local);
                return false;
            }
            let again = stats.split_divisions > splits;
            for &v in &local {
                for &w in &self.flat.watchers[v.0] {
                    if range.contains(&w) && (w != start + i || again) && agenda.push(w - start) {
                        stats.enqueues += 1;
                    }
                }
            }
            changed.extend_from_slice(&local);
        }
        true
    }

    fn watchers(&self, v: VarId) -> &[usize] {
        match self.strategy {
            Strategy::Hc3 => &self.flat.watchers[v.0],
            _ if v.0 < self.original_vars => &self.constraint_watchers[v.0],
            _ => &[],
        }
    }

    /// Whether a unit that narrowed its own variables must be revised again.
    /// One revision is idempotent for primitives and admissible constraints
    /// unless it divided by an interval straddling zero.
    fn self_requeue(&self, u: usize, split: bool) -> bool {
        match self.strategy {
            Strategy::Hc3 => split,
            Strategy::Hc4 => split || !self.decs[u].admissible,
            Strategy::Hc3Sb | Strategy::Hc4Sb => false,
        }
    }

    /// Propagates `state` to a fixed point of the strategy's revise
    /// operators. Returns `false` when the state becomes empty.
    pub fn propagate(&self, state: &mut IntervalBox, stats: &mut Stats) -> bool {
        let started = Instant::now();
        let n = self.units();
        let mut agenda = Agenda::new(n, self.order);
        for u in 0..n {
            agenda.push(u);
        }
        stats.enqueues += n;
        let ok = self.run(&mut agenda, state, stats);
        stats.wall_time += started.elapsed();
        ok
    }

    fn run(&self, agenda: &mut Agenda, state: &mut IntervalBox, stats: &mut Stats) -> bool {
        let mut scratch = Vec::new();
        let mut changed = Vec::new();
        let mut seen = vec![false; state.len()];
        while let Some(u) = agenda.pop() {
            changed.clear();
            let splits = stats.split_divisions;
            if !self.revise_unit(u, state, &mut scratch, stats, &mut changed) {
                return false;
            }
            let again = self.self_requeue(u, stats.split_divisions > splits);
            for &v in &changed {
                if std::mem::replace(&mut seen[v.0], true) {
                    continue;
                }
                for &w in self.watchers(v) {
                    if (w != u || again) && agenda.push(w) {
                        stats.enqueues += 1;
                    }
                }
            }
            for &v in &changed {
                seen[v.0] = false;
            }
        }
        true
    }

    /// Whether one more revision of any unit would change `state`.
    pub fn is_fixed_point(&self, state: &IntervalBox) -> bool {
        (0..self.units()).all(|u| {
            let mut s = state.clone();
            let mut changed = Vec::new();
            self.revise_unit(u, &mut s, &mut Vec::new(), &mut Stats::default(), &mut changed);
            s == *state
        })
    }
}

/// Narrows `d` to the strategy's fixed point. An inconsistent problem yields
/// a box of empty intervals.
pub fn bounds_consistency(p: &Problem, strategy: Strategy, d: &IntervalBox) -> (IntervalBox, Stats) {
    bounds_consistency_with(&Propagator::new(p, strategy), d)
}

pub fn bounds_consistency_with(prop: &Propagator, d: &IntervalBox) -> (IntervalBox, Stats) {
    let mut stats = Stats::default();
    let mut state = prop.initial_state(d);
    if !prop.propagate(&mut state, &mut stats) {
        return (d.empty_like(), stats);
    }
    (prop.project_state(&state), stats)
}

/// Fixed point of the revise operators of a single user constraint, the
/// S-box building block: HC3 style iterates its primitives, HC4 style
/// repeats HC4revise.
pub fn sbox_revise(p: &Problem, constraint: usize, inner: Strategy, d: &IntervalBox) -> (IntervalBox, Stats) {
    let single = Problem {
        names: p.names.clone(),
        domains: p.domains.clone(),
        constraints: vec![p.constraints[constraint].clone()],
    };
    let strategy = match inner {
        Strategy::Hc3 | Strategy::Hc3Sb => Strategy::Hc3Sb,
        Strategy::Hc4 | Strategy::Hc4Sb => Strategy::Hc4Sb,
    };
    let prop = Propagator::new(&single, strategy);
    let mut stats = Stats::default();
    let mut state = prop.initial_state(d);
    let mut changed = Vec::new();
    if !prop.revise_unit(0, &mut state, &mut Vec::new(), &mut stats, &mut changed) {
        return (d.empty_like(), stats);
    }
    (prop.project_state(&state), stats)
}
