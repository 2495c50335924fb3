//! Depth-first branch and prune over the original variables.

use std::fmt;
use std::time::{Duration, Instant};

use crate::domain::IntervalBox;
use crate::expr::Problem;
use crate::propagate::{AgendaOrder, Propagator, Stats, Strategy};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub eps: f64,
    pub timeout: Option<Duration>,
    /// Limit on the number of boxes taken from the search stack.
    pub max_boxes: Option<usize>,
    pub order: AgendaOrder,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions { eps: 1e-8, timeout: None, max_boxes: None, order: AgendaOrder::Fifo }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Complete,
    Timeout,
    BoxLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Complete => "complete",
            SolveStatus::Timeout => "timeout",
            SolveStatus::BoxLimit => "box-limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Boxes in emission order, every original variable narrower than eps.
    pub boxes: Vec<IntervalBox>,
    pub stats: Stats,
    pub status: SolveStatus,
    /// Boxes taken from the search stack.
    pub explored: usize,
}

impl SolveResult {
    /// Emitted boxes with adjacent ones merged.
    pub fn solutions(&self) -> Vec<IntervalBox> {
        merge_adjacent(&self.boxes)
    }

    pub fn solution_count(&self) -> usize {
        self.solutions().len()
    }
}

/// Finds every solution box of `p` inside `d0` at accuracy `opts.eps`.
pub fn branch_and_prune(p: &Problem, strategy: Strategy, opts: &SolveOptions, d0: &IntervalBox) -> SolveResult {
    assert!(opts.eps > 0.0, "eps must be positive");
    let prop = Propagator::new(p, strategy).with_order(opts.order);
    let started = Instant::now();
    let n = p.num_vars();
    let mut stats = Stats::default();
    let mut boxes = Vec::new();
    let mut explored = 0;
    let mut status = SolveStatus::Complete;
    // each entry carries the variable to try splitting first
    let mut stack = vec![(prop.initial_state(d0), 0usize)];

    while let Some((mut state, next)) = stack.pop() {
        if opts.max_boxes.is_some_and(|m| explored >= m) {
            status = SolveStatus::BoxLimit;
            break;
        }
        if opts.timeout.is_some_and(|t| started.elapsed() >= t) {
            status = SolveStatus::Timeout;
            break;
        }
        explored += 1;
        if !prop.propagate(&mut state, &mut stats) {
            continue;
        }
        let d = &state.as_slice()[..n];
        let Some(var) = (0..n).map(|k| (next + k) % n).find(|&v| !(d[v].width() <= opts.eps)) else {
            boxes.push(prop.project_state(&state));
            continue;
        };
        let (left, right) = d[var].split();
        let mut l = state.clone();
        let mut r = state;
        l[crate::expr::VarId(var)] = left;
        r[crate::expr::VarId(var)] = right;
        stack.push((r, var + 1));
        stack.push((l, var + 1));
    }
    stats.wall_time = started.elapsed();
    SolveResult { boxes, stats, status, explored }
}

/// Interval evaluation of every `lhs - rhs` over `b` contains zero.
pub fn certify(p: &Problem, b: &IntervalBox) -> bool {
    !b.is_empty() && p.constraints.iter().all(|c| c.residual(b).contains(0.0))
}

fn touches(a: &IntervalBox, b: &IntervalBox) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| {
        let (x, y) = (x.inflate_ulp(), *y);
        !x.intersect(y).is_empty()
    })
}

/// Merges boxes that overlap or touch within one ulp in every coordinate
/// into their hulls (transitively).
pub fn merge_adjacent(boxes: &[IntervalBox]) -> Vec<IntervalBox> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if touches(&boxes[i], &boxes[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Option<IntervalBox>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        out[r] = Some(match out[r].take() {
            Some(h) => h.hull(&boxes[i]),
            None => boxes[i].clone(),
        });
    }
    out.into_iter().flatten().collect()
}
