use std::fmt;
use std::ops::{Index, IndexMut};

use crate::expr::VarId;
use crate::interval::Interval;

/// Cartesian product of variable domains, indexed by [`VarId`].
///
/// An empty coordinate makes the whole box empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> IntervalBox {
        IntervalBox { dims }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.iter().any(|d| d.is_empty())
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.dims
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.dims.iter()
    }

    pub fn push(&mut self, d: Interval) {
        self.dims.push(d);
    }

    /// First `n` coordinates.
    pub fn truncated(&self, n: usize) -> IntervalBox {
        IntervalBox::new(self.dims[..n].to_vec())
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.len() == other.len() && self.dims.iter().zip(&other.dims).all(|(a, b)| a.subset_of(*b))
    }

    pub fn intersect(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox::new(self.dims.iter().zip(&other.dims).map(|(a, b)| a.intersect(*b)).collect())
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox::new(self.dims.iter().zip(&other.dims).map(|(a, b)| a.hull(*b)).collect())
    }

    /// Largest coordinate width.
    pub fn max_width(&self) -> f64 {
        self.dims.iter().map(|d| d.width()).fold(0.0, f64::max)
    }

    /// Sum of coordinate widths (may be infinite).
    pub fn total_width(&self) -> f64 {
        self.dims.iter().map(|d| d.width()).sum()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.dims.len() == p.len() && self.dims.iter().zip(p).all(|(d, &x)| d.contains(x))
    }

    /// Every coordinate is the empty interval.
    pub fn empty_like(&self) -> IntervalBox {
        IntervalBox::new(vec![Interval::EMPTY; self.len()])
    }
}

impl Index<VarId> for IntervalBox {
    type Output = Interval;
    fn index(&self, v: VarId) -> &Interval {
        &self.dims[v.0]
    }
}

impl IndexMut<VarId> for IntervalBox {
    fn index_mut(&mut self, v: VarId) -> &mut Interval {
        &mut self.dims[v.0]
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalBox::new(iter.into_iter().collect())
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "empty");
        }
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
