//! Interval constraint propagation with HC3 and HC4 style narrowing, a
//! branch-and-prune solver and a small benchmark suite.
//!
//! ```
//! use hcsolve::{parse, propagate::{bounds_consistency, Strategy}};
//!
//! let p = parse("var x in [-10,10]; var y in [-10,10]; var z in [0,16]; 2*x = z - y^2;").unwrap();
//! let (d, _) = bounds_consistency(&p, Strategy::Hc4, &p.domains);
//! assert_eq!(d[p.var_id("x").unwrap()].hi(), 8.0);
//! ```

pub mod bench;
pub mod cli;
pub mod decompose;
pub mod domain;
pub mod expr;
pub mod interval;
pub mod parser;
pub mod propagate;
pub mod revise;
pub mod solve;

pub use domain::IntervalBox;
pub use expr::{Constraint, Expr, Problem, VarId};
pub use interval::Interval;
pub use parser::{parse, ParseError};
pub use propagate::{Stats, Strategy};
