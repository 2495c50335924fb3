//! Relational (inverse) projections of the primitive operators.
//!
//! Each function returns an interval containing every `x` that can be
//! completed into a solution of the relation with the other arguments taken
//! from their intervals. Functions that take `within` intersect the branches
//! of a multi-valued inverse with the caller's current domain before taking
//! the hull, which keeps the result the hull of the true projection.

use super::round::*;
use super::Interval;

/// `x` in `x + y = z`.
pub fn inv_add(z: Interval, y: Interval) -> Interval {
    z - y
}

/// `x` in `x * y = z`, restricted to `within`.
pub fn inv_mul(z: Interval, y: Interval, within: Interval) -> Interval {
    Interval::hull_of(z.div_extended(y).into_iter().map(|b| b.intersect(within)))
}

/// `x` in `x^n = z` for even `n`: hull of `-root(z) ∪ root(z)` inside `within`.
pub fn inv_pow_even(z: Interval, n: u32, within: Interval) -> Interval {
    debug_assert!(n % 2 == 0);
    let z = z.intersect(Interval::POSITIVE);
    if z.is_empty() {
        return Interval::EMPTY;
    }
    let r_lo = root_down(z.lo(), n);
    let r_hi = root_up(z.hi(), n);
    let pos = Interval::new(r_lo, r_hi).intersect(within);
    let neg = Interval::new(-r_hi, -r_lo).intersect(within);
    pos.hull(neg)
}

/// `x` in `x^n = z` for odd `n`.
pub fn inv_pow_odd(z: Interval, n: u32) -> Interval {
    debug_assert!(n % 2 == 1);
    if z.is_empty() {
        return z;
    }
    let lo = if z.lo() >= 0.0 {
        root_down(z.lo(), n)
    } else {
        -root_up(-z.lo(), n)
    };
    let hi = if z.hi() >= 0.0 {
        root_up(z.hi(), n)
    } else {
        -root_down(-z.hi(), n)
    };
    Interval::new(lo, hi)
}

/// `x` in `x^n = z`, restricted to `within`.
pub fn inv_pow(z: Interval, n: u32, within: Interval) -> Interval {
    if n % 2 == 0 {
        inv_pow_even(z, n, within)
    } else {
        inv_pow_odd(z, n).intersect(within)
    }
}

/// `x` in `exp(x) = z`. No preimage when `z` has no positive part.
pub fn inv_exp(z: Interval) -> Interval {
    z.ln()
}

/// `x` in `sqrt(x) = z`.
pub fn inv_sqrt(z: Interval) -> Interval {
    let z = z.intersect(Interval::POSITIVE);
    if z.is_empty() {
        return z;
    }
    z.sqr()
}

/// `x` in `cos(x) = z`, restricted to `within`. Only the branches next to
/// each end of `within` are enumerated, so unbounded domains are fine.
pub fn inv_cos(z: Interval, within: Interval) -> Interval {
    let base = z.acos(); // [p, q] ⊆ [0, pi]
    if base.is_empty() || within.is_empty() {
        return Interval::EMPTY;
    }
    let (p, q) = (base.lo(), base.hi());
    // branch k: [2k*pi + p, 2k*pi + q] and [2k*pi - q, 2k*pi - p]
    let branches = |k: i64| -> [Interval; 2] {
        let kf = 2.0 * k as f64;
        let (c_lo, c_hi) = if k >= 0 {
            (mul_down(kf, PI_DOWN), mul_up(kf, PI_UP))
        } else {
            (mul_down(kf, PI_UP), mul_up(kf, PI_DOWN))
        };
        [
            Interval::new(add_down(c_lo, p), add_up(c_hi, q)),
            Interval::new(sub_down(c_lo, q), sub_up(c_hi, p)),
        ]
    };
    const LARGE: f64 = 1e15;
    let period = 2.0 * PI_DOWN;

    let lo = if within.lo() < -LARGE {
        within.lo()
    } else {
        let k0 = (within.lo() / period).floor() as i64;
        let mut best = f64::INFINITY;
        for k in k0 - 1..=k0 + 2 {
            for b in branches(k) {
                let c = b.intersect(within);
                if !c.is_empty() {
                    best = best.min(c.lo());
                }
            }
        }
        best
    };
    let hi = if within.hi() > LARGE {
        within.hi()
    } else {
        let k1 = (within.hi() / period).floor() as i64;
        let mut best = f64::NEG_INFINITY;
        for k in k1 - 1..=k1 + 2 {
            for b in branches(k) {
                let c = b.intersect(within);
                if !c.is_empty() {
                    best = best.max(c.hi());
                }
            }
        }
        best
    };
    Interval::new(lo, hi)
}
