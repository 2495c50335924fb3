//! Closed floating-point intervals with outward rounding.
//!
//! Endpoints are `f64` and may be infinite; NaN never appears. The empty set
//! is a dedicated value ([`Interval::EMPTY`]) stored as `[+inf, -inf]`, so
//! equality and hashing stay well defined and every operation on it returns
//! it again.
//!
//! Rounding policy: basic operations are correctly rounded outward through
//! error-free transformations (see [`round`]); `exp`, `ln`, `cos` and `acos`
//! are widened by [`round::TRANSCENDENTAL_ULPS`] ulps around the libm value.

pub mod inverse;
pub mod round;

use std::fmt;
use std::hash::{Hash, Hasher};

use round::*;

#[derive(Clone, Copy, Debug)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    /// `[lo, hi]`, or `EMPTY` when `lo > hi`, a bound is NaN, or the interval
    /// would contain no real number (`[inf, inf]`).
    pub fn new(lo: f64, hi: f64) -> Interval {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Interval::EMPTY;
        }
        // drop the sign of zero so equal sets have equal bits
        Interval {
            lo: lo + 0.0,
            hi: hi + 0.0,
        }
    }

    pub fn point(x: f64) -> Interval {
        Interval::new(x, x)
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.lo > self.hi
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other`. The empty set is a subset of everything.
    pub fn subset_of(self, other: Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    /// `hi - lo` rounded up; 0 for the empty interval.
    pub fn width(self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            sub_up(self.hi, self.lo)
        }
    }

    /// A finite number inside the interval; strictly inside when the
    /// interval holds more than one float. Panics on the empty set.
    pub fn midpoint(self) -> f64 {
        assert!(!self.is_empty(), "midpoint of an empty interval");
        let (lo, hi) = (self.lo, self.hi);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => 0.0,
            (false, true) => {
                if hi > 0.0 {
                    0.0
                } else {
                    (-f64::MAX).max((2.0 * hi - 1.0).min(hi.next_down()))
                }
            }
            (true, false) => {
                if lo < 0.0 {
                    0.0
                } else {
                    f64::MAX.min((2.0 * lo + 1.0).max(lo.next_up()))
                }
            }
            (true, true) => {
                let m = 0.5 * lo + 0.5 * hi;
                if lo < m && m < hi {
                    m
                } else if hi > lo {
                    // two adjacent floats, or halving underflowed
                    let m = lo + 0.5 * (hi - lo);
                    if lo < m && m < hi {
                        m
                    } else {
                        lo
                    }
                } else {
                    lo
                }
            }
        }
    }

    /// Bisects at the midpoint. Contract: the interval is nonempty and holds
    /// more than one float.
    pub fn split(self) -> (Interval, Interval) {
        assert!(
            !self.is_empty() && self.lo < self.hi,
            "split of an empty or degenerate interval"
        );
        let m = self.midpoint();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    pub fn intersect(self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Interval hull of two intervals.
    pub fn hull(self, other: Interval) -> Interval {
        if self.is_empty() {
            return other;
        }
        if other.is_empty() {
            return self;
        }
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Smallest interval containing every input; `EMPTY` for no input.
    pub fn hull_of<I: IntoIterator<Item = Interval>>(items: I) -> Interval {
        items
            .into_iter()
            .fold(Interval::EMPTY, |acc, it| acc.hull(it))
    }

    /// Widen by one ulp on each finite side.
    pub fn inflate_ulp(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval::new(self.lo.next_down(), self.hi.next_up())
    }

    pub fn neg(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval::new(-self.hi, -self.lo)
    }

    pub fn add(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(add_down(self.lo, other.lo), add_up(self.hi, other.hi))
    }

    pub fn sub(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(sub_down(self.lo, other.hi), sub_up(self.hi, other.lo))
    }

    pub fn mul(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        let (a, b, c, d) = (self.lo, self.hi, other.lo, other.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval::new(lo, hi)
    }

    /// Interval division. A divisor containing zero yields the hull of the
    /// extended-division branches, so the result is always one interval.
    pub fn div(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        if !other.contains(0.0) {
            return self.div_nonzero(other);
        }
        Interval::hull_of(self.div_extended(other))
    }

    fn div_nonzero(self, other: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, other.lo, other.hi);
        let lo = div_down(a, c)
            .min(div_down(a, d))
            .min(div_down(b, c))
            .min(div_down(b, d));
        let hi = div_up(a, c)
            .max(div_up(a, d))
            .max(div_up(b, c))
            .max(div_up(b, d));
        Interval::new(lo, hi)
    }

    /// `{x | x * other ∩ self ≠ ∅}` as up to two intervals. Used by
    /// [`Interval::div`] (forward, hulled) and by the relational projections
    /// (intersected with the current domain before hulling).
    pub(crate) fn div_extended(self, other: Interval) -> Vec<Interval> {
        if self.is_empty() || other.is_empty() {
            return vec![];
        }
        if !other.contains(0.0) {
            return vec![self.div_nonzero(other)];
        }
        if self.contains(0.0) {
            return vec![Interval::ENTIRE];
        }
        let (c, d) = (other.lo, other.hi);
        if c == 0.0 && d == 0.0 {
            // x * 0 never meets a set without zero
            return vec![];
        }
        let mut out = Vec::with_capacity(2);
        if self.lo > 0.0 {
            let a = self.lo;
            if c < 0.0 {
                out.push(Interval::new(f64::NEG_INFINITY, div_up(a, c)));
            }
            if d > 0.0 {
                out.push(Interval::new(div_down(a, d), f64::INFINITY));
            }
        } else {
            let b = self.hi;
            if c < 0.0 {
                out.push(Interval::new(div_down(b, c), f64::INFINITY));
            }
            if d > 0.0 {
                out.push(Interval::new(f64::NEG_INFINITY, div_up(b, d)));
            }
        }
        out
    }

    /// `x^n` for `n >= 1`; even powers use the symmetric-range rule.
    pub fn pow_int(self, n: u32) -> Interval {
        assert!(n >= 1, "pow_int exponent must be positive");
        if self.is_empty() {
            return self;
        }
        if n == 1 {
            return self;
        }
        if n % 2 == 1 {
            return Interval::new(powi_down(self.lo, n), powi_up(self.hi, n));
        }
        let mag = self.lo.abs().max(self.hi.abs());
        let mig = if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        };
        Interval::new(powi_down(mig, n), powi_up(mag, n))
    }

    pub fn sqr(self) -> Interval {
        self.pow_int(2)
    }

    /// Square root over the nonnegative part; `EMPTY` if there is none.
    pub fn sqrt(self) -> Interval {
        let d = self.intersect(Interval::POSITIVE);
        if d.is_empty() {
            return d;
        }
        Interval::new(sqrt_down(d.lo), sqrt_up(d.hi))
    }

    pub fn exp(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval::new(exp_down(self.lo), exp_up(self.hi))
    }

    /// Natural log over the positive part; `EMPTY` when `hi <= 0`.
    pub fn ln(self) -> Interval {
        if self.is_empty() || self.hi <= 0.0 {
            return Interval::EMPTY;
        }
        let lo = if self.lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_down(self.lo)
        };
        Interval::new(lo, ln_up(self.hi))
    }

    pub fn cos(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        let (lo, hi) = (self.lo, self.hi);
        // beyond this range argument reduction is not worth tracking
        const LARGE: f64 = 1e9;
        if !(lo.abs() < LARGE && hi.abs() < LARGE) || sub_down(hi, lo) >= 2.0 * PI_UP {
            return Interval::new(-1.0, 1.0);
        }
        let mut out = Interval::new(cos_down(lo), cos_up(lo)).hull(Interval::new(cos_down(hi), cos_up(hi)));
        // any multiple k*pi that may lie in [lo, hi] contributes an extremum
        let k_lo = (lo / PI_UP).floor() as i64 - 1;
        let k_hi = (hi / PI_DOWN).ceil() as i64 + 1;
        for k in k_lo..=k_hi {
            let kf = k as f64;
            let (a, b) = if k >= 0 {
                (mul_down(kf, PI_DOWN), mul_up(kf, PI_UP))
            } else {
                (mul_down(kf, PI_UP), mul_up(kf, PI_DOWN))
            };
            if b >= lo && a <= hi {
                let extremum = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                out = out.hull(Interval::point(extremum));
            }
        }
        out.intersect(Interval::new(-1.0, 1.0))
    }

    /// Interval containing `acos(self ∩ [-1, 1])`.
    pub fn acos(self) -> Interval {
        let d = self.intersect(Interval::new(-1.0, 1.0));
        if d.is_empty() {
            return d;
        }
        Interval::new(acos_down(d.hi), acos_up(d.lo))
    }
}

impl PartialEq for Interval {
    fn eq(&self, other: &Interval) -> bool {
        (self.is_empty() && other.is_empty()) || (self.lo == other.lo && self.hi == other.hi)
    }
}

impl Eq for Interval {}

impl Hash for Interval {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // zeros are normalized at construction
        self.lo.to_bits().hash(state);
        self.hi.to_bits().hash(state);
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ENTIRE
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(self, rhs)
    }
}

impl std::ops::Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        Interval::div(self, rhs)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(self)
    }
}

/// Endpoint rendering: 17 significant digits, `inf`/`-inf` for infinities.
pub fn format_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{:?}", x)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "empty")
        } else {
            write!(f, "[{},{}]", format_bound(self.lo), format_bound(self.hi))
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid interval syntax: {0:?}")]
pub struct ParseIntervalError(String);

impl std::str::FromStr for Interval {
    type Err = ParseIntervalError;

    /// Parses the [`Display`](fmt::Display) form back. Bounds are read with
    /// round-to-nearest, which recovers the printed doubles exactly.
    fn from_str(s: &str) -> Result<Interval, ParseIntervalError> {
        let t = s.trim();
        if t == "empty" {
            return Ok(Interval::EMPTY);
        }
        let err = || ParseIntervalError(s.to_string());
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(err)?;
        let (a, b) = inner.split_once(',').ok_or_else(err)?;
        let a: f64 = a.trim().parse().map_err(|_| err())?;
        let b: f64 = b.trim().parse().map_err(|_| err())?;
        let iv = Interval::new(a, b);
        if iv.is_empty() {
            return Err(err());
        }
        Ok(iv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(0.0, 0.0) + iv(-1.5, 7.25), iv(-1.5, 7.25));
        assert_eq!(iv(1.0, 2.0) * iv(-1.0, 3.0), iv(-2.0, 6.0));
        assert_eq!(iv(1.0, 1.0) / iv(-1.0, 2.0), Interval::ENTIRE);
        assert_eq!(iv(1.0, 2.0) / iv(0.0, 2.0), iv(0.5, f64::INFINITY));
        assert!((iv(1.0, 2.0) / iv(0.0, 0.0)).is_empty());
    }

    #[test]
    fn powers() {
        assert_eq!(iv(-2.0, 3.0).pow_int(2), iv(0.0, 9.0));
        assert_eq!(iv(-2.0, 3.0).pow_int(3), iv(-8.0, 27.0));
        assert_eq!(iv(2.0, 2.0).pow_int(1), iv(2.0, 2.0));
        assert_eq!(iv(-3.0, -2.0).pow_int(2), iv(4.0, 9.0));
        // tighter than multiplication when 0 is inside
        assert_eq!(iv(-2.0, 3.0) * iv(-2.0, 3.0), iv(-6.0, 9.0));
    }

    #[test]
    fn empty_is_absorbing() {
        let e = Interval::EMPTY;
        let a = iv(1.0, 2.0);
        for r in [e + a, a - e, e * a, a / e, e.exp(), e.cos(), e.sqrt(), e.pow_int(2), -e] {
            assert!(r.is_empty());
        }
        assert_eq!(Interval::new(3.0, 1.0), Interval::EMPTY);
    }

    #[test]
    fn set_operations() {
        assert_eq!(Interval::hull_of([iv(1.0, 2.0), iv(5.0, 6.0)]), iv(1.0, 6.0));
        assert!(iv(1.0, 3.0).intersect(iv(4.0, 5.0)).is_empty());
        assert_eq!(iv(0.0, 4.0).split(), (iv(0.0, 2.0), iv(2.0, 4.0)));
        assert_eq!(iv(1.0, 1.0).midpoint(), 1.0);
        let adj = iv(1.0, 1.0f64.next_up());
        assert_eq!(adj.midpoint(), 1.0);
        assert!(Interval::ENTIRE.midpoint().is_finite());
    }

    #[test]
    #[should_panic]
    fn split_degenerate_panics() {
        iv(2.0, 2.0).split();
    }

    #[test]
    fn exp_near_zero() {
        let r = iv(0.0, 0.0).exp();
        assert!(r.lo() <= 1.0 && 1.0 <= r.hi());
        assert!(r.hi() - r.lo() <= 2.0 * f64::EPSILON);
        let r = iv(0.0, 1.0).exp();
        assert_eq!(r.lo(), 1.0);
        // nearest f64 to e lies below e, so the tight upper bound is its successor
        let e = std::f64::consts::E;
        assert!(r.hi() >= e.next_up());
        assert!(r.hi() <= e.next_up().next_up().next_up());
    }

    #[test]
    fn cos_ranges() {
        let r = iv(0.0, PI_UP).cos();
        assert_eq!(r, iv(-1.0, 1.0));
        let r = iv(0.1, 0.2).cos();
        assert!(r.contains(0.1f64.cos()) && r.contains(0.2f64.cos()));
        assert!(r.hi() < 1.0);
        assert_eq!(iv(-0.5, 0.5).cos().hi(), 1.0);
        assert_eq!(iv(3.0, 3.3).cos().lo(), -1.0);
    }

    #[test]
    fn display_round_trip() {
        for x in [iv(0.1, 0.30000000000000004), Interval::ENTIRE, iv(-1e8, 0.0), Interval::EMPTY] {
            let s = x.to_string();
            assert_eq!(s.parse::<Interval>().unwrap(), x, "{s}");
        }
        assert_eq!(iv(f64::NEG_INFINITY, 1.0).to_string(), "[-inf,1.0]");
    }

    #[test]
    fn ln_of_nonpositive_is_empty() {
        assert!(iv(-2.0, -1.0).ln().is_empty());
        assert!(iv(-2.0, 0.0).ln().is_empty());
        assert_eq!(iv(0.0, 1.0).ln(), iv(f64::NEG_INFINITY, 0.0));
    }
}
