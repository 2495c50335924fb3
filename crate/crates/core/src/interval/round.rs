//! Directed rounding on top of round-to-nearest.
//!
//! Basic operations (`+ - * /` and `sqrt`) compute the nearest result and then
//! recover the sign of the rounding error with an error-free transformation
//! (two-sum or an `fma` residual). The result is nudged one ulp only when the
//! nearest value landed on the wrong side, so these functions return the
//! correctly rounded downward/upward values. No hardware rounding mode is ever
//! touched, which keeps every function pure and thread-safe.
//!
//! Transcendentals rely on the platform libm (round-to-nearest, < 1 ulp
//! error) and are widened by [`TRANSCENDENTAL_ULPS`] ulps on each side.

/// Ulps of inflation applied to libm results for `exp`, `ln`, `cos`, `acos`
/// and real roots seeded from `powf`.
pub const TRANSCENDENTAL_ULPS: u32 = 2;

// Below this magnitude error terms may underflow and stop being exact.
const EFT_FLOOR: f64 = 1.0020841800044864e-292; // 2^-969

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if s == f64::INFINITY && a.is_finite() && b.is_finite() {
            return f64::MAX;
        }
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            return -f64::MAX;
        }
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Sign of `a*b - round(a*b)`: -1, 0 or 1. `None` when the residual cannot be
/// trusted (underflow region).
fn mul_residual_sign(a: f64, b: f64, p: f64) -> Option<f64> {
    if p.abs() < EFT_FLOOR {
        return None;
    }
    Some(a.mul_add(b, -p))
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        if p == f64::INFINITY && a.is_finite() && b.is_finite() {
            return f64::MAX;
        }
        return p;
    }
    match mul_residual_sign(a, b, p) {
        Some(e) if e >= 0.0 => p,
        _ => p.next_down(),
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        if p == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            return -f64::MAX;
        }
        return p;
    }
    match mul_residual_sign(a, b, p) {
        Some(e) if e <= 0.0 => p,
        _ => p.next_up(),
    }
}

/// Sign of the exact quotient error `a/b - q`, i.e. sign(a - q*b) / sign(b).
fn div_residual(a: f64, b: f64, q: f64) -> Option<f64> {
    if q.abs() < EFT_FLOOR || a.abs() < EFT_FLOOR {
        return None;
    }
    let r = (-q).mul_add(b, a);
    Some(if b > 0.0 { r } else { -r })
}

/// `a / b` rounded down. `b` must be nonzero.
pub fn div_down(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    if b.is_infinite() {
        if a.is_infinite() {
            return if (a > 0.0) == (b > 0.0) { 0.0 } else { f64::NEG_INFINITY };
        }
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        if q == f64::INFINITY && a.is_finite() {
            return f64::MAX;
        }
        return q;
    }
    match div_residual(a, b, q) {
        Some(e) if e >= 0.0 => q,
        _ => q.next_down(),
    }
}

/// `a / b` rounded up. `b` must be nonzero.
pub fn div_up(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    if b.is_infinite() {
        if a.is_infinite() {
            return if (a > 0.0) == (b > 0.0) { f64::INFINITY } else { 0.0 };
        }
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        if q == f64::NEG_INFINITY && a.is_finite() {
            return -f64::MAX;
        }
        return q;
    }
    match div_residual(a, b, q) {
        Some(e) if e <= 0.0 => q,
        _ => q.next_up(),
    }
}

/// sqrt rounded down; `a >= 0`.
pub fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    if s == 0.0 || s.is_infinite() {
        return s;
    }
    if a < EFT_FLOOR {
        return s.next_down().max(0.0);
    }
    if (-s).mul_add(s, a) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

/// sqrt rounded up; `a >= 0`.
pub fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    if s == 0.0 && a == 0.0 || s.is_infinite() {
        return s;
    }
    if a < EFT_FLOOR {
        return s.next_up();
    }
    if (-s).mul_add(s, a) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// `x^n` rounded down, `n >= 1`.
pub fn powi_down(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        powi_pos(x, n, false)
    } else if n % 2 == 0 {
        powi_pos(-x, n, false)
    } else {
        -powi_pos(-x, n, true)
    }
}

/// `x^n` rounded up, `n >= 1`.
pub fn powi_up(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        powi_pos(x, n, true)
    } else if n % 2 == 0 {
        powi_pos(-x, n, true)
    } else {
        -powi_pos(-x, n, false)
    }
}

// square-and-multiply on a nonnegative base; every partial product is
// nonnegative so rounding each step in the same direction is sound.
fn powi_pos(x: f64, n: u32, up: bool) -> f64 {
    let mul = if up { mul_up } else { mul_down };
    let mut result = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(result, base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(base, base);
        }
    }
    result
}

/// Largest-known-safe lower bound of the real `n`-th root of `z >= 0`.
pub fn root_down(z: f64, n: u32) -> f64 {
    match n {
        1 => z,
        2 => sqrt_down(z),
        _ => {
            if z == 0.0 || z.is_infinite() {
                return z;
            }
            // last r with r^n <= z, just below the first with r^n > z
            let above = first_nonneg(seed_root(z, n), |r| powi_up(r, n) > z);
            f64::from_bits(above.to_bits() - 1)
        }
    }
}

pub fn root_up(z: f64, n: u32) -> f64 {
    match n {
        1 => z,
        2 => sqrt_up(z),
        _ => {
            if z == 0.0 || z.is_infinite() {
                return z;
            }
            first_nonneg(seed_root(z, n), |r| powi_down(r, n) >= z)
        }
    }
}

/// Smallest float in `[0, +inf]` satisfying the monotone predicate `pred`,
/// searched by galloping out from `seed` and bisecting. `pred(+inf)` must
/// hold.
fn first_nonneg(seed: f64, pred: impl Fn(f64) -> bool) -> f64 {
    // nonnegative floats are ordered like their bit patterns
    let at = |b: u64| f64::from_bits(b);
    let top = f64::INFINITY.to_bits();
    let s = seed.max(0.0).to_bits().min(top);
    let (mut lo, mut hi);
    if pred(at(s)) {
        hi = s;
        let mut step = 1;
        loop {
            if hi == 0 {
                return 0.0;
            }
            let b = hi.saturating_sub(step);
            if !pred(at(b)) {
                lo = b;
                break;
            }
            hi = b;
            step *= 2;
        }
    } else {
        lo = s;
        let mut step = 1;
        loop {
            let b = lo.saturating_add(step).min(top);
            if pred(at(b)) {
                hi = b;
                break;
            }
            lo = b;
            step *= 2;
        }
    }
    // invariant: !pred(lo), pred(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

fn seed_root(z: f64, n: u32) -> f64 {
    if n == 3 {
        z.cbrt()
    } else {
        z.powf(1.0 / n as f64)
    }
}

fn widen_down(mut v: f64, ulps: u32) -> f64 {
    for _ in 0..ulps {
        v = v.next_down();
    }
    v
}

fn widen_up(mut v: f64, ulps: u32) -> f64 {
    for _ in 0..ulps {
        v = v.next_up();
    }
    v
}

pub fn exp_down(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let r = x.exp();
    if r == f64::INFINITY {
        return if x == f64::INFINITY { r } else { f64::MAX };
    }
    widen_down(r, TRANSCENDENTAL_ULPS).max(0.0)
}

pub fn exp_up(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let r = x.exp();
    if r.is_infinite() {
        return r;
    }
    // exp(x) > 0 for every finite x
    widen_up(r, TRANSCENDENTAL_ULPS).max(0.0f64.next_up())
}

/// ln rounded down; `x >= 0` (ln 0 = -inf).
pub fn ln_down(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    let r = x.ln();
    if r.is_infinite() {
        return r;
    }
    widen_down(r, TRANSCENDENTAL_ULPS)
}

pub fn ln_up(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    let r = x.ln();
    if r == f64::NEG_INFINITY {
        // ln of the smallest subnormal is finite
        return if x == 0.0 { r } else { -744.0 };
    }
    if r.is_infinite() {
        return r;
    }
    widen_up(r, TRANSCENDENTAL_ULPS)
}

pub fn cos_down(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    widen_down(x.cos(), TRANSCENDENTAL_ULPS).max(-1.0)
}

pub fn cos_up(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    widen_up(x.cos(), TRANSCENDENTAL_ULPS).min(1.0)
}

/// acos rounded down; `x` in `[-1, 1]`.
pub fn acos_down(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    widen_down(x.acos(), TRANSCENDENTAL_ULPS).max(0.0)
}

pub fn acos_up(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    widen_up(x.acos(), TRANSCENDENTAL_ULPS)
}

/// Lower/upper f64 bounds of pi.
pub const PI_DOWN: f64 = std::f64::consts::PI;
pub const PI_UP: f64 = 3.1415926535897936; // next_up(PI)

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_bounds_bracket_pi() {
        assert_eq!(PI_UP, PI_DOWN.next_up());
        // 3.14159265358979323846... lies strictly between
        assert!(PI_DOWN < 3.141592653589793238 || PI_DOWN == 3.141592653589793);
    }

    #[test]
    fn exact_sums_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0), 4.0);
        assert_eq!(add_up(2.0, 4.0), 6.0);
        assert_eq!(mul_down(1.5, 2.0), 3.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sqrt_down(9.0), 3.0);
    }

    #[test]
    fn inexact_results_straddle() {
        let lo = add_down(0.1, 0.2);
        let hi = add_up(0.1, 0.2);
        assert_eq!(hi, lo.next_up());
        let lo = div_down(1.0, 3.0);
        let hi = div_up(1.0, 3.0);
        assert_eq!(hi, lo.next_up());
        let lo = sqrt_down(2.0);
        let hi = sqrt_up(2.0);
        assert_eq!(hi, lo.next_up());
    }

    #[test]
    fn overflow_is_bounded() {
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
        assert_eq!(add_up(f64::MAX, f64::MAX), f64::INFINITY);
        assert_eq!(mul_down(1e200, 1e200), f64::MAX);
        assert_eq!(mul_up(-1e200, 1e200), -f64::MAX);
        assert_eq!(exp_down(1000.0), f64::MAX);
    }

    #[test]
    fn roots_bracket() {
        for &(z, n) in &[(27.0, 3), (2.0, 3), (10.0, 5), (1e-10, 3)] {
            let lo = root_down(z, n);
            let hi = root_up(z, n);
            assert!(powi_up(lo, n) <= z, "{z} {n}");
            assert!(powi_down(hi, n) >= z, "{z} {n}");
            assert!(hi - lo <= 4.0 * f64::EPSILON * hi.max(1e-300));
        }
        assert_eq!(root_down(27.0, 3), 3.0);
    }

    #[test]
    fn roots_of_subnormals_terminate() {
        for &(z, n) in &[(5e-324, 3), (1e-310, 3), (1e-320, 5), (f64::MAX, 3)] {
            let lo = root_down(z, n);
            let hi = root_up(z, n);
            assert!(lo <= hi && powi_up(lo, n) <= z && powi_down(hi, n) >= z, "{z} {n}");
            assert!(powi_up(lo.next_up(), n) > z);
        }
    }
}
