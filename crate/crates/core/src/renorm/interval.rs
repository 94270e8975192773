//! Closed floating-point intervals with outward rounding.
//!
//! Sums, products and quotients are exact-or-widened using the FMA residual, so an
//! operation whose result is representable does not lose its exactness.
//! Logarithms are widened by two ulps on each side.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a/b − q` where `q = fl(a/b)`.
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    if div_residual_sign(a, b, q) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    if div_residual_sign(a, b, q) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

impl Interval {
    pub const fn exact(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Natural logarithm of a positive interval.
    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "logarithm of a non-positive interval");
        let lo = if self.lo == 1.0 {
            0.0
        } else {
            self.lo.ln().next_down().next_down()
        };
        let hi = if self.hi == 1.0 {
            0.0
        } else {
            self.hi.ln().next_up().next_up()
        };
        Interval { lo, hi }
    }

    /// `log_base(self)` for a base interval strictly above 1.
    pub fn log(self, ln_base: Interval) -> Self {
        self.ln() / ln_base
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        self + (-o)
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, o: Interval) -> Interval {
        let c = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in c {
            lo = lo.min(mul_down(a, b));
            hi = hi.max(mul_up(a, b));
        }
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    #[inline]
    fn div(self, o: Interval) -> Interval {
        assert!(
            o.lo > 0.0 || o.hi < 0.0,
            "division by an interval containing zero"
        );
        let c = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in c {
            lo = lo.min(div_down(a, b));
            hi = hi.max(div_up(a, b));
        }
        Interval { lo, hi }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::exact(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_stay_exact() {
        let a = Interval::exact(-16.0);
        let b = Interval::exact(3.0);
        assert!((a * b).is_exact());
        assert!((a + b).is_exact());
        assert!((a / Interval::exact(2.0)).is_exact());
        assert_eq!(Interval::exact(1.0).ln(), Interval::exact(0.0));
    }

    #[test]
    fn inexact_operations_enclose() {
        let third = Interval::exact(1.0) / Interval::exact(3.0);
        assert!(third.lo < third.hi);
        assert!(third.lo * 3.0 <= 1.0 && third.hi * 3.0 >= 1.0);
        let s = Interval::exact(0.1) + Interval::exact(0.2);
        assert!(s.lo <= 0.30000000000000004 && s.hi >= 0.30000000000000004);
        assert!(s.lo < s.hi);
        let l = Interval::exact(10.0).ln();
        assert!(l.lo < std::f64::consts::LN_10 && std::f64::consts::LN_10 < l.hi);
    }

    #[test]
    fn logs_in_base_l() {
        let lnl = Interval::exact(1e6).ln();
        let v = Interval::exact(1e3).log(lnl);
        assert!(v.lo <= 0.5 && 0.5 <= v.hi);
        assert!(v.hi - v.lo < 1e-14);
    }
}
