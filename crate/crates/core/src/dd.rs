//! Double-double floating point numbers.
//!
//! A [`Dd`] is the unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi) / 2`, giving roughly 106 bits (about 31 decimal digits)
//! of significand. All singular values in this crate are carried as natural
//! logarithms in this format, so that products over many tensor factors turn
//! into sums without underflow and genuine ties survive summation.
//!
//! The error-free transformations follow Dekker and Knuth; `exp` and `ln`
//! use the argument reductions of the QD library.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

// requires |a| >= |b|
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const NEG_INFINITY: Dd = Dd {
        hi: f64::NEG_INFINITY,
        lo: 0.0,
    };
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const TAU: Dd = Dd {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };

    /// Builds a normalized value from two components.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion for every `u64`.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        let rem = n as i128 - hi as i128;
        Dd::new(hi, rem as f64)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Drops the low word. Used by the `double` precision backend.
    #[inline]
    pub fn round_to_f64(self) -> Self {
        Dd::from_f64(self.to_f64())
    }

    pub fn mul_f64(self, b: f64) -> Self {
        if !self.is_finite() || !b.is_finite() {
            return Dd::from_f64(self.hi * b);
        }
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }

    /// `k * self` with the convention `0 * -inf = 0`, which is what a sum of
    /// zero log-terms means.
    pub fn scale(self, k: u64) -> Self {
        if k == 0 {
            Dd::ZERO
        } else {
            self * Dd::from_u64(k)
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    /// `2^k * self`, exact.
    pub fn ldexp(self, k: i32) -> Self {
        if k.abs() > 1000 {
            let half = k / 2;
            return self.ldexp(half).ldexp(k - half);
        }
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn exp(self) -> Self {
        if self.hi.is_nan() {
            return self;
        }
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = self - Dd::LN_2.mul_f64(k);
        // |r| <= ln2/2; scale down by 2^10 and use exp(r) - 1 doubling.
        let r = r.ldexp(-10);
        let mut term = r;
        let mut sum = r;
        for i in 2..=11u32 {
            term = term * r / Dd::from_f64(i as f64);
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi.is_nan() || self.hi < 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        if self.hi == 0.0 {
            return Dd::NEG_INFINITY;
        }
        if self.hi.is_infinite() {
            return self;
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // self = m 2^e with m in [1, 2), so exp(-x) below stays far from underflow
        let e = self.hi.log2().floor() as i32;
        let m = self.ldexp(-e);
        // Newton on exp(x) = m; one step doubles the 53 correct bits.
        let x = Dd::from_f64(m.hi.ln());
        let x = x + m * (-x).exp() - Dd::ONE;
        let x = x + m * (-x).exp() - Dd::ONE;
        x + Dd::LN_2.mul_f64(e as f64)
    }

    /// `ln(1 + self)`, accurate for tiny arguments.
    pub fn ln_1p(self) -> Self {
        if self.hi.abs() < 1e-9 {
            // x - x^2/2 + x^3/3 - x^4/4 is below 1e-36 relative error here
            let x = self;
            let x2 = x.sqr();
            let x3 = x2 * x;
            let x4 = x2.sqr();
            return x - x2.mul_f64(0.5) + x3 / Dd::from_f64(3.0) - x4.mul_f64(0.25);
        }
        (Dd::ONE + self).ln()
    }

    /// `self^p` for positive `self`.
    pub fn powf(self, p: Dd) -> Self {
        (self.ln() * p).exp()
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            n >>= 1;
        }
        acc
    }

    /// Total order: NaN-free values compare by `(hi, lo)`.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.lo.total_cmp(&other.lo))
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl serde::Serialize for Dd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        if !s.is_finite() {
            return Dd { hi: s, lo: 0.0 };
        }
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Dd { hi: p, lo: 0.0 };
        }
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd { hi: q1, lo: 0.0 };
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, rel: f64) -> bool {
        let diff = (a - b).abs().to_f64();
        diff <= rel * b.abs().to_f64().max(1e-300)
    }

    // Reference digits computed with mpmath at 40 significant digits.
    #[test]
    fn ln_of_small_integers() {
        let ln3 = Dd::new(1.0986122886681098, -9.07129723500153e-17);
        assert!(close(Dd::from_f64(3.0).ln(), ln3, 1e-30));
        assert!(close(Dd::from_f64(2.0).ln(), Dd::LN_2, 1e-30));
        assert_eq!(Dd::ONE.ln(), Dd::ZERO);
    }

    #[test]
    fn exp_inverts_ln() {
        for &x in &[1e-20, 1e-5, 0.3, 1.0, 2.5, 17.0, 123.456, 700.0] {
            let v = Dd::from_f64(x);
            assert!(close(v.ln().exp(), v, 4e-31), "x = {x}");
            assert!(close(v.exp().ln(), v, 4e-31), "x = {x}");
        }
    }

    #[test]
    fn division_round_trip() {
        let a = Dd::PI;
        let b = Dd::from_f64(7.0);
        assert!(close((a / b) * b, a, 1e-31));
    }

    #[test]
    fn ties_survive_summation() {
        // 9 = 3 * 3: ln 9 against ln 3 + ln 3
        let l9 = Dd::from_f64(9.0).ln();
        let l3 = Dd::from_f64(3.0).ln();
        assert!((l9 - (l3 + l3)).abs().to_f64() < 1e-30);
        // 12 = 2 * 6 = 3 * 4
        let a = Dd::from_f64(2.0).ln() + Dd::from_f64(6.0).ln();
        let b = Dd::from_f64(3.0).ln() + Dd::from_f64(4.0).ln();
        assert!((a - b).abs().to_f64() < 1e-30);
    }

    #[test]
    fn from_u64_is_exact() {
        let n = u64::MAX - 12345;
        let d = Dd::from_u64(n);
        assert_eq!(d.hi() as i128 + d.lo() as i128, n as i128);
    }

    #[test]
    fn infinities_do_not_poison_sums() {
        let s = Dd::NEG_INFINITY + Dd::from_f64(3.0);
        assert_eq!(s.hi(), f64::NEG_INFINITY);
        assert_eq!(Dd::NEG_INFINITY.scale(0), Dd::ZERO);
    }

    #[test]
    fn ln_1p_tiny() {
        let x = Dd::from_f64(1e-12);
        let expect = Dd::new(9.999999999995e-13, 2.4217940103012377e-29);
        assert!(close(x.ln_1p(), expect, 1e-30));
    }
}
