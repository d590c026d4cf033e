//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64` with
//! `|lo| <= ulp(hi)/2`, giving roughly 106 bits of significand.
//!
//! The basic operations follow the error-free transformations of Dekker and
//! Knuth (two-sum, fused two-product). Elementary functions use argument
//! reduction plus Taylor series and are accurate to a few units in the last
//! double-double place over the ranges this crate uses.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use super::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

const PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const TWO_PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::TAU, lo: 2.4492935982947064e-16 };
const HALF_PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };
const LN2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
// 2^-104
const EPS: f64 = 4.93038065763132e-32;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    fn sqr(self) -> Self {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn trunc(self) -> Self {
        let t = self.hi.trunc();
        if t == self.hi {
            Self::from_sum(t, self.lo.trunc())
        } else {
            Self { hi: t, lo: 0.0 }
        }
    }

    pub fn round(self) -> Self {
        let r = self.hi.round();
        if r == self.hi {
            Self::from_sum(r, self.lo.round())
        } else if (r - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // tie in hi broken by the sign of lo
            let r = if self.lo > 0.0 { self.hi.ceil() } else { self.hi.floor() };
            Self { hi: r, lo: 0.0 }
        } else {
            Self { hi: r, lo: 0.0 }
        }
    }

    fn exp_impl(self) -> Self {
        if self.hi > 709.0 {
            return Self { hi: f64::INFINITY, lo: 0.0 };
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        // exp(x) = 2^k * exp(r)^(2^9), |r| <= ln2/1024
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-9);
        let mut term = r;
        let mut sum = r;
        for n in 2..=20 {
            term = term * r / Self::of(n as f64);
            sum += term;
            if term.hi.abs() < EPS * 1e-3 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        // (1 + s)^2 - 1 = 2s + s^2, applied nine times keeps the small part separate
        for _ in 0..9 {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        (sum + Self::ONE).ldexp(k as i32)
    }

    fn ln_impl(self) -> Self {
        if self.hi <= 0.0 {
            return Self { hi: f64::NAN, lo: 0.0 };
        }
        let mut y = Self::of(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp_impl() - Self::ONE;
        }
        y
    }

    /// sin and cos of `r` with `|r| <= pi/4`.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r.sqr();
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            term = -term * r2 / Self::of((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
            if term.hi.abs() < EPS * 1e-2 || n > 60.0 {
                break;
            }
        }
        let mut term = Self::ONE;
        let mut c = Self::ONE;
        let mut n = 0.0;
        loop {
            term = -term * r2 / Self::of((n + 1.0) * (n + 2.0));
            c += term;
            n += 2.0;
            if term.hi.abs() < EPS * 1e-2 || n > 60.0 {
                break;
            }
        }
        (s, c)
    }

    fn sin_cos(self) -> (Self, Self) {
        // reduce modulo 2pi then to an octant
        let z = self - TWO_PI * (self / TWO_PI).round();
        let q = (z / HALF_PI).round();
        let r = z - HALF_PI * q;
        let (s, c) = Self::sin_cos_reduced(r);
        match (q.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for DoubleDouble {
    #[inline]
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = f.precision() {
            write!(f, "{:.*e}", p, self.hi + self.lo)
        } else {
            write!(f, "{:e}", self.hi + self.lo)
        }
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::of(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - b * (self / b).trunc()
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;

    /// Decimal strings only; digits are accumulated in double-double so the
    /// result is not limited to `f64` precision.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        // validate through the f64 parser for error reporting
        let _probe: f64 = s.parse()?;
        if radix != 10 {
            return "invalid".parse::<f64>().map(<Self as Real>::of);
        }
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().unwrap_or(0)),
            None => (body, 0),
        };
        let mut acc = Self::ZERO;
        let mut scale = exp;
        let mut after_dot = false;
        for ch in mantissa.chars() {
            match ch {
                '.' => after_dot = true,
                d => {
                    acc = acc.mul_f64(10.0) + Self::of(d.to_digit(10).unwrap_or(0) as f64);
                    if after_dot {
                        scale -= 1;
                    }
                }
            }
        }
        let ten = Self::of(10.0);
        let v = if scale >= 0 { acc * ten.powi(scale) } else { acc / ten.powi(-scale) };
        Ok(if neg { -v } else { v })
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let v = t.hi as i128 + t.lo as i128;
        i64::try_from(v).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::from_sum(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::from_sum(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::of(x))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(<Self as Real>::of)
    }
}

impl Real for DoubleDouble {
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::of(f64::NAN) };
        }
        let x = self.hi.sqrt();
        let xd = Self::of(x);
        xd + (self - Self::of(x).sqr()) / Self::of(2.0 * x)
    }
    #[inline]
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn exp(self) -> Self {
        self.exp_impl()
    }
    fn ln(self) -> Self {
        self.ln_impl()
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }
    fn epsilon() -> Self {
        Self::of(EPS)
    }
    fn pi() -> Self {
        PI
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    fn from_hi_lo(hi: f64, lo: f64) -> Self {
        Self::from_sum(hi, lo)
    }
}
