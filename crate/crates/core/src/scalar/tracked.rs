//! Floating-point value carrying a running absolute error bound.
//!
//! Every operation widens the bound by the propagated input errors plus one
//! rounding of the result, in the spirit of first-order interval arithmetic.
//! The bound is kept in `f64`; it only has to be accurate to a factor of a
//! few to serve its purpose (deciding whether a coefficient is zero).

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{DoubleDouble, PiRational, Real, SeriesField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tracked<T: Real> {
    pub value: T,
    pub err: f64,
}

impl<T: Real> Tracked<T> {
    pub fn exact(value: T) -> Self {
        Self { value, err: 0.0 }
    }

    pub fn with_error(value: T, err: f64) -> Self {
        Self { value, err }
    }

    fn rounding(v: T) -> f64 {
        v.abs().f64() * T::epsilon().f64()
    }

    fn abs_f64(&self) -> f64 {
        self.value.abs().f64()
    }
}

impl<T: Real> Add for Tracked<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let value = self.value + rhs.value;
        Self { value, err: self.err + rhs.err + Self::rounding(value) }
    }
}

impl<T: Real> Sub for Tracked<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let value = self.value - rhs.value;
        Self { value, err: self.err + rhs.err + Self::rounding(value) }
    }
}

impl<T: Real> Mul for Tracked<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let value = self.value * rhs.value;
        let err = self.abs_f64() * rhs.err + rhs.abs_f64() * self.err + self.err * rhs.err;
        Self { value, err: err + Self::rounding(value) }
    }
}

impl<T: Real> Neg for Tracked<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, err: self.err }
    }
}

impl<T: Real> Zero for Tracked<T> {
    fn zero() -> Self {
        Self::exact(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.err == 0.0
    }
}

impl<T: Real> One for Tracked<T> {
    fn one() -> Self {
        Self::exact(T::one())
    }
}

impl<T: Real> SeriesField for Tracked<T> {
    fn from_ratio(num: i64, den: i64) -> Self {
        let v = T::ratio(num, den);
        Self { value: v, err: Self::rounding(v) }
    }

    fn from_pi_rational(c: &PiRational) -> Self {
        let v: T = c.to_real();
        // conversion of each rational and power of pi costs a few roundings
        let terms = c.terms().count().max(1) as f64;
        Self { value: v, err: 8.0 * terms * Self::rounding(v).max(T::epsilon().f64() * c.magnitude()) }
    }

    fn is_negligible(&self) -> bool {
        self.abs_f64() <= 4.0 * self.err
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        let b = rhs.abs_f64();
        if b <= rhs.err * 4.0 || b == 0.0 {
            return None;
        }
        let value = self.value / rhs.value;
        let q = value.abs().f64();
        let err = (self.err + q * rhs.err) / (b - rhs.err);
        Some(Self { value, err: err + Self::rounding(value) })
    }

    fn checked_sqrt(&self) -> Option<Self> {
        if self.value < T::zero() {
            return if self.is_negligible() { Some(Self::with_error(T::zero(), self.err.sqrt())) } else { None };
        }
        let value = self.value.sqrt();
        let r = value.f64();
        // sqrt is not Lipschitz at 0; fall back to the square-root bound there
        let err = if r > 0.0 { (self.err / (2.0 * r)).min(self.err.sqrt()) } else { self.err.sqrt() };
        Some(Self { value, err: err + Self::rounding(value) })
    }

    fn magnitude(&self) -> f64 {
        self.abs_f64()
    }

    fn to_real<U: Real>(&self) -> U {
        let hi = self.value.f64();
        let lo = (self.value - T::of(hi)).f64();
        U::from_hi_lo(hi, lo)
    }

    fn is_exact() -> bool {
        false
    }

    fn exact_value(&self) -> Option<PiRational> {
        None
    }

    fn error_bound(&self) -> f64 {
        self.err
    }

    fn from_stored(exact: Option<&PiRational>, value: DoubleDouble, err: f64) -> Option<Self> {
        match exact {
            Some(c) => Some(Self::from_pi_rational(c)),
            None => {
                let hi = value.hi;
                Some(Self::with_error(T::from_hi_lo(hi, value.lo), err))
            }
        }
    }
}
