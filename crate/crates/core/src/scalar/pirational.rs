//! Exact numbers of the form `sum_k q_k * pi^k` with rational `q_k` and
//! integer (possibly negative) `k`.
//!
//! This is the ring Q[pi, 1/pi]; division is only supported by monomials
//! `q * pi^k`, which is all the series recurrences of this crate need.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use super::{Real, SeriesField};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct PiRational {
    terms: BTreeMap<i32, BigRational>,
}

impl PiRational {
    pub fn rational(num: i64, den: i64) -> Self {
        Self::monomial(BigRational::new(num.into(), den.into()), 0)
    }

    /// `q * pi^power`.
    pub fn monomial(q: BigRational, power: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(power, q);
        }
        Self { terms }
    }

    /// `(num/den) * pi^power`.
    pub fn pi_pow(num: i64, den: i64, power: i32) -> Self {
        Self::monomial(BigRational::new(num.into(), den.into()), power)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn as_monomial(&self) -> Option<(i32, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, v)| (*k, v))
        } else {
            None
        }
    }

    /// The rational coefficient when the value has no pi dependence.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_real::<f64>()
    }

    fn normalize(mut self) -> Self {
        self.terms.retain(|_, v| !v.is_zero());
        self
    }
}

/// Converts a big rational to `T` keeping about 106 bits of the numerator and
/// denominator.
pub(crate) fn big_rational_to_real<T: Real>(q: &BigRational) -> T {
    fn big_to_real<T: Real>(n: &BigInt) -> T {
        let hi = n.to_f64().unwrap_or(f64::NAN);
        // any finite double obtained from an integer is itself integral
        match BigInt::from_f64(hi) {
            Some(hi_int) if hi.is_finite() => {
                let lo = (n - hi_int).to_f64().unwrap_or(0.0);
                T::from_hi_lo(hi, lo)
            }
            _ => T::of(hi),
        }
    }
    big_to_real::<T>(q.numer()) / big_to_real::<T>(q.denom())
}

impl fmt::Debug for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, q) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{q}")?,
                1 => write!(f, "({q})*pi")?,
                _ => write!(f, "({q})*pi^{k}")?,
            }
        }
        Ok(())
    }
}

impl Zero for PiRational {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for PiRational {
    fn one() -> Self {
        Self::rational(1, 1)
    }
}

impl Add for PiRational {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (k, v) in rhs.terms {
            let e = self.terms.entry(k).or_insert_with(BigRational::zero);
            *e += v;
        }
        self.normalize()
    }
}

impl Neg for PiRational {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }
}

impl Sub for PiRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for PiRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out: BTreeMap<i32, BigRational> = BTreeMap::new();
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                let e = out.entry(ka + kb).or_insert_with(BigRational::zero);
                *e += va * vb;
            }
        }
        Self { terms: out }.normalize()
    }
}

impl SeriesField for PiRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(num, den)
    }

    fn from_pi_rational(c: &PiRational) -> Self {
        c.clone()
    }

    fn is_negligible(&self) -> bool {
        self.terms.is_empty()
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        let (k, q) = rhs.as_monomial()?;
        let mut terms = BTreeMap::new();
        for (ka, va) in &self.terms {
            terms.insert(ka - k, va / q);
        }
        Some(Self { terms })
    }

    fn checked_sqrt(&self) -> Option<Self> {
        if self.terms.is_empty() {
            return Some(Self::zero());
        }
        let (k, q) = self.as_monomial()?;
        if k % 2 != 0 || q.is_negative() {
            return None;
        }
        let n = q.numer().sqrt();
        let d = q.denom().sqrt();
        if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
            Some(Self::monomial(BigRational::new(n, d), k / 2))
        } else {
            None
        }
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn to_real<T: Real>(&self) -> T {
        let pi = T::pi();
        self.terms
            .iter()
            .fold(T::zero(), |acc, (k, q)| acc + big_rational_to_real::<T>(q) * pi.powi(*k))
    }

    fn is_exact() -> bool {
        true
    }

    fn exact_value(&self) -> Option<PiRational> {
        Some(self.clone())
    }

    fn error_bound(&self) -> f64 {
        0.0
    }

    fn from_stored(exact: Option<&PiRational>, _value: super::DoubleDouble, _err: f64) -> Option<Self> {
        exact.cloned()
    }
}
