//! Scalar types the numerical core is generic over.
//!
//! [`Real`] is the floating-point abstraction used by the integrator, the
//! Fredholm oracle and the spacing assembly. It is implemented for `f32`,
//! `f64` and [`DoubleDouble`]. [`SeriesField`] is the coefficient field of
//! the small-argument series engine, implemented exactly by [`PiRational`]
//! and approximately (with a running error bound) by [`Tracked`].

mod dd;
mod pirational;
mod tracked;

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num, NumAssignOps, NumCast, One, ToPrimitive, Zero};

pub use dd::DoubleDouble;
pub use pirational::PiRational;
pub use tracked::Tracked;

/// Real floating-point scalar.
pub trait Real:
    Num
    + NumCast
    + NumAssignOps
    + FromPrimitive
    + ToPrimitive
    + Copy
    + PartialOrd
    + Neg<Output = Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn is_finite(self) -> bool;

    /// Lossless-as-possible conversion from an `(hi, lo)` pair of doubles.
    fn from_hi_lo(hi: f64, lo: f64) -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_hi_lo(x, 0.0)
    }

    #[inline]
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap() / Self::from_i64(den).unwrap()
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn signum(self) -> Self {
        if self < Self::zero() {
            -Self::one()
        } else {
            Self::one()
        }
    }
}

macro_rules! impl_real_for_float {
    ($t:ty, $pi:expr) => {
        impl Real for $t {
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            #[inline]
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            #[inline]
            fn pi() -> Self {
                $pi
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn from_hi_lo(hi: f64, lo: f64) -> Self {
                (hi + lo) as $t
            }
        }
    };
}

impl_real_for_float!(f32, std::f32::consts::PI);
impl_real_for_float!(f64, std::f64::consts::PI);

/// Coefficient field of the series engine.
///
/// Exact implementations answer `is_negligible` with an exact zero test and
/// may refuse divisions or square roots that leave the field.
pub trait SeriesField:
    Clone
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_pi_rational(c: &PiRational) -> Self;
    fn is_negligible(&self) -> bool;
    fn checked_div(&self, rhs: &Self) -> Option<Self>;
    fn checked_sqrt(&self) -> Option<Self>;
    /// Magnitude estimate, used for trust-radius heuristics only.
    fn magnitude(&self) -> f64;
    fn to_real<T: Real>(&self) -> T;
    fn is_exact() -> bool;
    /// The exact value, when the field is exact.
    fn exact_value(&self) -> Option<PiRational>;
    /// Absolute error bound of the value (0 for exact fields).
    fn error_bound(&self) -> f64;
    /// Rebuilds a coefficient from a stored value; exact fields need `exact`.
    fn from_stored(exact: Option<&PiRational>, value: DoubleDouble, err: f64) -> Option<Self>;
}
