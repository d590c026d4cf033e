//! Taylor-series stepper for the differentiated sigma-form.
//!
//! Differentiating `(x sigma'')^2 = F(D, p)` and dividing by `2 x sigma''`
//! gives the regular third-order equation
//!
//! ```text
//! x^2 sigma''' = (x F_D + F_p)/2 - x sigma''
//! ```
//!
//! whose flow conserves the residual of the original equation. Around `x0`
//! the Taylor coefficients of `sigma`, of the running integral
//! `I' = sigma/x`, and of the products needed in `F_D`, `F_p` follow from
//! Cauchy-product recurrences, so each step costs `O(n^2)` for order `n`.

use crate::catalog::OdeForm;
use crate::catalog::rational_to_real;
use crate::scalar::Real;

/// A polynomial in `(D, p)` of total degree at most 2.
#[derive(Clone, Debug)]
pub(crate) struct Quadratic<T> {
    // coefficients of 1, D, p, D^2, D p, p^2
    c: [T; 6],
}

impl<T: Real> Quadratic<T> {
    pub(crate) fn from_form(f: &OdeForm) -> Option<Self> {
        let mut c = [T::zero(); 6];
        for ((a, b, s), q) in f.terms() {
            if s > 0 {
                return None;
            }
            let idx = match (a, b) {
                (0, 0) => 0,
                (1, 0) => 1,
                (0, 1) => 2,
                (2, 0) => 3,
                (1, 1) => 4,
                (0, 2) => 5,
                _ => return None,
            };
            c[idx] = rational_to_real(q);
        }
        Some(Self { c })
    }

    fn coeff(&self, k: usize, d: &[T], p: &[T], dd: &[T], dp: &[T], pp: &[T]) -> T {
        let c = &self.c;
        let mut v = c[1] * d[k] + c[2] * p[k] + c[3] * dd[k] + c[4] * dp[k] + c[5] * pp[k];
        if k == 0 {
            v += c[0];
        }
        v
    }
}

/// Right-hand side data of the third-order equation.
#[derive(Clone, Debug)]
pub(crate) struct ThirdOrder<T> {
    fd: Quadratic<T>,
    fp: Quadratic<T>,
}

/// Taylor coefficients of one step, in `t = x - x0`.
#[derive(Clone, Debug)]
pub struct Segment<T> {
    pub x0: T,
    pub h: T,
    pub sigma: Vec<T>,
    pub integral: Vec<T>,
}

impl<T: Real> Segment<T> {
    /// `(sigma, sigma', sigma'')` at `x0 + t`.
    pub fn eval(&self, t: T) -> (T, T, T) {
        let n = self.sigma.len();
        let (mut v, mut d1, mut d2) = (T::zero(), T::zero(), T::zero());
        for k in (0..n).rev() {
            let kf = T::of(k as f64);
            v = v * t + self.sigma[k];
            if k >= 1 {
                d1 = d1 * t + kf * self.sigma[k];
            }
            if k >= 2 {
                d2 = d2 * t + kf * (kf - T::one()) * self.sigma[k];
            }
        }
        (v, d1, d2)
    }

    pub fn eval_integral(&self, t: T) -> T {
        self.integral.iter().rev().fold(T::zero(), |acc, c| acc * t + *c)
    }
}

fn cauchy<T: Real>(a: &[T], b: &[T], k: usize) -> T {
    (0..=k).fold(T::zero(), |acc, j| acc + a[j] * b[k - j])
}

impl<T: Real> ThirdOrder<T> {
    pub(crate) fn new(form: &OdeForm) -> Option<Self> {
        Some(Self { fd: Quadratic::from_form(&form.partial_d())?, fp: Quadratic::from_form(&form.partial_p())? })
    }

    /// Coefficients `sigma_0..=sigma_n` and `I_0..=I_n` about `x0`.
    pub(crate) fn coefficients(&self, x0: T, state: [T; 4], n: usize) -> (Vec<T>, Vec<T>) {
        let [s0, p0, q0, i0] = state;
        let mut s = vec![T::zero(); n + 1];
        let mut p = vec![T::zero(); n + 1];
        let mut q = vec![T::zero(); n + 1];
        let mut ig = vec![T::zero(); n + 1];
        let mut d = vec![T::zero(); n + 1];
        let mut dd = vec![T::zero(); n + 1];
        let mut dp = vec![T::zero(); n + 1];
        let mut pp = vec![T::zero(); n + 1];
        let mut fd = vec![T::zero(); n + 1];
        s[0] = s0;
        p[0] = p0;
        q[0] = q0;
        ig[0] = i0;
        let x0sq = x0 * x0;
        for k in 0..n {
            let kf = T::of(k as f64);
            let k1 = T::of((k + 1) as f64);
            d[k] = x0 * p[k] - s[k] + if k > 0 { p[k - 1] } else { T::zero() };
            dd[k] = cauchy(&d, &d, k);
            dp[k] = cauchy(&d, &p, k);
            pp[k] = cauchy(&p, &p, k);
            fd[k] = self.fd.coeff(k, &d, &p, &dd, &dp, &pp);
            let fp = self.fp.coeff(k, &d, &p, &dd, &dp, &pp);
            let nk = x0 * fd[k] + if k > 0 { fd[k - 1] } else { T::zero() } + fp;
            let qprev = if k > 0 { q[k - 1] } else { T::zero() };
            q[k + 1] = (nk / T::of(2.0) - x0 * T::of((2 * k + 1) as f64) * q[k] - kf * qprev) / (x0sq * k1);
            p[k + 1] = q[k] / k1;
            s[k + 1] = p[k] / k1;
            ig[k + 1] = (s[k] - kf * ig[k]) / (x0 * k1);
        }
        (s, ig)
    }
}
