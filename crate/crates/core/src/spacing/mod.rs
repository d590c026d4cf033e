//! Gap probabilities `E_beta(0; s)` and spacing densities `p_beta(s)` for the
//! three symmetry classes, assembled from the six integrated transcendents.
//!
//! | beta | argument         | gap probability                         |
//! |------|------------------|-----------------------------------------|
//! | 2    | `t = pi s`       | `exp(I_sigma(t))`                       |
//! | 1    | `x = (pi s/2)^2` | `exp(-I_B(x))`                          |
//! | 4    | `x = (pi s)^2`   | `(exp(-I_B(x)) + exp(-I_B+(x))) / 2`    |
//!
//! First derivatives come from the tilde transcendents in closed form, so
//! the distribution function `1 + E'(s)` needs no quadrature.

mod table;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{lookup, TranscendentId};
use crate::error::{Error, Result};
use crate::ode::{integrate, min_rel_tol, SolutionTrajectory};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;
use crate::series::{extend_series_in, Arithmetic};

pub use table::{SpacingRow, SpacingTable, TableMetadata, CSV_HEADER};

/// Symmetry index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    One,
    Two,
    Four,
}

impl Beta {
    pub const ALL: [Beta; 3] = [Beta::One, Beta::Two, Beta::Four];

    pub fn value(self) -> u8 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            4 => Ok(Beta::Four),
            _ => Err(Error::InvalidArgument(format!("beta must be 1, 2 or 4, got {b}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.value()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Which derivative identity to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    /// `d/ds exp(I_sigma(pi s)) = -exp(I_sigma~(pi s))`
    A1,
    /// `d/ds exp(-I_B((pi s/2)^2)) = -exp(-I_B~((pi s/2)^2))`
    A2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMetric {
    /// `max |p_1 - p_W|` over `[0, 6]`.
    MaxAbs,
    /// `|p_1 - p_W| / p_1` at the maximum of `p_1`.
    MaxRelAtPeak,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub value: f64,
    pub at: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawsConfig {
    /// User-facing relative tolerance.
    pub rel_tol: f64,
    /// Largest spacing covered by the trajectories.
    pub s_cover: f64,
    /// Order of the small-argument series used to start each trajectory.
    pub series_order: f64,
}

impl Default for LawsConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-12, s_cover: DEFAULT_S_COVER, series_order: 16.0 }
    }
}

pub const DEFAULT_S_COVER: f64 = 8.0;

/// Tolerance handed to the integrator: `rel_tol` scaled by the precision of
/// `T` relative to `f64`, so that the amplification of errors along the
/// unstable directions of the equations still leaves about `rel_tol` in
/// the outputs.
pub fn internal_tol<T: Real>(rel_tol: f64) -> f64 {
    (rel_tol * T::epsilon().f64() / f64::EPSILON).max(min_rel_tol::<T>())
}

/// The six trajectories and the laws built on them.
#[derive(Clone, Debug)]
pub struct SpacingLaws<T: Real> {
    pub config: LawsConfig,
    internal_tol: f64,
    trajectories: Vec<SolutionTrajectory<T>>,
}

fn slot(id: TranscendentId) -> usize {
    TranscendentId::ALL.iter().position(|&i| i == id).unwrap()
}

fn x_end(id: TranscendentId, s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let margin = 1.0 + 1e-9;
    match id {
        TranscendentId::SigmaPv | TranscendentId::TildeSigma => pi * s * margin,
        _ => (pi * s).powi(2) * margin,
    }
}

impl<T: Real + Send + Sync> SpacingLaws<T> {
    pub fn new(config: LawsConfig) -> Result<Self> {
        if !(config.rel_tol > 0.0) || !(config.s_cover > 0.0) {
            return Err(Error::InvalidArgument("rel_tol and s_cover must be positive".into()));
        }
        let tol = internal_tol::<T>(config.rel_tol);
        let trajectories = TranscendentId::ALL
            .par_iter()
            .map(|&id| {
                let spec = lookup(id);
                let series = extend_series_in(spec, config.series_order, min_rel_tol::<T>() * 1e-3, Arithmetic::Tracked)?;
                integrate(spec, &series, T::of(x_end(id, config.s_cover)), tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, internal_tol: tol, trajectories })
    }
}

impl<T: Real> SpacingLaws<T> {
    pub fn internal_tol(&self) -> f64 {
        self.internal_tol
    }

    pub fn coverage(&self) -> f64 {
        self.config.s_cover
    }

    pub fn trajectory(&self, id: TranscendentId) -> &SolutionTrajectory<T> {
        &self.trajectories[slot(id)]
    }

    fn check(&self, s: T) -> Result<()> {
        let sf = s.f64();
        if !(sf >= 0.0) || sf > self.config.s_cover * (1.0 + 1e-12) {
            return Err(Error::RangeExceeded { s: sf, max: self.config.s_cover });
        }
        Ok(())
    }

    fn integral(&self, id: TranscendentId, x: T) -> Result<T> {
        self.trajectory(id).integral(x)
    }

    fn sigma(&self, id: TranscendentId, x: T) -> Result<T> {
        self.trajectory(id).sigma(x)
    }

    fn e1(&self, s: T) -> Result<T> {
        let x = (T::pi() * s / T::of(2.0)).powi(2);
        Ok((-self.integral(TranscendentId::SigmaB, x)?).exp())
    }

    fn e2(&self, s: T) -> Result<T> {
        Ok(self.integral(TranscendentId::SigmaPv, T::pi() * s)?.exp())
    }

    fn de1(&self, s: T) -> Result<T> {
        let x = (T::pi() * s / T::of(2.0)).powi(2);
        Ok(-(-self.integral(TranscendentId::TildeSigmaB, x)?).exp())
    }

    fn p1(&self, s: T) -> Result<T> {
        if s == T::zero() {
            return Ok(T::zero());
        }
        let x = (T::pi() * s / T::of(2.0)).powi(2);
        let st = self.sigma(TranscendentId::TildeSigmaB, x)?;
        Ok(T::of(2.0) * st / s * (-self.integral(TranscendentId::TildeSigmaB, x)?).exp())
    }

    /// `E_beta(0; s)`.
    pub fn gap_probability(&self, beta: Beta, s: T) -> Result<T> {
        self.check(s)?;
        match beta {
            Beta::Two => self.e2(s),
            Beta::One => self.e1(s),
            Beta::Four => {
                let x = (T::pi() * s).powi(2);
                let b = (-self.integral(TranscendentId::SigmaB, x)?).exp();
                let bp = (-self.integral(TranscendentId::SigmaBPlus, x)?).exp();
                Ok((b + bp) / T::of(2.0))
            }
        }
    }

    /// `dE_beta(0; s)/ds`.
    pub fn gap_derivative(&self, beta: Beta, s: T) -> Result<T> {
        self.check(s)?;
        match beta {
            Beta::Two => Ok(-self.integral(TranscendentId::TildeSigma, T::pi() * s)?.exp()),
            Beta::One => self.de1(s),
            Beta::Four => {
                let x = (T::pi() * s).powi(2);
                let tail = x / T::of(3.0) * (-self.integral(TranscendentId::TildeSigmaBPlus, x)?).exp();
                Ok(self.de1(T::of(2.0) * s)? - tail)
            }
        }
    }

    /// `p_beta(s)`.
    pub fn spacing_density(&self, beta: Beta, s: T) -> Result<T> {
        self.check(s)?;
        if s == T::zero() {
            return Ok(T::zero());
        }
        match beta {
            Beta::Two => {
                let t = T::pi() * s;
                let st = self.sigma(TranscendentId::TildeSigma, t)?;
                Ok(-st / s * self.integral(TranscendentId::TildeSigma, t)?.exp())
            }
            Beta::One => self.p1(s),
            Beta::Four => {
                let pi = T::pi();
                let x = (pi * s).powi(2);
                let st = self.sigma(TranscendentId::TildeSigmaBPlus, x)?;
                let e = (-self.integral(TranscendentId::TildeSigmaBPlus, x)?).exp();
                Ok(T::of(2.0) * self.p1(T::of(2.0) * s)? + T::of(2.0) * pi * pi * s / T::of(3.0) * (st - T::one()) * e)
            }
        }
    }

    /// Spacing distribution function `int_0^s p = 1 + E'(s)`.
    pub fn cdf(&self, beta: Beta, s: T) -> Result<T> {
        Ok(T::one() + self.gap_derivative(beta, s)?)
    }

    /// `(E, p, truncated)`; beyond the coverage `p = 0` and `E` is frozen at
    /// its value at the coverage limit.
    pub fn evaluate_with_tail(&self, beta: Beta, s: T) -> Result<(T, T, bool)> {
        if s.f64() > self.config.s_cover {
            let end = T::of(self.config.s_cover);
            return Ok((self.gap_probability(beta, end)?, T::zero(), true));
        }
        Ok((self.gap_probability(beta, s)?, self.spacing_density(beta, s)?, false))
    }

    /// `E_1(0; s)` from the sigma trajectory alone:
    /// `sqrt(E_2) exp(-1/2 int_0^{pi s} sqrt(-d/dx(sigma/x)) dx)`.
    pub fn e1_from_e2(&self, s: T) -> Result<T> {
        self.check(s)?;
        if s == T::zero() {
            return Ok(T::one());
        }
        let traj = self.trajectory(TranscendentId::SigmaPv);
        let rule = QuadratureRule::<T>::gauss_legendre(24);
        let end = T::pi() * s;
        let panels = (end.f64() / 0.25).ceil().max(1.0) as usize;
        let mut failure = None;
        let integral = rule.integrate_composite(T::zero(), end, panels, |x| {
            let (v, d1, _) = traj.eval(x).unwrap_or((T::zero(), T::zero(), T::zero()));
            // -(sigma/x)' = (sigma - x sigma')/x^2
            let w = (v - x * d1) / (x * x);
            if w < T::zero() {
                if failure.is_none() && w.abs().f64() > 1e-9 {
                    failure = Some(Error::NegativeIntegrand { x: x.f64(), value: w.f64() });
                }
                return T::zero();
            }
            w.sqrt()
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(self.e2(s)?.sqrt() * (-integral / T::of(2.0)).exp())
    }

    /// `(E_1(s) + E_2(s)/E_1(s))/2`, which equals `E_4(0; s/2)`.
    pub fn e4_from_e1_e2(&self, s: T) -> Result<T> {
        self.check(s)?;
        let e1 = self.e1(s)?;
        Ok((e1 + self.e2(s)? / e1) / T::of(2.0))
    }

    /// `(lhs, rhs)`: fourth-order centred difference (step `1e-4`) of the
    /// base exponential, and minus the tilde exponential.
    pub fn derivative_identity(&self, which: Identity, s: T) -> Result<(T, T)> {
        let h = T::of(1e-4);
        self.check(s + T::of(2.0) * h)?;
        self.check(s)?;
        let base = |s: T| -> Result<T> {
            match which {
                Identity::A1 => self.e2(s),
                Identity::A2 => self.e1(s),
            }
        };
        let lhs = if s.f64() < 2.0 * 1e-4 {
            // one-sided near the origin
            let v: Vec<T> = (0..5).map(|k| base(s + h * T::of(k as f64))).collect::<Result<_>>()?;
            (T::of(-25.0) * v[0] + T::of(48.0) * v[1] - T::of(36.0) * v[2] + T::of(16.0) * v[3] - T::of(3.0) * v[4])
                / (T::of(12.0) * h)
        } else {
            fd1(base, s, h)?
        };
        let rhs = match which {
            Identity::A1 => -self.integral(TranscendentId::TildeSigma, T::pi() * s)?.exp(),
            Identity::A2 => self.de1(s)?,
        };
        Ok((lhs, rhs))
    }

    /// `(E'' by fourth-order differences with step h, p)`.
    pub fn second_derivative_check(&self, beta: Beta, s: T, h: T) -> Result<(T, T)> {
        self.check(s + T::of(2.0) * h)?;
        self.check(s - T::of(2.0) * h)?;
        let e = |x: T| self.gap_probability(beta, x);
        let v = [e(s - T::of(2.0) * h)?, e(s - h)?, e(s)?, e(s + h)?, e(s + T::of(2.0) * h)?];
        let d2 = (-v[0] + T::of(16.0) * v[1] - T::of(30.0) * v[2] + T::of(16.0) * v[3] - v[4]) / (T::of(12.0) * h * h);
        Ok((d2, self.spacing_density(beta, s)?))
    }

    /// Deviation of the exact `p_1` from the Wigner surmise on `[0, 6]`
    /// sampled with spacing `step`.
    pub fn surmise_deviation_on(&self, metric: DeviationMetric, step: f64) -> Result<Deviation> {
        let n = (6.0 / step).round() as usize;
        let mut best = Deviation { value: 0.0, at: 0.0 };
        let mut peak = (f64::NEG_INFINITY, 0.0);
        for i in 0..=n {
            let s = i as f64 * step;
            let p = self.spacing_density(Beta::One, T::of(s))?.f64();
            let w = wigner_surmise(s);
            if p > peak.0 {
                peak = (p, s);
            }
            if metric == DeviationMetric::MaxAbs && (p - w).abs() > best.value {
                best = Deviation { value: (p - w).abs(), at: s };
            }
        }
        if metric == DeviationMetric::MaxRelAtPeak {
            let (p, s) = peak;
            best = Deviation { value: (p - wigner_surmise(s)).abs() / p, at: s };
        }
        Ok(best)
    }

    pub fn surmise_deviation(&self, metric: DeviationMetric) -> Result<Deviation> {
        self.surmise_deviation_on(metric, 1e-3)
    }

    /// Row-parallel tabulation on `0, step, 2 step, ...` up to `s_max`.
    /// Rows beyond the coverage follow the tail policy when `allow_tail`.
    pub fn tabulate_with(&self, beta: Beta, s_max: f64, step: f64, allow_tail: bool) -> Result<SpacingTable>
    where
        T: Send + Sync,
    {
        if !(step > 0.0) || !(s_max > step) {
            return Err(Error::InvalidArgument(format!("need 0 < step < s_max, got step {step}, s_max {s_max}")));
        }
        if !allow_tail && s_max > self.config.s_cover * (1.0 + 1e-12) {
            return Err(Error::RangeExceeded { s: s_max, max: self.config.s_cover });
        }
        let n = (s_max / step + 1e-9).floor() as usize;
        let rows = (0..=n)
            .into_par_iter()
            .map(|i| {
                let s = i as f64 * step;
                let (e, p, cut) = self.evaluate_with_tail(beta, T::of(s))?;
                let w = surmise(beta, s);
                let p = p.f64();
                Ok((SpacingRow { s, e: e.f64(), p, surmise: w, deviation: p - w }, cut))
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = rows.iter().any(|r| r.1);
        let rows = rows.into_iter().map(|r| r.0).collect();
        Ok(SpacingTable { beta, rows, metadata: TableMetadata::new(self, tail) })
    }

    pub fn tabulate(&self, beta: Beta, s_max: f64, step: f64) -> Result<SpacingTable>
    where
        T: Send + Sync,
    {
        self.tabulate_with(beta, s_max, step, false)
    }
}

fn fd1<T: Real, F: Fn(T) -> Result<T>>(f: F, s: T, h: T) -> Result<T> {
    let two = T::of(2.0);
    Ok((f(s - two * h)? - T::of(8.0) * f(s - h)? + T::of(8.0) * f(s + h)? - f(s + two * h)?) / (T::of(12.0) * h))
}

/// `p_1^W(s) = (pi s/2) exp(-pi s^2/4)`.
pub fn wigner_surmise<T: Real>(s: T) -> T {
    let pi = T::pi();
    pi * s / T::of(2.0) * (-pi * s * s / T::of(4.0)).exp()
}

/// `(pi s/2) exp(-(pi s/2)^2)`, the form with the square on `pi`; it
/// integrates to `1/pi` and is kept only for comparison.
pub fn wigner_surmise_as_printed<T: Real>(s: T) -> T {
    let a = T::pi() * s / T::of(2.0);
    a * (-a * a).exp()
}

/// Two-level surmise for each symmetry class, normalized to unit mass and
/// unit mean.
pub fn surmise(beta: Beta, s: f64) -> f64 {
    use std::f64::consts::PI;
    match beta {
        Beta::One => wigner_surmise(s),
        Beta::Two => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
        Beta::Four => 262144.0 / (729.0 * PI.powi(3)) * s.powi(4) * (-64.0 * s * s / (9.0 * PI)).exp(),
    }
}
