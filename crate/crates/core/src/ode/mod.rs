//! Integration of the sigma-form equations away from the origin.
//!
//! The trajectory starts at half the series trust radius, with `sigma''`
//! taken from the square-root branch whose sign the series dictates, and is
//! advanced with an adaptive Taylor method on the differentiated equation.
//! Dense output is exact polynomial evaluation of the step's Taylor
//! coefficients, for `sigma` as well as for `I(x) = int_0^x sigma(t)/t dt`.

pub mod pv_route;
mod taylor;

use serde::Serialize;

use crate::catalog::{lookup_reading, Reading, TranscendentId, TranscendentSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::SeriesExpansion;

pub use taylor::Segment;
use taylor::ThirdOrder;

/// Relative tolerance the series and the integrator must agree to at the
/// end of the first step.
pub const HANDOFF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ToleranceProfile {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Node<T> {
    pub x: T,
    pub sigma: T,
    pub dsigma: T,
    pub ddsigma: T,
    pub integral: T,
}

/// Point where `sigma''` changes sign; `f` is `F` there relative to the
/// size of its terms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BranchFlip {
    pub x: f64,
    pub f: f64,
}

#[derive(Clone, Debug)]
pub struct SolutionTrajectory<T: Real> {
    pub id: TranscendentId,
    pub reading: Reading,
    pub nodes: Vec<Node<T>>,
    pub segments: Vec<Segment<T>>,
    pub branch_flips: Vec<BranchFlip>,
    pub tolerance: ToleranceProfile,
    /// Largest relative residual seen at a node.
    pub max_node_residual: f64,
    /// Relative gap between series and integrator at the trust radius.
    pub handoff_gap: f64,
    pub series: SeriesExpansion,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    /// Taylor order; 0 picks it from the tolerance.
    pub order: usize,
    pub handoff_tol: f64,
}

impl IntegrateOptions {
    pub fn new(rel_tol: f64) -> Self {
        Self { rel_tol, order: 0, handoff_tol: HANDOFF_TOL }
    }
}

/// Smallest relative tolerance accepted for scalar type `T`.
pub fn min_rel_tol<T: Real>() -> f64 {
    450.0 * T::epsilon().f64()
}

/// `branch * sqrt(F)/x`, the second derivative on the chosen branch.
/// Slightly negative `F` (within `eps_manifold` of the scale of its terms) is
/// clamped to zero.
pub fn sigma_dd<T: Real>(spec: &TranscendentSpec, x: T, sigma: T, dsigma: T, branch: T, eps_manifold: f64) -> Result<T> {
    let d = x * dsigma - sigma;
    let f = spec.form.eval(d, dsigma, sigma);
    let scale = spec.form.eval_abs(d, dsigma, sigma);
    if f < T::zero() {
        if f.abs() > T::of(eps_manifold) * scale {
            return Err(Error::BranchAmbiguity { id: spec.id, s: x.f64(), f: f.f64() });
        }
        return Ok(T::zero());
    }
    Ok(branch.signum() * f.sqrt() / x)
}

fn relative_residual<T: Real>(spec: &TranscendentSpec, x: T, s: T, d1: T, d2: T) -> f64 {
    let scale = spec.residual_scale(x, s, d1, d2);
    if scale == T::zero() {
        return 0.0;
    }
    (spec.residual(x, s, d1, d2).abs() / scale).f64()
}

/// Integrates from half the trust radius out to `x_end`.
pub fn integrate<T: Real>(spec: &TranscendentSpec, series: &SeriesExpansion, x_end: T, rel_tol: f64) -> Result<SolutionTrajectory<T>> {
    integrate_with(spec, series, x_end, IntegrateOptions::new(rel_tol))
}

pub fn integrate_with<T: Real>(
    spec: &TranscendentSpec,
    series: &SeriesExpansion,
    x_end: T,
    opts: IntegrateOptions,
) -> Result<SolutionTrajectory<T>> {
    let rel_tol = opts.rel_tol;
    if !(rel_tol >= min_rel_tol::<T>()) {
        return Err(Error::InvalidArgument(format!("rel_tol {rel_tol:e} below {:e}", min_rel_tol::<T>())));
    }
    if series.id != spec.id || series.reading != spec.reading {
        return Err(Error::InvalidArgument("series belongs to another transcendent".into()));
    }
    let radius = series.trust_radius;
    if !(x_end.f64() > radius) {
        return Err(Error::InvalidArgument(format!("end point {} must exceed the trust radius {radius:e}", x_end.f64())));
    }
    let rhs = ThirdOrder::<T>::new(&spec.form).ok_or_else(|| {
        Error::UnsupportedForm(format!(
            "{}: F depends on sigma itself or is not quadratic in (D, p); the third-order form does not apply",
            spec.id
        ))
    })?;
    // fixed per scalar type, so the error varies smoothly with the tolerance
    let order = if opts.order > 0 { opts.order } else { ((-min_rel_tol::<T>().ln()) / 2.0).ceil() as usize + 5 };

    let x_radius = T::of(radius);
    let x0 = x_radius / T::of(2.0);
    let (s0, p0, q_series) = series.eval(x0)?;
    let q0 = sigma_dd(spec, x0, s0, p0, q_series, 1e3 * rel_tol.max(series.trust_tol))?;
    let i0 = series.integral_term(x0)?;

    let mut traj = SolutionTrajectory {
        id: spec.id,
        reading: spec.reading,
        nodes: vec![Node { x: x0, sigma: s0, dsigma: p0, ddsigma: q0, integral: i0 }],
        segments: Vec::new(),
        branch_flips: Vec::new(),
        tolerance: ToleranceProfile { rel_tol, abs_tol: 0.0 },
        max_node_residual: relative_residual(spec, x0, s0, p0, q0),
        handoff_gap: f64::NAN,
        series: series.clone(),
    };

    let mut x = x0;
    let mut state = [s0, p0, q0, i0];
    let mut audited = false;
    while x < x_end {
        let (sc, ic) = rhs.coefficients(x, state, order);
        let scale = state[0].abs().max((x * state[1]).abs()).f64().max(f64::MIN_POSITIVE);
        let iscale = state[3].abs().f64().max(1.0);
        let tol = rel_tol * scale;
        let mut h = f64::INFINITY;
        for j in [order - 1, order] {
            let c = sc[j].abs().f64();
            if c > 0.0 {
                h = h.min((tol / c).powf(1.0 / j as f64));
            }
            let c = ic[j].abs().f64();
            if c > 0.0 {
                h = h.min((rel_tol * iscale / c).powf(1.0 / j as f64));
            }
        }
        let xf = x.f64();
        h = (0.8 * h).min(0.5 * xf);
        if !audited {
            h = h.min(radius - xf);
        }
        let mut ht = T::of(h);
        if x + ht >= x_end {
            ht = x_end - x;
        }
        if !(h > 1e-13 * xf) || !ht.is_finite() || !sc.iter().all(|c| c.is_finite()) {
            return Err(Error::StiffnessFailure { id: spec.id, s: xf, h });
        }
        let seg = Segment { x0: x, h: ht, sigma: sc, integral: ic };
        let (s1, p1, q1) = seg.eval(ht);
        let i1 = seg.eval_integral(ht);
        let x1 = x + ht;
        if (q1 > T::zero()) != (state[2] > T::zero()) && state[2] != T::zero() && q1 != T::zero() {
            traj.branch_flips.push(locate_flip(spec, &seg));
        }
        traj.max_node_residual = traj.max_node_residual.max(relative_residual(spec, x1, s1, p1, q1));
        traj.nodes.push(Node { x: x1, sigma: s1, dsigma: p1, ddsigma: q1, integral: i1 });
        traj.segments.push(seg);
        x = x1;
        state = [s1, p1, q1, i1];
        if !audited {
            audited = true;
            let (ss, _, _) = series.eval(x)?;
            let gap = ((s1 - ss).abs() / ss.abs().max(T::of(f64::MIN_POSITIVE))).f64();
            traj.handoff_gap = gap;
            if gap > opts.handoff_tol {
                return Err(Error::HandoffMismatch { id: spec.id, s: x.f64(), diff: gap });
            }
        }
    }
    Ok(traj)
}

fn locate_flip<T: Real>(spec: &TranscendentSpec, seg: &Segment<T>) -> BranchFlip {
    let q = |t: T| seg.eval(t).2;
    let (mut a, mut b) = (T::zero(), seg.h);
    let qa = q(a);
    for _ in 0..200 {
        let m = (a + b) / T::of(2.0);
        if (q(m) > T::zero()) == (qa > T::zero()) {
            a = m;
        } else {
            b = m;
        }
    }
    let x = seg.x0 + a;
    let (s, d1, _) = seg.eval(a);
    let d = x * d1 - s;
    let f = spec.form.eval(d, d1, s) / spec.form.eval_abs(d, d1, s).max(T::of(f64::MIN_POSITIVE));
    BranchFlip { x: x.f64(), f: f.f64() }
}

impl<T: Real> SolutionTrajectory<T> {
    pub fn spec(&self) -> &'static TranscendentSpec {
        lookup_reading(self.id, self.reading)
    }

    pub fn x_start(&self) -> T {
        self.nodes[0].x
    }

    pub fn x_end(&self) -> T {
        self.nodes.last().unwrap().x
    }

    fn locate(&self, x: T) -> Result<Option<&Segment<T>>> {
        if !(x.f64() >= 0.0) || x > self.x_end() {
            return Err(Error::RangeExceeded { s: x.f64(), max: self.x_end().f64() });
        }
        if x <= self.x_start() {
            return Ok(None);
        }
        let i = self.segments.partition_point(|seg| seg.x0 + seg.h < x);
        Ok(Some(&self.segments[i.min(self.segments.len() - 1)]))
    }

    /// `(sigma, sigma', sigma'')` at `x`.
    pub fn eval(&self, x: T) -> Result<(T, T, T)> {
        match self.locate(x)? {
            None if x == T::zero() => Ok((T::zero(), T::zero(), T::zero())),
            None => self.series.eval(x),
            Some(seg) => Ok(seg.eval(x - seg.x0)),
        }
    }

    pub fn sigma(&self, x: T) -> Result<T> {
        Ok(self.eval(x)?.0)
    }

    /// `I(x) = int_0^x sigma(t)/t dt`.
    pub fn integral(&self, x: T) -> Result<T> {
        match self.locate(x)? {
            None if x == T::zero() => Ok(T::zero()),
            None => self.series.integral_term(x),
            Some(seg) => Ok(seg.eval_integral(x - seg.x0)),
        }
    }

    /// Relative residual of the equation at `x`.
    pub fn residual_at(&self, x: T) -> Result<f64> {
        let (s, d1, d2) = self.eval(x)?;
        Ok(relative_residual(self.spec(), x, s, d1, d2))
    }
}
