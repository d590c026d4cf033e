//! Change of variables between the second-degree normal form and Painleve V
//! with `delta = 0`, used as an independent route to the tilde transcendents.

use num_rational::Rational64;

use crate::catalog::{rational_to_real, PvParams, TranscendentId, TranscendentSpec};
use crate::error::{Error, Result};
use crate::ode::SolutionTrajectory;
use crate::scalar::Real;

/// Distance from 0 or 1 below which `u` counts as degenerate.
pub const DEGENERATE_U_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct PainleveVState<T> {
    pub x: T,
    pub u: T,
    pub du: T,
    pub params: PvParams,
}

fn q<T: Real>(r: Rational64) -> T {
    rational_to_real(r)
}

/// `(y, y')` of the normal form in terms of `(u, u')`.
pub fn cs_forward<T: Real>(params: &PvParams, x: T, u: T, du: T) -> (T, T) {
    let one = T::one();
    let four = T::of(4.0);
    let sa: T = q(params.sqrt_2alpha);
    let beta: T = q(params.beta);
    let gamma: T = q(params.gamma);
    let a = x * du / (u - one) - u;
    let y = a * a / (four * u) - (one - sa) * (one - sa) * (u - one) / four - beta / T::of(2.0) * (u - one) / u
        + gamma * x / four * (u + one) / (u - one);
    let b = du - sa * u * (u - one) / x;
    let yp = -x / (four * u * (u - one)) * b * b - beta / (T::of(2.0) * x) * (u - one) / u - gamma / four;
    (y, yp)
}

/// `u'' - RHS` of Painleve V with `delta = 0`.
pub fn pv_residual<T: Real>(params: &PvParams, x: T, u: T, du: T, ddu: T) -> T {
    let one = T::one();
    let sa: T = q(params.sqrt_2alpha);
    let alpha = sa * sa / T::of(2.0);
    let beta: T = q(params.beta);
    let gamma: T = q(params.gamma);
    let rhs = (one / (T::of(2.0) * u) + one / (u - one)) * du * du - du / x
        + (u - one) * (u - one) / (x * x) * (alpha * u + beta / u)
        + gamma * u / x;
    ddu - rhs
}

/// `(y, y')` from `(sigma, sigma')` under `y = -(sigma - x/8 - kappa)`.
pub fn y_from_sigma<T: Real>(spec: &TranscendentSpec, x: T, sigma: T, dsigma: T) -> Result<(T, T)> {
    let sd = spec.sd.ok_or_else(|| Error::UnsupportedForm(format!("{} has no normal form", spec.id)))?;
    let kappa: T = q(sd.kappa);
    Ok((-(sigma - x / T::of(8.0) - kappa), T::ratio(1, 8) - dsigma))
}

fn check_u<T: Real>(x: T, u: T) -> Result<()> {
    let uf = u.f64();
    if !uf.is_finite() || uf.abs() < DEGENERATE_U_TOL || (uf - 1.0).abs() < DEGENERATE_U_TOL {
        return Err(Error::DegenerateU { s: x.f64(), u: uf });
    }
    Ok(())
}

fn is_sigma_b_family(spec: &TranscendentSpec) -> bool {
    matches!(spec.id, TranscendentId::SigmaB | TranscendentId::SigmaBPlus)
}

/// Painleve V variable for a point on a normal-form trajectory.
///
/// For the sigma_B family `u = 1 - x sigma'/sigma` in closed form; otherwise
/// the normal-form relations are inverted by Newton iteration from `hint`.
pub fn cs_map_to_u<T: Real>(
    spec: &TranscendentSpec,
    x: T,
    sigma: T,
    dsigma: T,
    ddsigma: T,
    hint: Option<(T, T)>,
) -> Result<PainleveVState<T>> {
    let sd = spec.sd.ok_or_else(|| Error::UnsupportedForm(format!("{} has no normal form", spec.id)))?;
    let params = sd.params.ok_or_else(|| Error::UnsupportedForm(format!("{}: Painleve V parameters are not unique", spec.id)))?;
    if sigma == T::zero() {
        return Err(Error::DegenerateU { s: x.f64(), u: f64::NAN });
    }
    if is_sigma_b_family(spec) {
        let g = dsigma / sigma;
        let u = T::one() - x * g;
        let du = -g - x * (ddsigma / sigma - g * g);
        check_u(x, u)?;
        return Ok(PainleveVState { x, u, du, params });
    }
    let (y, yp) = y_from_sigma(spec, x, sigma, dsigma)?;
    let hint = hint.ok_or_else(|| Error::InvalidArgument("a starting guess for (u, u') is required".into()))?;
    let (u, du) = invert(&params, x, y, yp, hint)?;
    check_u(x, u)?;
    Ok(PainleveVState { x, u, du, params })
}

/// Solves `cs_forward(u, u') = (y, y')` by Newton's method.
pub fn invert<T: Real>(params: &PvParams, x: T, y: T, yp: T, hint: (T, T)) -> Result<(T, T)> {
    let (mut u, mut du) = hint;
    let tol = T::epsilon() * T::of(64.0);
    for _ in 0..60 {
        let (f1, f2) = cs_forward(params, x, u, du);
        let (r1, r2) = (f1 - y, f2 - yp);
        let hu = (u.abs() + T::one()) * T::epsilon().sqrt();
        let hd = (du.abs() + T::one()) * T::epsilon().sqrt();
        let (a1, a2) = cs_forward(params, x, u + hu, du);
        let (b1, b2) = cs_forward(params, x, u - hu, du);
        let (c1, c2) = cs_forward(params, x, u, du + hd);
        let (d1, d2) = cs_forward(params, x, u, du - hd);
        let two = T::of(2.0);
        let j11 = (a1 - b1) / (two * hu);
        let j21 = (a2 - b2) / (two * hu);
        let j12 = (c1 - d1) / (two * hd);
        let j22 = (c2 - d2) / (two * hd);
        let det = j11 * j22 - j12 * j21;
        if det == T::zero() || !det.is_finite() {
            break;
        }
        let su = (r1 * j22 - r2 * j12) / det;
        let sd = (j11 * r2 - j21 * r1) / det;
        u -= su;
        du -= sd;
        if su.abs() <= tol * (u.abs() + T::one()) && sd.abs() <= tol * (du.abs() + T::one()) {
            return Ok((u, du));
        }
    }
    Err(Error::DegenerateU { s: x.f64(), u: u.f64() })
}

/// `sigma_B + (u - 1) + 1/2`.
pub fn tilde_from_u<T: Real>(sigma_b: T, u: T) -> T {
    sigma_b + (u - T::one()) + T::ratio(1, 2)
}

/// Tilde transcendent computed algebraically from the base trajectory:
/// sigma_B gives tilde sigma_B through `u`, sigma gives tilde sigma, and
/// sigma_B+ gives tilde sigma_B+.
pub fn tilde_via_base<T: Real>(base: &SolutionTrajectory<T>, x: T) -> Result<T> {
    let (s, d1, d2) = base.eval(x)?;
    match base.id {
        TranscendentId::SigmaB => {
            let st = cs_map_to_u(base.spec(), x, s, d1, d2, None)?;
            Ok(tilde_from_u(s, st.u))
        }
        TranscendentId::SigmaPv => Ok(s - T::one() + x * d1 / s),
        TranscendentId::SigmaBPlus => Ok(s + T::ratio(3, 2) - x * d1 / s),
        id => Err(Error::UnsupportedForm(format!("{id} is not a base transcendent"))),
    }
}

/// Largest `|tilde_direct - tilde_via_base|` over `xs`, with its location.
pub fn two_route_gap<T: Real>(base: &SolutionTrajectory<T>, tilde: &SolutionTrajectory<T>, xs: &[T]) -> Result<(f64, f64)> {
    let mut worst = (0.0, f64::NAN);
    for &x in xs {
        let a = tilde.sigma(x)?;
        let b = tilde_via_base(base, x)?;
        let g = (a - b).abs().f64();
        if !(g <= worst.0) {
            worst = (g, x.f64());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;
    use crate::ode::integrate;
    use crate::scalar::DoubleDouble;
    use crate::series::{extend_series_in, extend_series_with, Arithmetic};
    use TranscendentId::*;

    type D = DoubleDouble;

    fn traj(id: TranscendentId, x_end: f64) -> SolutionTrajectory<D> {
        let spec = lookup(id);
        let s = extend_series_in(spec, 16.0, 1e-30, Arithmetic::Tracked).unwrap();
        integrate(spec, &s, D::of(x_end), 2.5e-29).unwrap()
    }

    #[test]
    fn u_is_one_half_near_the_origin() {
        let spec = lookup(SigmaB);
        let s = extend_series_with(spec, 6.0, 1e-14).unwrap();
        let x = 1e-8;
        let (v, d1, d2) = s.eval(x).unwrap();
        let st = cs_map_to_u(spec, x, v, d1, d2, None).unwrap();
        assert!((st.u - 0.5).abs() < 0.01, "{}", st.u);
    }

    #[test]
    fn zero_sigma_is_degenerate() {
        let spec = lookup(SigmaB);
        assert!(matches!(cs_map_to_u(spec, 1.0, 0.0, 1.0, 0.0, None), Err(Error::DegenerateU { .. })));
    }

    #[test]
    fn tilde_from_u_values() {
        assert_eq!(tilde_from_u(0.0, 1.0), 0.5);
        // leading orders cancel: sigma_B ~ tau/pi, u - 1 ~ -1/2
        let x = 1e-6f64;
        let v = tilde_from_u(x.sqrt() / std::f64::consts::PI, 0.5);
        assert!((v - 1e-3 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn forward_map_reproduces_both_normal_forms() {
        let b = traj(SigmaB, 30.0);
        let t = traj(TildeSigmaB, 30.0);
        let params_t = lookup(TildeSigmaB).sd.unwrap().params.unwrap();
        for &x in &[0.5, 3.0, 12.0, 29.0] {
            let x = D::of(x);
            let (s, d1, d2) = b.eval(x).unwrap();
            let st = cs_map_to_u(b.spec(), x, s, d1, d2, None).unwrap();
            let (y, yp) = cs_forward(&st.params, x, st.u, st.du);
            let (y0, yp0) = y_from_sigma(b.spec(), x, s, d1).unwrap();
            assert!((y - y0).abs().hi < 1e-25 && (yp - yp0).abs().hi < 1e-25);
            // the same u with sqrt(2 alpha) = -1 gives the tilde function
            let (yt, ytp) = cs_forward(&params_t, x, st.u, st.du);
            let (ts, td1, _) = t.eval(x).unwrap();
            let (y1, yp1) = y_from_sigma(t.spec(), x, ts, td1).unwrap();
            assert!((yt - y1).abs().hi < 1e-20, "{}", (yt - y1).hi);
            assert!((ytp - yp1).abs().hi < 1e-20);
        }
    }

    #[test]
    fn u_solves_painleve_v() {
        let b = traj(SigmaB, 20.0);
        let params = lookup(SigmaB).sd.unwrap().params.unwrap();
        for &x in &[0.7, 5.0, 17.0] {
            let x = D::of(x);
            // u'' by differencing the closed-form u'
            let h = D::of(1e-6);
            let du = |x: D| {
                let (s, d1, d2) = b.eval(x).unwrap();
                cs_map_to_u(b.spec(), x, s, d1, d2, None).unwrap()
            };
            let st = du(x);
            let ddu = (du(x + h).du - du(x - h).du) / (D::of(2.0) * h);
            let r = pv_residual(&params, x, st.u, st.du, ddu);
            assert!(r.abs().hi < 1e-9, "{}", r.hi);
        }
    }

    #[test]
    fn newton_inversion_matches_closed_form() {
        let b = traj(SigmaB, 10.0);
        let x = D::of(4.0);
        let (s, d1, d2) = b.eval(x).unwrap();
        let exact = cs_map_to_u(b.spec(), x, s, d1, d2, None).unwrap();
        let (y, yp) = y_from_sigma(b.spec(), x, s, d1).unwrap();
        let hint = (exact.u * D::of(1.01), exact.du * D::of(0.99));
        let (u, du) = invert(&exact.params, x, y, yp, hint).unwrap();
        assert!((u - exact.u).abs().hi < 1e-24 && (du - exact.du).abs().hi < 1e-22);
    }

    #[test]
    fn algebraic_tilde_routes_match_direct_integration() {
        for (base, tilde, end) in [(SigmaB, TildeSigmaB, 60.0), (SigmaPv, TildeSigma, 18.0), (SigmaBPlus, TildeSigmaBPlus, 60.0)] {
            let b = traj(base, end);
            let t = traj(tilde, end);
            let xs: Vec<D> = (1..=60).map(|i| D::of(end * i as f64 / 60.0)).collect();
            let (gap, at) = two_route_gap(&b, &t, &xs).unwrap();
            assert!(gap < 1e-15, "{base}: {gap:e} at {at}");
        }
    }
}
