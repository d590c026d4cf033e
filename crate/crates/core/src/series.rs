//! Small-argument expansions of the transcendents.
//!
//! A solution is sought as `sigma(x) = sum_k c_k tau^k` with `tau = x^(1/2)`.
//! Substituting into `(x sigma'')^2 - F` gives a Laurent series in `tau`;
//! the coefficients are fixed order by order. At each order the residual
//! coefficient is a polynomial (degree at most 3) in the single new unknown,
//! recovered by probing it at four values. Linear orders have one root,
//! quadratic orders either a double root or two candidate branches, each of
//! which is followed to the target order; exactly one branch may survive.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::catalog::{lookup_reading, Reading, TranscendentId, TranscendentSpec};
use crate::error::{Error, Result};
use crate::scalar::{DoubleDouble, PiRational, Real, SeriesField, Tracked};

/// Default expansion order in `x`.
pub const DEFAULT_ORDER: f64 = 6.0;
/// Default bound on the relative size of the first omitted term inside the
/// trust radius.
pub const DEFAULT_TRUST_TOL: f64 = 1e-14;

/// One coefficient `c * x^(tau_exp/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerm {
    pub tau_exp: u32,
    /// Exact value when the recurrence could be carried out in Q[pi, 1/pi].
    pub exact: Option<PiRational>,
    pub value: DoubleDouble,
    /// Absolute error bound on `value` beyond double-double rounding.
    pub err: f64,
}

impl SeriesTerm {
    pub fn exponent(&self) -> f64 {
        self.tau_exp as f64 / 2.0
    }

    fn from_field<F: SeriesField>(tau_exp: u32, c: &F) -> Self {
        Self { tau_exp, exact: c.exact_value(), value: c.to_real(), err: c.error_bound() }
    }
}

#[derive(Clone, Debug)]
pub struct SeriesExpansion {
    pub id: TranscendentId,
    pub reading: Reading,
    /// Every lattice coefficient up to `order`, zeros included.
    pub terms: Vec<SeriesTerm>,
    /// Largest exponent (in `x`) carried.
    pub order: f64,
    /// Largest `x` at which the estimated truncation error is below
    /// `trust_tol * |sigma(x)|`.
    pub trust_radius: f64,
    pub trust_tol: f64,
    /// A coefficient `c_k` first enters the residual at `tau^(k + shift)`.
    pub shift: i32,
    /// Requested order; `order` can exceed it when the residual lags behind
    /// the coefficients (negative shift).
    pub target_order: f64,
    /// Coefficients past `order`, used only for the truncation estimate.
    tail: Vec<SeriesTerm>,
}

/// Laurent polynomial in `tau`: `c[i]` multiplies `tau^(lo + i)`.
#[derive(Clone, Debug)]
struct Laurent<F> {
    lo: i32,
    c: Vec<F>,
}

impl<F: SeriesField> Laurent<F> {
    fn get(&self, e: i32) -> F {
        if e < self.lo {
            return F::zero();
        }
        self.c.get((e - self.lo) as usize).cloned().unwrap_or_else(F::zero)
    }

    fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    /// Product truncated after `tau^max_e`.
    fn mul(&self, o: &Self, max_e: i32) -> Self {
        let lo = self.lo + o.lo;
        let hi = (self.hi() + o.hi()).min(max_e);
        let mut c = Vec::new();
        for e in lo..=hi {
            c.push(self.coeff_of_product(o, e));
        }
        Self { lo, c }
    }

    fn coeff_of_product(&self, o: &Self, e: i32) -> F {
        let mut acc = F::zero();
        for (i, a) in self.c.iter().enumerate() {
            let j = e - (self.lo + i as i32);
            if j < o.lo || j > o.hi() {
                continue;
            }
            acc = acc + a.clone() * o.c[(j - o.lo) as usize].clone();
        }
        acc
    }
}

/// The four series entering the residual, derived from the coefficients.
struct Parts<F> {
    a: Laurent<F>, // x sigma''
    d: Laurent<F>, // x sigma' - sigma
    p: Laurent<F>, // sigma'
    s: Laurent<F>, // sigma
}

fn parts<F: SeriesField>(coeffs: &BTreeMap<u32, F>) -> Parts<F> {
    let build = |off: i32, w: &dyn Fn(i64) -> (i64, i64)| {
        let kmin = *coeffs.keys().next().unwrap_or(&0) as i32;
        let kmax = *coeffs.keys().last().unwrap_or(&0) as i32;
        let mut c = Vec::new();
        for k in kmin..=kmax {
            let v = match coeffs.get(&(k as u32)) {
                Some(v) => {
                    let (n, d) = w(k as i64);
                    v.clone() * F::from_ratio(n, d)
                }
                None => F::zero(),
            };
            c.push(v);
        }
        Laurent { lo: kmin + off, c }
    };
    Parts {
        a: build(-2, &|k| (k * (k - 2), 4)),
        d: build(0, &|k| (k - 2, 2)),
        p: build(-2, &|k| (k, 2)),
        s: build(0, &|_| (1, 1)),
    }
}

impl<F: SeriesField> Parts<F> {
    fn factor(&self, i: usize) -> &Laurent<F> {
        match i {
            0 => &self.d,
            1 => &self.p,
            _ => &self.s,
        }
    }

    /// Lowest exponent any residual coefficient can have.
    fn lowest(&self, spec: &TranscendentSpec) -> i32 {
        let mut lo = 2 * self.a.lo;
        for ((a, b, c), _) in spec.form.terms() {
            lo = lo.min(a as i32 * self.d.lo + b as i32 * self.p.lo + c as i32 * self.s.lo);
        }
        lo
    }

    fn highest(&self, spec: &TranscendentSpec) -> i32 {
        let mut hi = 2 * self.a.hi();
        for ((a, b, c), _) in spec.form.terms() {
            hi = hi.max(a as i32 * self.d.hi() + b as i32 * self.p.hi() + c as i32 * self.s.hi());
        }
        hi
    }

    /// Residual coefficients on `[from, to]`.
    fn residual(&self, spec: &TranscendentSpec, from: i32, to: i32) -> Vec<F> {
        let mut out: Vec<F> = (from..=to).map(|e| self.a.coeff_of_product(&self.a, e)).collect();
        let mut squares: BTreeMap<usize, Laurent<F>> = BTreeMap::new();
        let floor = self.d.lo.min(self.p.lo).min(self.s.lo).min(0);
        for ((a, b, c), q) in spec.form.terms() {
            let mut groups: Vec<Laurent<F>> = Vec::new();
            for (i, n) in [a, b, c].into_iter().enumerate() {
                let f = self.factor(i);
                match n {
                    0 => {}
                    1 => groups.push(f.clone()),
                    _ => {
                        for _ in 0..n / 2 {
                            let sq = squares.entry(i).or_insert_with(|| f.mul(f, to - 2 * floor)).clone();
                            groups.push(sq);
                        }
                        if n % 2 == 1 {
                            groups.push(f.clone());
                        }
                    }
                }
            }
            let qf = F::from_ratio(*q.numer(), *q.denom());
            if groups.is_empty() {
                if from <= 0 && 0 <= to {
                    let i = (0 - from) as usize;
                    out[i] = out[i].clone() - qf;
                }
                continue;
            }
            let last = groups.pop().unwrap();
            let mut prefix: Option<Laurent<F>> = None;
            for g in groups {
                prefix = Some(match prefix {
                    None => g,
                    Some(p) => p.mul(&g, to - last.lo),
                });
            }
            for (i, e) in (from..=to).enumerate() {
                let v = match &prefix {
                    None => last.get(e),
                    Some(p) => p.coeff_of_product(&last, e),
                };
                out[i] = out[i].clone() - qf.clone() * v;
            }
        }
        out
    }

    fn residual_at(&self, spec: &TranscendentSpec, m: i32) -> F {
        self.residual(spec, m, m).pop().unwrap()
    }
}

fn residual_coeff<F: SeriesField>(spec: &TranscendentSpec, coeffs: &BTreeMap<u32, F>, m: i32) -> F {
    parts(coeffs).residual_at(spec, m)
}

enum Failure {
    Err(Error),
    /// The exact field cannot represent a root; retry in floating point.
    LeftField,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

struct Solver<'a> {
    spec: &'a TranscendentSpec,
    lattice: Vec<u32>,
    shift: i32,
}

impl Solver<'_> {
    fn half(k: i32) -> f64 {
        k as f64 / 2.0
    }

    fn with_unfixed_zero<F: SeriesField>(&self, fixed: &BTreeMap<u32, F>) -> BTreeMap<u32, F> {
        let mut m = fixed.clone();
        for &k in &self.lattice {
            m.entry(k).or_insert_with(F::zero);
        }
        m
    }

    /// Fixes all lattice coefficients, processing residual orders from `m0`
    /// through `m_end`.
    fn run<F: SeriesField>(
        &self,
        mut fixed: BTreeMap<u32, F>,
        m0: i32,
        m_end: i32,
    ) -> std::result::Result<BTreeMap<u32, F>, Failure> {
        let id = self.spec.id;
        let mut m = m0;
        while m <= m_end {
            let base = self.with_unfixed_zero(&fixed);
            let r0 = residual_coeff(self.spec, &base, m);
            let window: Vec<u32> = self
                .lattice
                .iter()
                .copied()
                .filter(|k| !fixed.contains_key(k) && (*k as i32) <= m - self.shift + 2)
                .collect();
            let mut deps = Vec::new();
            for &k in &window {
                let mut probe = base.clone();
                let mut depends = false;
                for v in [1, -1, 2] {
                    probe.insert(k, F::from_ratio(v, 1));
                    if !(residual_coeff(self.spec, &probe, m) - r0.clone()).is_negligible() {
                        depends = true;
                        break;
                    }
                }
                if depends {
                    deps.push(k);
                }
            }
            if deps.is_empty() {
                if !r0.is_negligible() {
                    return Err(Error::InconsistentSeed { id, order: Self::half(m - self.shift), residual: r0.magnitude() }.into());
                }
                // an unknown whose own order has passed without entering is free
                if let Some(&k) = self.lattice.iter().find(|&&k| !fixed.contains_key(&k) && (k as i32) + self.shift < m) {
                    return Err(Error::NonUniqueCoefficient { id, order: Self::half(k as i32) }.into());
                }
                m += 1;
                continue;
            }
            if deps.len() > 1 {
                let k = deps[0];
                if (k as i32) + self.shift < m {
                    return Err(Error::NonUniqueCoefficient { id, order: Self::half(k as i32) }.into());
                }
                return Err(Error::UnresolvedOrder { id, order: Self::half(m - self.shift) }.into());
            }
            let k = deps[0];
            let roots = self.roots(&base, k, m, r0)?;
            match roots.len() {
                0 => {
                    return Err(Error::InconsistentSeed { id, order: Self::half(m - self.shift), residual: f64::NAN }.into());
                }
                1 => {
                    fixed.insert(k, roots.into_iter().next().unwrap());
                }
                _ => {
                    let mut survivors = Vec::new();
                    let mut first_err = None;
                    for root in roots {
                        let mut f = fixed.clone();
                        f.insert(k, root);
                        match self.run(f, m, m_end) {
                            Ok(sol) => survivors.push(sol),
                            Err(Failure::Err(e)) => {
                                first_err.get_or_insert(e);
                            }
                            Err(Failure::LeftField) => return Err(Failure::LeftField),
                        }
                    }
                    return match survivors.len() {
                        1 => Ok(survivors.pop().unwrap()),
                        0 => Err(first_err.unwrap().into()),
                        _ => Err(Error::NonUniqueCoefficient { id, order: Self::half(k as i32) }.into()),
                    };
                }
            }
        }
        if let Some(&k) = self.lattice.iter().find(|k| !fixed.contains_key(k)) {
            return Err(Error::NonUniqueCoefficient { id, order: Self::half(k as i32) }.into());
        }
        Ok(fixed)
    }

    /// Real roots of the residual coefficient at `m` as a polynomial in `c_k`.
    fn roots<F: SeriesField>(
        &self,
        base: &BTreeMap<u32, F>,
        k: u32,
        m: i32,
        p0: F,
    ) -> std::result::Result<Vec<F>, Failure> {
        let val = |v: i64| {
            let mut probe = base.clone();
            probe.insert(k, F::from_ratio(v, 1));
            residual_coeff(self.spec, &probe, m)
        };
        let (p1, pm, p2) = (val(1), val(-1), val(2));
        let half = F::from_ratio(1, 2);
        let a0 = p0;
        let a2 = (p1.clone() + pm.clone()) * half.clone() - a0.clone();
        let u = (p1 - pm) * half;
        let v = p2 - a0.clone() - a2.clone() * F::from_ratio(4, 1);
        let a3 = (v - u.clone() * F::from_ratio(2, 1)) * F::from_ratio(1, 6);
        let a1 = u - a3.clone();
        if !a3.is_negligible() {
            if a0.is_negligible() {
                let mut r = quadratic(a3, a2, a1)?;
                r.insert(0, F::zero());
                return Ok(r);
            }
            return Err(Error::UnresolvedOrder { id: self.spec.id, order: Self::half(m - self.shift) }.into());
        }
        if !a2.is_negligible() {
            return quadratic(a2, a1, a0);
        }
        let root = (-a0).checked_div(&a1).ok_or(Failure::LeftField)?;
        Ok(vec![root])
    }
}

/// Real roots of `a c^2 + b c + c0`.
fn quadratic<F: SeriesField>(a: F, b: F, c0: F) -> std::result::Result<Vec<F>, Failure> {
    let two_a = a.clone() * F::from_ratio(2, 1);
    let disc = b.clone() * b.clone() - a * c0 * F::from_ratio(4, 1);
    if disc.is_negligible() {
        return Ok(vec![(-b).checked_div(&two_a).ok_or(Failure::LeftField)?]);
    }
    if disc.magnitude() > 0.0 && disc.to_real::<f64>() < 0.0 {
        return Ok(vec![]);
    }
    let r = disc.checked_sqrt().ok_or(Failure::LeftField)?;
    let x1 = (-b.clone() - r.clone()).checked_div(&two_a).ok_or(Failure::LeftField)?;
    let x2 = (-b + r).checked_div(&two_a).ok_or(Failure::LeftField)?;
    Ok(vec![x1, x2])
}

fn seed_map<F: SeriesField>(spec: &TranscendentSpec) -> BTreeMap<u32, F> {
    spec.seed.terms.iter().map(|(k, c)| (*k, F::from_pi_rational(c))).collect()
}

fn lattice(spec: &TranscendentSpec, k_max: u32) -> Vec<u32> {
    let lead = spec.seed.leading_exponent();
    (lead..=k_max).step_by(spec.lattice_step as usize).collect()
}

/// Exponent offset between a coefficient and the residual order it first
/// enters, measured on a far coefficient against the seed.
fn measure_shift<F: SeriesField>(spec: &TranscendentSpec) -> i32 {
    let seed: BTreeMap<u32, F> = seed_map(spec);
    let far = spec.seed.largest_exponent() + 8 * spec.lattice_step;
    let mut with_far = seed.clone();
    with_far.insert(far, F::one());
    let pa = parts(&seed);
    let pb = parts(&with_far);
    let lo = pb.lowest(spec);
    let hi = 3 * far as i32 + 8;
    let ra = pa.residual(spec, lo, hi);
    let rb = pb.residual(spec, lo, hi);
    for (i, (x, y)) in ra.into_iter().zip(rb).enumerate() {
        if !(y - x).is_negligible() {
            return lo + i as i32 - far as i32;
        }
    }
    0
}

fn solve_in<F: SeriesField>(
    spec: &TranscendentSpec,
    start: BTreeMap<u32, F>,
    k_max: u32,
) -> std::result::Result<(BTreeMap<u32, F>, i32), Failure> {
    let shift = measure_shift::<F>(spec);
    let solver = Solver { spec, lattice: lattice(spec, k_max), shift };
    let m0 = parts(&solver.with_unfixed_zero(&start)).lowest(spec);
    let m_end = k_max.max(spec.seed.largest_exponent()) as i32 + shift;
    let sol = solver.run(start, m0, m_end)?;
    Ok((sol, shift))
}

/// Highest lattice exponent needed so the residual vanishes through
/// `tau^(2 order)`.
fn k_max_for(spec: &TranscendentSpec, order: f64, shift: i32) -> u32 {
    let base = (2.0 * order).round() as i32 - shift.min(0);
    let lead = spec.seed.leading_exponent() as i32;
    let step = spec.lattice_step as i32;
    // round up onto the lattice
    let k = lead + ((base - lead).max(0) + step - 1) / step * step;
    k as u32
}

/// Extends the catalog seed to `target_order` (a multiple of 1/2) with the
/// default trust tolerance.
pub fn extend_series(spec: &TranscendentSpec, target_order: f64) -> Result<SeriesExpansion> {
    extend_series_with(spec, target_order, DEFAULT_TRUST_TOL)
}

pub fn extend_series_with(spec: &TranscendentSpec, target_order: f64, trust_tol: f64) -> Result<SeriesExpansion> {
    check_order(spec, target_order)?;
    build(spec, target_order, trust_tol, None)
}

/// Coefficient arithmetic for the recurrence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arithmetic {
    /// Exact in `Q[pi, 1/pi]`, falling back to `Tracked` when a root leaves the field.
    #[default]
    Exact,
    /// Double-double with a running error bound; much faster at high order.
    Tracked,
}

/// Like [`extend_series_with`], choosing the coefficient arithmetic.
pub fn extend_series_in(spec: &TranscendentSpec, target_order: f64, trust_tol: f64, arithmetic: Arithmetic) -> Result<SeriesExpansion> {
    match arithmetic {
        Arithmetic::Exact => extend_series_with(spec, target_order, trust_tol),
        Arithmetic::Tracked => {
            check_order(spec, target_order)?;
            match build_in::<Tracked<DoubleDouble>>(spec, target_order, trust_tol, None) {
                Ok(s) => Ok(s),
                Err(Failure::Err(e)) => Err(e),
                Err(Failure::LeftField) => Err(Error::UnresolvedOrder { id: spec.id, order: target_order }),
            }
        }
    }
}

fn check_order(spec: &TranscendentSpec, target_order: f64) -> Result<()> {
    if (2.0 * target_order).fract() != 0.0 || 2.0 * target_order < spec.seed.largest_exponent() as f64 {
        return Err(Error::InvalidArgument(format!(
            "target order {target_order} must be a multiple of 1/2 and at least {}",
            spec.seed.largest_exponent() as f64 / 2.0
        )));
    }
    Ok(())
}

fn build(spec: &TranscendentSpec, target_order: f64, trust_tol: f64, from: Option<&SeriesExpansion>) -> Result<SeriesExpansion> {
    match build_in::<PiRational>(spec, target_order, trust_tol, from) {
        Ok(s) => Ok(s),
        Err(Failure::Err(e)) => Err(e),
        Err(Failure::LeftField) => match build_in::<Tracked<DoubleDouble>>(spec, target_order, trust_tol, from) {
            Ok(s) => Ok(s),
            Err(Failure::Err(e)) => Err(e),
            Err(Failure::LeftField) => Err(Error::UnresolvedOrder { id: spec.id, order: target_order }),
        },
    }
}

fn build_in<F: SeriesField>(
    spec: &TranscendentSpec,
    target_order: f64,
    trust_tol: f64,
    from: Option<&SeriesExpansion>,
) -> std::result::Result<SeriesExpansion, Failure> {
    let shift = measure_shift::<F>(spec);
    let k_max = k_max_for(spec, target_order, shift);
    // two more lattice points feed the truncation estimate
    let k_tail = k_max + 2 * spec.lattice_step;
    let mut start: BTreeMap<u32, F> = seed_map(spec);
    if let Some(prev) = from {
        for t in &prev.terms {
            match F::from_stored(t.exact.as_ref(), t.value, t.err) {
                Some(c) => {
                    start.insert(t.tau_exp, c);
                }
                None => return Err(Failure::LeftField),
            }
        }
    }
    let (sol, shift) = solve_in(spec, start, k_tail)?;
    let mut terms = Vec::new();
    let mut tail = Vec::new();
    for (k, c) in &sol {
        let t = SeriesTerm::from_field(*k, c);
        if *k <= k_max {
            terms.push(t);
        } else {
            tail.push(t);
        }
    }
    let mut out = SeriesExpansion {
        id: spec.id,
        reading: spec.reading,
        terms,
        order: k_max as f64 / 2.0,
        trust_radius: 0.0,
        trust_tol,
        shift,
        target_order,
        tail,
    };
    out.trust_radius = out.compute_trust_radius();
    Ok(out)
}

impl SeriesExpansion {
    fn spec(&self) -> &'static TranscendentSpec {
        lookup_reading(self.id, self.reading)
    }

    /// Extends to a higher order, reusing the known coefficients.
    pub fn extend_to(&self, target_order: f64) -> Result<SeriesExpansion> {
        if target_order <= self.target_order {
            return Ok(self.clone());
        }
        build(self.spec(), target_order, self.trust_tol, Some(self))
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| t.exact.is_some())
    }

    pub fn coefficient(&self, tau_exp: u32) -> Option<&SeriesTerm> {
        self.terms.iter().find(|t| t.tau_exp == tau_exp)
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = &SeriesTerm> {
        self.terms.iter().filter(|t| t.value.hi != 0.0)
    }

    fn truncation_estimate(&self, x: f64) -> f64 {
        let tau = x.sqrt();
        self.tail.iter().map(|t| t.value.hi.abs() * tau.powi(t.tau_exp as i32)).sum()
    }

    fn compute_trust_radius(&self) -> f64 {
        let ok = |x: f64| {
            let sigma = self.eval_unchecked::<f64>(x).0.abs();
            self.truncation_estimate(x) <= self.trust_tol * sigma
        };
        // bisection in log x; small x is always acceptable
        let (mut lo, mut hi) = (-60.0f64, 2.0f64);
        if ok(10f64.powf(hi)) {
            return 10f64.powf(hi);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ok(10f64.powf(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        10f64.powf(lo)
    }

    fn eval_unchecked<T: Real>(&self, x: T) -> (T, T, T) {
        let tau = x.sqrt();
        let (mut s, mut d1, mut d2) = (T::zero(), T::zero(), T::zero());
        for t in &self.terms {
            if t.value.hi == 0.0 {
                continue;
            }
            let c = T::from_hi_lo(t.value.hi, t.value.lo);
            let k = t.tau_exp as i32;
            let e = T::ratio(k as i64, 2);
            let pk = tau.powi(k);
            s += c * pk;
            d1 += c * e * pk / x;
            d2 += c * e * (e - T::one()) * pk / (x * x);
        }
        (s, d1, d2)
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if !(x > 0.0) || x > self.trust_radius * (1.0 + 1e-12) {
            return Err(Error::OutOfTrustRadius { s: x, radius: self.trust_radius });
        }
        Ok(())
    }

    /// `(sigma, sigma', sigma'')` at `x`.
    pub fn eval<T: Real>(&self, x: T) -> Result<(T, T, T)> {
        self.check_range(x.f64())?;
        Ok(self.eval_unchecked(x))
    }

    /// `int_0^x sigma(t)/t dt`, integrated term by term.
    pub fn integral_term<T: Real>(&self, x: T) -> Result<T> {
        self.check_range(x.f64())?;
        let tau = x.sqrt();
        let mut acc = T::zero();
        for t in self.nonzero_terms() {
            let c = T::from_hi_lo(t.value.hi, t.value.lo);
            let k = t.tau_exp as i32;
            acc += c * T::of(2.0) / T::of(k as f64) * tau.powi(k);
        }
        Ok(acc)
    }

    /// Exact residual of the truncated series as a Laurent polynomial in
    /// `tau`: pairs `(exponent, coefficient)`, all of them.
    pub fn residual_polynomial(&self) -> Option<Vec<(i32, PiRational)>> {
        let coeffs: BTreeMap<u32, PiRational> =
            self.terms.iter().map(|t| t.exact.clone().map(|c| (t.tau_exp, c))).collect::<Option<_>>()?;
        let p = parts(&coeffs);
        let spec = self.spec();
        let lo = p.lowest(spec);
        let hi = p.highest(spec);
        let r = p.residual(spec, lo, hi);
        Some(r.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (lo + i as i32, c)).collect())
    }

    /// Residual of the truncated series at `x`, evaluated from the exact
    /// residual polynomial when available, otherwise directly.
    pub fn residual_at(&self, x: f64) -> f64 {
        if let Some(poly) = self.residual_polynomial() {
            let tau = DoubleDouble::of(x).sqrt();
            let mut acc = DoubleDouble::zero();
            for (e, c) in poly {
                acc += c.to_real::<DoubleDouble>() * tau.powi(e);
            }
            return acc.f64();
        }
        let (s, d1, d2) = self.eval_unchecked(DoubleDouble::of(x));
        self.spec().residual(DoubleDouble::of(x), s, d1, d2).f64()
    }
}

/// Residual after substituting the seed alone, relative to the size of the
/// terms that cancel in it.
pub fn seed_relative_residual(spec: &TranscendentSpec, x: f64) -> f64 {
    let coeffs: BTreeMap<u32, PiRational> = seed_map(spec);
    let p = parts(&coeffs);
    let lo = p.lowest(spec);
    let hi = p.highest(spec);
    let xd = DoubleDouble::of(x);
    let tau = xd.sqrt();
    let mut acc = DoubleDouble::zero();
    for (i, c) in p.residual(spec, lo, hi).into_iter().enumerate() {
        acc += c.to_real::<DoubleDouble>() * tau.powi(lo + i as i32);
    }
    let (mut v, mut d1, mut d2) = (DoubleDouble::zero(), DoubleDouble::zero(), DoubleDouble::zero());
    for (k, c) in &spec.seed.terms {
        let c: DoubleDouble = c.to_real();
        let e = DoubleDouble::ratio(*k as i64, 2);
        let pk = tau.powi(*k as i32);
        v += c * pk;
        d1 += c * e * pk / xd;
        d2 += c * e * (e - DoubleDouble::one()) * pk / (xd * xd);
    }
    (acc / spec.residual_scale(xd, v, d1, d2)).f64()
}
