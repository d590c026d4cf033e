//! The six transcendents: their second-degree ODEs, boundary seeds and the
//! maps from the spacing variable to the ODE argument.
//!
//! Every equation has the shape `(s sigma'')^2 = F(D, p, sigma)` with
//! `D = s sigma' - sigma` and `p = sigma'`. `F` is stored as a table of
//! monomials with rational coefficients so other modules (the series engine,
//! the Taylor integrator, the map to Painleve V) can manipulate it
//! symbolically.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{PiRational, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TranscendentId {
    SigmaPv,
    SigmaB,
    SigmaBPlus,
    TildeSigma,
    TildeSigmaB,
    TildeSigmaBPlus,
}

impl TranscendentId {
    pub const ALL: [TranscendentId; 6] = [
        TranscendentId::SigmaPv,
        TranscendentId::SigmaB,
        TranscendentId::SigmaBPlus,
        TranscendentId::TildeSigma,
        TranscendentId::TildeSigmaB,
        TranscendentId::TildeSigmaBPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TranscendentId::SigmaPv => "sigma",
            TranscendentId::SigmaB => "sigma_B",
            TranscendentId::SigmaBPlus => "sigma_B+",
            TranscendentId::TildeSigma => "tilde_sigma",
            TranscendentId::TildeSigmaB => "tilde_sigma_B",
            TranscendentId::TildeSigmaBPlus => "tilde_sigma_B+",
        }
    }
}

impl fmt::Display for TranscendentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which reading of the tilde sigma_B+ equation to use. The two differ in
/// whether the last three terms carry `sigma'` or `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Reading {
    #[default]
    Primed,
    AsPrinted,
}

/// Exponents of `(D, p, sigma)` in one monomial of `F`.
pub type Powers = (u8, u8, u8);

/// Polynomial `F(D, p, sigma)` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OdeForm {
    terms: BTreeMap<Powers, Rational64>,
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

impl OdeForm {
    pub fn from_terms(terms: &[((u8, u8, u8), Rational64)]) -> Self {
        let mut f = Self::default();
        for &(k, c) in terms {
            f.add_term(k, c);
        }
        f
    }

    fn add_term(&mut self, k: Powers, c: Rational64) {
        let e = self.terms.entry(k).or_insert_with(Rational64::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Powers, Rational64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn depends_on_sigma(&self) -> bool {
        self.terms.keys().any(|k| k.2 > 0)
    }

    /// Highest total degree in `(D, p, sigma)`.
    pub fn degree(&self) -> u8 {
        self.terms.keys().map(|k| k.0 + k.1 + k.2).max().unwrap_or(0)
    }

    pub fn partial_d(&self) -> Self {
        let mut out = Self::default();
        for (&(a, b, c), &q) in &self.terms {
            if a > 0 {
                out.add_term((a - 1, b, c), q * Rational64::from(a as i64));
            }
        }
        out
    }

    pub fn partial_p(&self) -> Self {
        let mut out = Self::default();
        for (&(a, b, c), &q) in &self.terms {
            if b > 0 {
                out.add_term((a, b - 1, c), q * Rational64::from(b as i64));
            }
        }
        out
    }

    pub fn eval<T: Real>(&self, d: T, p: T, sigma: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (&(a, b, c), q)| {
            acc + rational_to_real::<T>(*q) * d.powi(a as i32) * p.powi(b as i32) * sigma.powi(c as i32)
        })
    }

    /// Sum of the absolute values of the monomials, a scale for residuals.
    pub fn eval_abs<T: Real>(&self, d: T, p: T, sigma: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (&(a, b, c), q)| {
            acc + (rational_to_real::<T>(*q) * d.powi(a as i32) * p.powi(b as i32) * sigma.powi(c as i32)).abs()
        })
    }

    /// Builds `F` from the normal form
    /// `x^2 y''^2 = -4 y'^2 (x y' - y) + A2 (x y' - y) + A3 y' + A4`
    /// under `y = -(sigma - x/8 - kappa)`, i.e. `y' = 1/8 - p`,
    /// `x y' - y = -D - kappa`.
    pub fn from_cs(a2: Rational64, a3: Rational64, a4: Rational64, kappa: Rational64) -> Self {
        // polynomials in (D, p) as maps (a, b) -> coefficient
        type Poly = BTreeMap<(u8, u8), Rational64>;
        fn mul(x: &Poly, y: &Poly) -> Poly {
            let mut out = Poly::new();
            for (&(a1, b1), c1) in x {
                for (&(a2, b2), c2) in y {
                    *out.entry((a1 + a2, b1 + b2)).or_insert_with(Rational64::zero) += c1 * c2;
                }
            }
            out
        }
        let yp: Poly = [((0, 0), r(1, 8)), ((0, 1), r(-1, 1))].into_iter().collect();
        let w: Poly = [((1, 0), r(-1, 1)), ((0, 0), -kappa)].into_iter().collect();
        let mut total = Poly::new();
        let mut acc = |p: Poly, scale: Rational64| {
            for (k, c) in p {
                *total.entry(k).or_insert_with(Rational64::zero) += c * scale;
            }
        };
        acc(mul(&mul(&yp, &yp), &w), r(-4, 1));
        acc(w.clone(), a2);
        acc(yp.clone(), a3);
        acc([((0, 0), Rational64::one())].into_iter().collect(), a4);
        let mut f = Self::default();
        for ((a, b), c) in total {
            f.add_term((a, b, 0), c);
        }
        f
    }
}

pub(crate) fn rational_to_real<T: Real>(q: Rational64) -> T {
    T::ratio(*q.numer(), *q.denom())
}

/// Parameters `(sqrt(2 alpha), beta, gamma)` of the Painleve V equation with
/// `delta = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PvParams {
    pub sqrt_2alpha: Rational64,
    pub beta: Rational64,
    pub gamma: Rational64,
}

impl PvParams {
    /// `(A2, A3, A4)` implied by the parameters.
    pub fn normal_form_coefficients(&self) -> (Rational64, Rational64, Rational64) {
        let g = self.gamma;
        let h = (Rational64::one() - self.sqrt_2alpha) * (Rational64::one() - self.sqrt_2alpha) / 2;
        (g * g / 4, g * (self.beta + h), g * g / 4 * (-self.beta + h))
    }
}

/// Normal-form data: `y = -(sigma - x/8 - kappa)` solves the normal form with
/// coefficients `(A2, A3, A4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SdCoefficients {
    pub a2: Rational64,
    pub a3: Rational64,
    pub a4: Rational64,
    pub kappa: Rational64,
    pub params: Option<PvParams>,
}

impl SdCoefficients {
    /// True when the stored parameters reproduce `(A2, A3, A4)` exactly.
    pub fn is_consistent(&self) -> bool {
        match self.params {
            Some(p) => p.normal_form_coefficients() == (self.a2, self.a3, self.a4),
            None => true,
        }
    }

    pub fn form(&self) -> OdeForm {
        OdeForm::from_cs(self.a2, self.a3, self.a4, self.kappa)
    }
}

/// Leading terms of the small-argument expansion, in powers of
/// `tau = x^(1/2)`: `(k, c)` stands for `c * x^(k/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSeed {
    pub terms: Vec<(u32, PiRational)>,
}

impl SeriesSeed {
    pub fn leading_exponent(&self) -> u32 {
        self.terms[0].0
    }

    pub fn largest_exponent(&self) -> u32 {
        self.terms.last().map(|t| t.0).unwrap_or(0)
    }
}

/// Map from the spacing variable `s` to the argument of the transcendent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArgumentMap {
    /// `x = pi s`
    PiS,
    /// `x = (pi s / 2)^2`
    HalfPiSSquared,
    /// `x = (pi s)^2`
    PiSSquared,
}

impl ArgumentMap {
    pub fn apply<T: Real>(self, s: T) -> T {
        let pi = T::pi();
        match self {
            ArgumentMap::PiS => pi * s,
            ArgumentMap::HalfPiSSquared => {
                let h = pi * s / T::of(2.0);
                h * h
            }
            ArgumentMap::PiSSquared => (pi * s) * (pi * s),
        }
    }

    pub fn invert<T: Real>(self, x: T) -> T {
        let pi = T::pi();
        match self {
            ArgumentMap::PiS => x / pi,
            ArgumentMap::HalfPiSSquared => T::of(2.0) * x.sqrt() / pi,
            ArgumentMap::PiSSquared => x.sqrt() / pi,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TranscendentSpec {
    pub id: TranscendentId,
    pub reading: Reading,
    pub form: OdeForm,
    pub seed: SeriesSeed,
    pub argument_map: ArgumentMap,
    /// Spacing of the exponent lattice in powers of `tau`: 2 when the
    /// expansion only has integer powers of `x`.
    pub lattice_step: u32,
    pub sd: Option<SdCoefficients>,
}

impl TranscendentSpec {
    /// `(s sigma'')^2 - F(s sigma' - sigma, sigma', sigma)`.
    pub fn residual<T: Real>(&self, s: T, sigma: T, dsigma: T, ddsigma: T) -> T {
        let a = s * ddsigma;
        a * a - self.f(s, sigma, dsigma)
    }

    pub fn f<T: Real>(&self, s: T, sigma: T, dsigma: T) -> T {
        self.form.eval(s * dsigma - sigma, dsigma, sigma)
    }

    /// Size of the terms entering the residual, used to make it relative.
    pub fn residual_scale<T: Real>(&self, s: T, sigma: T, dsigma: T, ddsigma: T) -> T {
        let a = s * ddsigma;
        a * a + self.form.eval_abs(s * dsigma - sigma, dsigma, sigma)
    }
}

fn seed(terms: &[(u32, i64, i64, i32)]) -> SeriesSeed {
    SeriesSeed { terms: terms.iter().map(|&(k, n, d, pw)| (k, PiRational::pi_pow(n, d, pw))).collect() }
}

fn build(id: TranscendentId, reading: Reading) -> TranscendentSpec {
    use TranscendentId::*;
    let t = |a, b, c, n, d| ((a, b, c), r(n, d));
    let sd_b = SdCoefficients {
        a2: r(1, 16),
        a3: r(-1, 16),
        a4: r(1, 128),
        kappa: r(1, 16),
        params: Some(PvParams { sqrt_2alpha: r(1, 1), beta: r(-1, 8), gamma: r(1, 2) }),
    };
    match id {
        SigmaPv => TranscendentSpec {
            id,
            reading,
            form: OdeForm::from_terms(&[t(2, 0, 0, -4, 1), t(1, 2, 0, -4, 1)]),
            seed: seed(&[(2, -1, 1, -1), (4, -1, 1, -2)]),
            argument_map: ArgumentMap::PiS,
            lattice_step: 2,
            sd: None,
        },
        TildeSigma => TranscendentSpec {
            id,
            reading,
            form: OdeForm::from_terms(&[t(2, 0, 0, -4, 1), t(1, 2, 0, -4, 1), t(0, 2, 0, 4, 1)]),
            seed: seed(&[(6, -1, 3, -1)]),
            argument_map: ArgumentMap::PiS,
            lattice_step: 2,
            sd: None,
        },
        SigmaB | SigmaBPlus => TranscendentSpec {
            id,
            reading,
            form: OdeForm::from_terms(&[t(1, 1, 0, -1, 1), t(1, 2, 0, 4, 1), t(0, 2, 0, 1, 4)]),
            seed: if id == SigmaB {
                seed(&[(1, 1, 1, -1), (2, 2, 1, -2)])
            } else {
                seed(&[(3, 1, 3, -1), (6, 2, 27, -2)])
            },
            argument_map: if id == SigmaB { ArgumentMap::HalfPiSSquared } else { ArgumentMap::PiSSquared },
            lattice_step: 1,
            sd: Some(sd_b),
        },
        TildeSigmaB => TranscendentSpec {
            id,
            reading,
            form: OdeForm::from_terms(&[
                t(1, 2, 0, 4, 1),
                t(1, 1, 0, -1, 1),
                t(0, 2, 0, 9, 4),
                t(0, 1, 0, -3, 2),
                t(0, 0, 0, 1, 4),
            ]),
            seed: seed(&[(2, 1, 3, 0), (4, -1, 45, 0), (5, 8, 135, -1)]),
            argument_map: ArgumentMap::HalfPiSSquared,
            lattice_step: 1,
            sd: Some(SdCoefficients {
                a2: r(1, 16),
                a3: r(15, 16),
                a4: r(17, 128),
                kappa: r(9, 16),
                params: Some(PvParams { sqrt_2alpha: r(-1, 1), beta: r(-1, 8), gamma: r(1, 2) }),
            }),
        },
        TildeSigmaBPlus => {
            let form = match reading {
                Reading::Primed => OdeForm::from_terms(&[
                    t(1, 2, 0, 4, 1),
                    t(1, 1, 0, -1, 1),
                    t(0, 2, 0, 25, 4),
                    t(0, 1, 0, -5, 2),
                    t(0, 0, 0, 1, 4),
                ]),
                Reading::AsPrinted => OdeForm::from_terms(&[
                    t(1, 2, 0, 4, 1),
                    t(1, 0, 1, -1, 1),
                    t(0, 0, 2, 25, 4),
                    t(0, 0, 1, -5, 2),
                    t(0, 0, 0, 1, 4),
                ]),
            };
            // the normal form only exists for the primed reading; sqrt(2 alpha)
            // is then fixed up to the pair {-1, 3}, so no parameters are stored
            let sd = (reading == Reading::Primed).then_some(SdCoefficients {
                a2: r(1, 16),
                a3: r(15, 16),
                a4: r(17, 128),
                kappa: r(25, 16),
                params: None,
            });
            TranscendentSpec {
                id,
                reading,
                form,
                seed: seed(&[(2, 1, 5, 0), (7, 8, 23625, -1)]),
                argument_map: ArgumentMap::PiSSquared,
                lattice_step: 1,
                sd,
            }
        }
    }
}

/// Catalog entry with the default reading.
pub fn lookup(id: TranscendentId) -> &'static TranscendentSpec {
    lookup_reading(id, Reading::Primed)
}

/// Catalog entry with an explicit reading. The reading only matters for
/// [`TranscendentId::TildeSigmaBPlus`].
pub fn lookup_reading(id: TranscendentId, reading: Reading) -> &'static TranscendentSpec {
    static TABLE: OnceLock<Vec<TranscendentSpec>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut v: Vec<TranscendentSpec> = TranscendentId::ALL.iter().map(|&id| build(id, Reading::Primed)).collect();
        v.push(build(TranscendentId::TildeSigmaBPlus, Reading::AsPrinted));
        v
    });
    if id == TranscendentId::TildeSigmaBPlus && reading == Reading::AsPrinted {
        return &table[6];
    }
    let idx = TranscendentId::ALL.iter().position(|&x| x == id).unwrap();
    &table[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::SeriesField;
    use TranscendentId::*;

    #[test]
    fn zero_solution_annihilates_pv() {
        assert_eq!(lookup(SigmaPv).residual(1.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn tilde_sigma_b_linear_function() {
        let spec = lookup(TildeSigmaB);
        for &s in &[0.3, 1.0, 7.0] {
            let res = spec.residual(s, s / 4.0, 0.25, 0.0);
            // left side vanishes, so the residual is -F = -1/64
            assert!((res + 1.0 / 64.0).abs() < 1e-15, "{res}");
        }
    }

    #[test]
    fn residual_is_even_in_second_derivative() {
        for id in TranscendentId::ALL {
            let spec = lookup(id);
            let a = spec.residual(0.7, 0.3, -0.2, 1.3);
            let b = spec.residual(0.7, 0.3, -0.2, -1.3);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn argument_maps() {
        let pi = std::f64::consts::PI;
        assert!((lookup(SigmaPv).argument_map.apply(2.0) - 2.0 * pi).abs() < 1e-15);
        assert!((lookup(SigmaB).argument_map.apply(2.0) - pi * pi).abs() < 1e-14);
        assert!((lookup(SigmaBPlus).argument_map.apply(2.0) - 4.0 * pi * pi).abs() < 1e-13);
        for m in [ArgumentMap::PiS, ArgumentMap::HalfPiSSquared, ArgumentMap::PiSSquared] {
            assert!((m.invert(m.apply(1.7)) - 1.7).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_form_parameters_match_coefficients() {
        for id in TranscendentId::ALL {
            if let Some(sd) = lookup(id).sd {
                assert!(sd.is_consistent(), "{id}");
            }
        }
        let p = lookup(SigmaB).sd.unwrap().params.unwrap();
        assert_eq!(p.normal_form_coefficients(), (r(1, 16), r(-1, 16), r(1, 128)));
    }

    #[test]
    fn normal_form_regenerates_stored_equations() {
        for id in [SigmaB, SigmaBPlus, TildeSigmaB, TildeSigmaBPlus] {
            let spec = lookup(id);
            assert_eq!(spec.sd.unwrap().form(), spec.form, "{id}");
        }
    }

    #[test]
    fn both_roots_of_sqrt_2alpha_give_the_same_plus_coefficients() {
        for a in [-1, 3] {
            let p = PvParams { sqrt_2alpha: r(a, 1), beta: r(-1, 8), gamma: r(1, 2) };
            assert_eq!(p.normal_form_coefficients(), (r(1, 16), r(15, 16), r(17, 128)));
        }
    }

    #[test]
    fn partial_derivatives() {
        let f = &lookup(SigmaB).form;
        // F = -pD + 4p^2 D + p^2/4
        let (d, p) = (0.3, -0.7);
        let fd = f.partial_d().eval(d, p, 0.0);
        let fp = f.partial_p().eval(d, p, 0.0);
        assert!((fd - (-p + 4.0 * p * p)).abs() < 1e-15);
        assert!((fp - (-d + 8.0 * p * d + p / 2.0)).abs() < 1e-15);
        assert!(!f.depends_on_sigma());
        assert!(lookup_reading(TildeSigmaBPlus, Reading::AsPrinted).form.depends_on_sigma());
    }

    #[test]
    fn seeds_are_stored_verbatim() {
        let pi = std::f64::consts::PI;
        let s = &lookup(SigmaBPlus).seed.terms;
        assert_eq!(s[0].0, 3);
        assert!((s[1].1.to_real::<f64>() - 2.0 / 3.0 / (3.0 * pi).powi(2)).abs() < 1e-17);
        let t = &lookup(TildeSigmaBPlus).seed.terms;
        assert_eq!(t[1].0, 7);
        assert!((t[1].1.to_real::<f64>() - 8.0 / (27.0 * 125.0 * 7.0 * pi)).abs() < 1e-18);
    }
}
