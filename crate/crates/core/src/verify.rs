//! Verification suites. Each check reports its worst case, where it
//! occurred, and the tolerance it was held to.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{lookup, lookup_reading, Reading, TranscendentId};
use crate::error::{Error, Result};
use crate::fredholm::{oracle_compare, DEFAULT_NODES};
use crate::ode::pv_route::tilde_via_base;
use crate::ode::HANDOFF_TOL;
use crate::scalar::Real;
use crate::series::{extend_series, DEFAULT_ORDER};
use crate::spacing::{Beta, Identity, SpacingLaws};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Series,
    Ode,
    Identities,
    Oracle,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Largest discrepancy seen.
    pub worst: f64,
    /// Where it was seen (spacing `s`, or the equation's own argument).
    pub at: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, worst: f64, at: f64, tol: f64) -> Self {
        Self { name: name.into(), worst, at, tol, passed: worst <= tol }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<44} worst {:>10.3e} at {:<10.4e} tol {:.1e}",
            if self.passed { "ok" } else { "FAIL" },
            self.name,
            self.worst,
            self.at,
            self.tol
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst_failure(&self) -> Option<&Check> {
        self.checks.iter().filter(|c| !c.passed).max_by(|a, b| (a.worst / a.tol).total_cmp(&(b.worst / b.tol)))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `n` points evenly spaced on `[a, b]`.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn worst_of<I: IntoIterator<Item = (f64, f64)>>(it: I) -> (f64, f64) {
    it.into_iter().fold((0.0, f64::NAN), |w, (v, at)| if v > w.0 || w.1.is_nan() { (v, at) } else { w })
}

/// Residual of each extended series: the lowest power of `s` left in the
/// residual must exceed the order, and `|residual|/s^order` must shrink
/// towards the origin on `[1e-8, 1e-2]`. Reported value: the largest ratio
/// of `|residual|/s^order` between consecutive grid points (must be < 1).
pub fn series_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for id in TranscendentId::ALL {
        let s = extend_series(lookup(id), DEFAULT_ORDER)?;
        let poly = s.residual_polynomial().ok_or_else(|| Error::UnsupportedForm(format!("{id}: series is not exact")))?;
        let lowest = poly.first().map(|(e, _)| *e as f64 / 2.0).unwrap_or(f64::INFINITY);
        // worst: order over the lowest surviving power; at: that power
        out.push(Check::new(format!("{id}: order / residual leading power"), DEFAULT_ORDER / lowest, lowest, 1.0 - 1e-12));
        let xs: Vec<f64> = (0..=12).map(|k| 10f64.powf(-8.0 + k as f64 / 2.0)).collect();
        let ratio: Vec<f64> = xs.iter().map(|&x| s.residual_at(x).abs() / x.powf(DEFAULT_ORDER)).collect();
        let (w, at) = worst_of(ratio.windows(2).zip(&xs).map(|(r, &x)| (r[0] / r[1], x)));
        out.push(Check::new(format!("{id}: residual decay"), w, at, 1.0 - 1e-12));
    }
    let primed = extend_series(lookup_reading(TranscendentId::TildeSigmaBPlus, Reading::Primed), DEFAULT_ORDER).is_ok();
    let printed = extend_series(lookup_reading(TranscendentId::TildeSigmaBPlus, Reading::AsPrinted), DEFAULT_ORDER).is_ok();
    let winners = i32::from(primed) + i32::from(printed);
    // at: 1 when the primed reading is the winner
    out.push(Check::new("tilde_sigma_B+: unique consistent reading", f64::from((winners - 1).abs()), f64::from(u8::from(primed)), 0.0));
    Ok(out)
}

/// Node residuals, handoff gaps, branch flips, and the algebraic routes to
/// the tilde functions on `s` in `[0.1, 6]`.
pub fn ode_suite<T: Real>(laws: &SpacingLaws<T>) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let tol = laws.internal_tol();
    for id in TranscendentId::ALL {
        let t = laws.trajectory(id);
        let worst = t
            .nodes
            .iter()
            .map(|n| (t.residual_at(n.x).unwrap_or(f64::INFINITY), n.x.f64()))
            .fold((0.0, 0.0), |w, v| if v.0 > w.0 { v } else { w });
        out.push(Check::new(format!("{id}: node residual / tolerance"), worst.0 / tol, worst.1, 10.0));
        out.push(Check::new(format!("{id}: series handoff"), t.handoff_gap, t.nodes[1].x.f64(), HANDOFF_TOL));
        let flip = t.branch_flips.iter().map(|f| (f.f.abs(), f.x)).fold((0.0, 0.0), |w, v| if v.0 > w.0 { v } else { w });
        out.push(Check::new(format!("{id}: F at branch flips"), flip.0, flip.1, 1e3 * tol));
    }
    let s_grid = grid(0.1, 6.0, 60);
    let pi = std::f64::consts::PI;
    for (base, tilde, map) in [
        (TranscendentId::SigmaPv, TranscendentId::TildeSigma, 0u8),
        (TranscendentId::SigmaB, TranscendentId::TildeSigmaB, 1),
        (TranscendentId::SigmaBPlus, TranscendentId::TildeSigmaBPlus, 2),
    ] {
        let (b, t) = (laws.trajectory(base), laws.trajectory(tilde));
        let mut gaps = Vec::new();
        for &s in &s_grid {
            let x = match map {
                0 => pi * s,
                1 => (pi * s / 2.0).powi(2),
                _ => (pi * s).powi(2),
            };
            if x > t.x_end().f64() {
                continue;
            }
            let x = T::of(x);
            gaps.push(((t.sigma(x)? - tilde_via_base(b, x)?).abs().f64(), s));
        }
        let (w, at) = worst_of(gaps);
        out.push(Check::new(format!("{tilde}: direct vs from {base}"), w, at, 1e-8));
    }
    Ok(out)
}

/// The two derivative identities, the square-root formula for `E_1`, the
/// `E_4` half-argument formula, and `p = E''`, on a 50-point grid.
pub fn identities_suite<T: Real>(laws: &SpacingLaws<T>, tol: Option<f64>) -> Result<Vec<Check>> {
    let g = grid(0.1, 4.0, 50);
    let pick = |default: f64| tol.unwrap_or(default);
    let mut out = Vec::new();
    for (which, name) in [(Identity::A1, "a1: d/ds E_2 = -exp(I_tilde)"), (Identity::A2, "a2: d/ds E_1 = -exp(-I_tilde_B)")] {
        let mut v = Vec::new();
        for &s in &g {
            let (l, r) = laws.derivative_identity(which, T::of(s))?;
            v.push(((l - r).abs().f64(), s));
        }
        let (w, at) = worst_of(v);
        out.push(Check::new(name, w, at, pick(1e-8)));
    }
    let mut v = Vec::new();
    for &s in &g {
        let a = laws.e1_from_e2(T::of(s))?;
        let b = laws.gap_probability(Beta::One, T::of(s))?;
        v.push(((a - b).abs().f64(), s));
    }
    let (w, at) = worst_of(v);
    out.push(Check::new("E_1 from sigma alone", w, at, pick(1e-6)));
    let mut v = Vec::new();
    for &s in &g {
        let a = laws.e4_from_e1_e2(T::of(s))?;
        let b = laws.gap_probability(Beta::Four, T::of(s / 2.0))?;
        v.push(((a - b).abs().f64(), s));
    }
    let (w, at) = worst_of(v);
    out.push(Check::new("E_4(s/2) = (E_1 + E_2/E_1)/2", w, at, pick(1e-8)));
    for beta in Beta::ALL {
        let mut v = Vec::new();
        for &s in &g {
            let (d2, p) = laws.second_derivative_check(beta, T::of(s), T::of(1e-3))?;
            v.push(((d2 - p).abs().f64(), s));
        }
        let (w, at) = worst_of(v);
        out.push(Check::new(format!("beta {beta}: p = E''"), w, at, 1e-6));
    }
    Ok(out)
}

pub const ORACLE_GRID: [f64; 7] = [0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// Painleve `E_2` against the Nystrom determinant.
pub fn oracle_suite<T: Real + Send + Sync>(laws: &SpacingLaws<T>, tol: Option<f64>) -> Result<Vec<Check>> {
    let rows = oracle_compare(laws, &ORACLE_GRID, DEFAULT_NODES)?;
    let (w, at) = worst_of(rows.iter().map(|r| (r.diff.abs(), r.s)));
    Ok(vec![Check::new(format!("E_2 Painleve vs Nystrom ({DEFAULT_NODES} nodes)"), w, at, tol.unwrap_or(1e-10))])
}

pub fn run<T: Real + Send + Sync>(suite: Suite, laws: &SpacingLaws<T>, tol: Option<f64>) -> Result<Report> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Series | Suite::All) {
        checks.extend(series_suite()?);
    }
    if matches!(suite, Suite::Ode | Suite::All) {
        checks.extend(ode_suite(laws)?);
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        checks.extend(identities_suite(laws, tol)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle_suite(laws, tol)?);
    }
    Ok(Report { checks })
}
