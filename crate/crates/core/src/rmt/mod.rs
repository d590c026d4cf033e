//! Monte-Carlo spacings of the Gaussian ensembles from tridiagonal models.
//!
//! The model for symmetry index `beta` and size `n` is the symmetric
//! tridiagonal matrix with diagonal `N(0, 2)` and off-diagonal entries
//! `chi_{beta (n - k)}`, `k = 1..n-1`, all divided by `sqrt(beta)`. Its
//! eigenvalue density is asymptotically the semicircle
//! `rho(x) = sqrt(4n - x^2) / (2 pi)` on `[-2 sqrt(n), 2 sqrt(n)]`.

pub mod eigen;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spacing::{Beta, SpacingLaws};

pub use eigen::tridiagonal_eigenvalues;

pub const DEFAULT_DIMENSION: usize = 200;
pub const DEFAULT_WINDOW: f64 = 0.25;
pub const MIN_KS_SAMPLES: usize = 1000;
pub const HISTOGRAM_CSV_HEADER: [&str; 5] = ["bin_left", "bin_right", "count", "density", "exact_p"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub beta: Beta,
    pub dimension: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unfolded spacings from the default central window.
    pub bulk_spacings: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unfolded {
    pub spacings: Vec<f64>,
    /// Number of exactly zero spacings (coincident eigenvalues).
    pub degenerate: usize,
}

/// Semicircle density for the model of size `n`.
pub fn semicircle_density(n: usize, x: f64) -> f64 {
    let r2 = 4.0 * n as f64 - x * x;
    if r2 <= 0.0 {
        0.0
    } else {
        r2.sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Eigenvalues of one tridiagonal draw from `rng`.
pub fn draw_eigenvalues<R: Rng + ?Sized>(beta: Beta, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let b = f64::from(beta.value());
    let scale = 1.0 / b.sqrt();
    let diag: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * std::f64::consts::SQRT_2 * scale
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let chi2 = ChiSquared::new(b * (n - k) as f64).expect("positive degrees of freedom");
            chi2.sample(rng).sqrt() * scale
        })
        .collect();
    tridiagonal_eigenvalues(&diag, &off)
}

fn sample_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One sample; deterministic in `(beta, n, seed)`.
pub fn sample_spectrum(beta: Beta, n: usize, seed: u64) -> Result<EnsembleSample> {
    let eigenvalues = draw_eigenvalues(beta, n, &mut sample_rng(seed, 0))?;
    let mut sample = EnsembleSample { beta, dimension: n, eigenvalues, bulk_spacings: Vec::new(), seed };
    if n >= 2 {
        if let Ok(u) = unfold_bulk(&sample, DEFAULT_WINDOW) {
            sample.bulk_spacings = u.spacings;
        }
    }
    Ok(sample)
}

/// Consecutive spacings among the eigenvalues whose index lies in the
/// central `window_fraction` of `1..=n`, each multiplied by the semicircle
/// density at its midpoint.
pub fn unfold_bulk(sample: &EnsembleSample, window_fraction: f64) -> Result<Unfolded> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("window fraction must lie in (0, 1), got {window_fraction}")));
    }
    let n = sample.eigenvalues.len();
    let count = (n as f64 * window_fraction).round() as usize;
    if count < 2 {
        return Err(Error::WindowTooSmall { count });
    }
    let lo = (n - count) / 2;
    let ev = &sample.eigenvalues[lo..lo + count];
    let mut degenerate = 0;
    let spacings = ev
        .windows(2)
        .map(|w| {
            let gap = w[1] - w[0];
            if gap == 0.0 {
                degenerate += 1;
            }
            gap * semicircle_density(sample.dimension, (w[0] + w[1]) / 2.0)
        })
        .collect();
    Ok(Unfolded { spacings, degenerate })
}

/// Unfolded bulk spacings from `samples` independent draws. Sample `i` uses
/// stream `i` of the generator seeded with `seed`; the output order is by
/// sample index whatever the number of workers.
pub fn collect_spacings(beta: Beta, n: usize, samples: usize, seed: u64, window_fraction: f64) -> Result<Vec<f64>> {
    let per: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let eigenvalues = draw_eigenvalues(beta, n, &mut sample_rng(seed, i as u64 + 1))?;
            let s = EnsembleSample { beta, dimension: n, eigenvalues, bulk_spacings: Vec::new(), seed };
            Ok(unfold_bulk(&s, window_fraction)?.spacings)
        })
        .collect::<Result<_>>()?;
    Ok(per.concat())
}

/// Samples needed for at least `spacings` spacings.
pub fn samples_for(spacings: usize, n: usize, window_fraction: f64) -> usize {
    let per = ((n as f64 * window_fraction).round() as usize).saturating_sub(1).max(1);
    spacings.div_ceil(per)
}

/// `sup |F_emp - F|`.
pub fn ks_distance_with<F: Fn(f64) -> f64>(empirical: &[f64], cdf: F) -> Result<f64> {
    if empirical.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientData { have: empirical.len(), need: MIN_KS_SAMPLES });
    }
    let mut xs = empirical.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Exact spacing distribution function, equal to 1 past the coverage.
pub fn exact_cdf<T: Real>(laws: &SpacingLaws<T>, beta: Beta, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= laws.coverage() {
        return 1.0;
    }
    laws.cdf(beta, T::of(s)).map(|v| v.f64()).unwrap_or(1.0)
}

/// Kolmogorov-Smirnov distance to the exact law.
pub fn ks_distance<T: Real>(laws: &SpacingLaws<T>, empirical: &[f64], beta: Beta) -> Result<f64> {
    ks_distance_with(empirical, |s| exact_cdf(laws, beta, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// `count / (N width)` over all `N` spacings.
    pub density: f64,
    /// Exact density averaged over the bin.
    pub exact_p: f64,
}

pub fn histogram<T: Real>(laws: &SpacingLaws<T>, beta: Beta, spacings: &[f64], s_max: f64, bins: usize) -> Vec<HistogramBin> {
    let width = s_max / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in spacings {
        let k = (s / width).floor();
        if k >= 0.0 && (k as usize) < bins {
            counts[k as usize] += 1;
        }
    }
    let total = spacings.len().max(1) as f64;
    counts
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
            HistogramBin {
                bin_left: a,
                bin_right: b,
                count,
                density: count as f64 / (total * width),
                exact_p: (exact_cdf(laws, beta, b) - exact_cdf(laws, beta, a)) / width,
            }
        })
        .collect()
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(HISTOGRAM_CSV_HEADER).expect("in memory");
    for b in bins {
        let f = |v: f64| format!("{v:.16e}");
        out.write_record([f(b.bin_left), f(b.bin_right), b.count.to_string(), f(b.density), f(b.exact_p)]).expect("in memory");
    }
    String::from_utf8(out.into_inner().expect("in memory")).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_has_no_spacings() {
        let s = sample_spectrum(Beta::Two, 1, 7).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!(s.bulk_spacings.is_empty());
        assert!(matches!(unfold_bulk(&s, 0.25), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = sample_spectrum(Beta::Four, 60, 42).unwrap();
        let b = sample_spectrum(Beta::Four, 60, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.eigenvalues, sample_spectrum(Beta::Four, 60, 43).unwrap().eigenvalues);
        let x = collect_spacings(Beta::One, 40, 20, 5, 0.25).unwrap();
        let y = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| collect_spacings(Beta::One, 40, 20, 5, 0.25).unwrap());
        assert_eq!(x, y);
    }

    #[test]
    fn window_count() {
        let s = sample_spectrum(Beta::Two, 200, 1).unwrap();
        assert_eq!(s.bulk_spacings.len(), 49);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.bulk_spacings.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn degenerate_spacing_is_flagged() {
        let s = EnsembleSample {
            beta: Beta::One,
            dimension: 4,
            eigenvalues: vec![-1.0, 0.0, 0.0, 1.0],
            bulk_spacings: vec![],
            seed: 0,
        };
        let u = unfold_bulk(&s, 0.5).unwrap();
        assert_eq!(u.spacings, vec![0.0]);
        assert_eq!(u.degenerate, 1);
    }

    #[test]
    fn spectral_edge_near_semicircle() {
        for beta in Beta::ALL {
            let mut worst: f64 = 0.0;
            for seed in 0..100 {
                let s = sample_spectrum(beta, 200, seed).unwrap();
                let edge = s.eigenvalues[199].max(-s.eigenvalues[0]);
                worst = worst.max((edge / (2.0 * 200f64.sqrt()) - 1.0).abs());
            }
            assert!(worst < 0.05, "{beta}: {worst}");
        }
    }

    #[test]
    fn unfolded_mean_is_one() {
        for beta in Beta::ALL {
            let sp = collect_spacings(beta, 200, 400, 11, 0.25).unwrap();
            let mean = sp.iter().sum::<f64>() / sp.len() as f64;
            assert!((mean - 1.0).abs() < 0.01, "{beta}: {mean}");
        }
    }

    #[test]
    fn ks_null_case() {
        // inverse-transform draws from the exponential law
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..20000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let d = ks_distance_with(&xs, |x| 1.0 - (-x).exp()).unwrap();
        assert!(d < 1.63 / (20000f64).sqrt(), "{d}");
        assert!(matches!(ks_distance_with(&xs[..10], |x| x), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn samples_for_window() {
        assert_eq!(samples_for(200_000, 200, 0.25), 4082);
    }
}
