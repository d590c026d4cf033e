use std::sync::OnceLock;

use proptest::prelude::*;

use rmt_spacing::quadrature::QuadratureRule;
use rmt_spacing::rmt::eigen::tridiagonal_eigenvalues;
use rmt_spacing::rmt::{collect_spacings, ks_distance_with};
use rmt_spacing::{Beta, DoubleDouble, Laws, LawsConfig, Real};

fn laws() -> &'static Laws {
    static L: OnceLock<Laws> = OnceLock::new();
    L.get_or_init(|| Laws::new(LawsConfig::default()).unwrap())
}

fn beta() -> impl Strategy<Value = Beta> {
    prop_oneof![Just(Beta::One), Just(Beta::Two), Just(Beta::Four)]
}

fn dd(x: f64) -> DoubleDouble {
    DoubleDouble::of(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_probability_decreases(b in beta(), s in 0.0f64..7.9, ds in 1e-3f64..0.1) {
        let l = laws();
        let e0 = l.gap_probability(b, dd(s)).unwrap();
        let e1 = l.gap_probability(b, dd(s + ds)).unwrap();
        prop_assert!(e1 < e0);
        prop_assert!(e1 > DoubleDouble::of(0.0) && e0 <= DoubleDouble::of(1.0));
    }

    #[test]
    fn density_nonnegative_and_cdf_monotone(b in beta(), s in 0.0f64..7.9, ds in 1e-3f64..0.1) {
        let l = laws();
        prop_assert!(l.spacing_density(b, dd(s)).unwrap() >= DoubleDouble::of(0.0));
        let c0 = l.cdf(b, dd(s)).unwrap().f64();
        let c1 = l.cdf(b, dd(s + ds)).unwrap().f64();
        prop_assert!(c1 >= c0 && (0.0..=1.0).contains(&c0) && c1 <= 1.0);
    }

    #[test]
    fn density_is_minus_gap_derivative_slope(b in beta(), s in 0.2f64..6.0) {
        // E' is increasing (its derivative is p >= 0)
        let l = laws();
        let d0 = l.gap_derivative(b, dd(s)).unwrap();
        let d1 = l.gap_derivative(b, dd(s + 0.01)).unwrap();
        prop_assert!(d1 >= d0);
        prop_assert!(d0 <= DoubleDouble::of(0.0));
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials(n in 2usize..30, deg_frac in 0.0f64..1.0, a in -2.0f64..0.0, b in 0.1f64..3.0) {
        let deg = ((2 * n - 1) as f64 * deg_frac) as i32;
        let rule = QuadratureRule::<f64>::gauss_legendre(n);
        let got = rule.integrate(a, b, |x| x.powi(deg));
        let want = (b.powi(deg + 1) - a.powi(deg + 1)) / f64::from(deg + 1);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} {want}");
    }

    #[test]
    fn tridiagonal_spectrum_keeps_trace(d in prop::collection::vec(-5.0f64..5.0, 2..60), seed in any::<u64>()) {
        let off: Vec<f64> = (0..d.len() - 1).map(|i| ((seed >> (i % 60)) & 7) as f64 * 0.5 - 1.7).collect();
        let ev = tridiagonal_eigenvalues(&d, &off).unwrap();
        let tr: f64 = d.iter().sum();
        let fro: f64 = d.iter().map(|x| x * x).sum::<f64>() + 2.0 * off.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((ev.iter().sum::<f64>() - tr).abs() <= 1e-10 * (1.0 + fro));
        prop_assert!((ev.iter().map(|x| x * x).sum::<f64>() - fro).abs() <= 1e-10 * (1.0 + fro));
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn double_double_field_ops(a in -1e6f64..1e6, b in 1e-3f64..1e3, c in -1.0f64..1.0) {
        let (x, y) = (DoubleDouble::from_sum(a, c * 1e-17 * a.abs()), dd(b));
        let scale = x.abs().f64().max(1e-300);
        prop_assert!(((x + y) - y - x).abs().f64() <= 1e-30 * (scale + b));
        prop_assert!(((x * y) / y - x).abs().f64() <= 1e-30 * scale);
        prop_assert!(((y.sqrt() * y.sqrt()) - y).abs().f64() <= 1e-30 * b);
        prop_assert!((y.ln().exp() - y).abs().f64() <= 1e-29 * b);
        let t = dd(c * 10.0);
        prop_assert!((t.sin().powi(2) + t.cos().powi(2) - DoubleDouble::of(1.0)).abs().f64() <= 1e-30);
    }
}

#[test]
fn ks_of_exact_quantiles_is_one_over_n() {
    // inverse-transform sample: midpoint quantiles give KS = 1/(2n)
    let l = laws();
    let n = 2000;
    let cdf = |s: f64| l.cdf(Beta::Two, dd(s)).unwrap().f64();
    let sample: Vec<f64> = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let (mut lo, mut hi) = (0.0, 8.0);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if cdf(m) < u {
                    lo = m
                } else {
                    hi = m
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let ks = ks_distance_with(&sample, cdf).unwrap();
    assert!((ks - 0.5 / n as f64).abs() < 1e-9, "{ks}");
}

#[test]
fn sampling_is_deterministic_and_mean_one() {
    let a = collect_spacings(Beta::Two, 200, 300, 11, 0.25).unwrap();
    let b = collect_spacings(Beta::Two, 200, 300, 11, 0.25).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| collect_spacings(Beta::Two, 200, 300, 11, 0.25).unwrap());
    assert_eq!(a, c);
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
}

#[test]
fn small_spacing_fraction_scales_like_power_beta_plus_one() {
    // F(eps) ~ c eps^(beta+1) for the exact law
    let l = laws();
    for b in Beta::ALL {
        let f = |e: f64| l.cdf(b, dd(e)).unwrap().f64();
        let slope = (f(2e-2) / f(1e-2)).log2();
        let want = f64::from(b.value()) + 1.0;
        assert!((slope - want).abs() < 0.02 * want, "{b}: {slope}");
    }
}
