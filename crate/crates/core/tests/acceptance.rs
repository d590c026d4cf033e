//! End-to-end acceptance run. One line per criterion; non-zero exit if any fails.

use std::time::Instant;

use rmt_spacing::rmt::{collect_spacings, ks_distance, samples_for, DEFAULT_DIMENSION, DEFAULT_WINDOW};
use rmt_spacing::spacing::DeviationMetric;
use rmt_spacing::verify::{identities_suite, ode_suite, oracle_suite, series_suite, Check};
use rmt_spacing::{Beta, DoubleDouble, Laws, LawsConfig, Real};

type Outcome = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn summarize(checks: &[Check]) -> Outcome {
    let ok = !checks.is_empty() && checks.iter().all(|c| c.passed);
    let worst = checks
        .iter()
        .max_by(|a, b| (a.worst / a.tol.max(1e-300)).total_cmp(&(b.worst / b.tol.max(1e-300))))
        .map(|c| format!("tightest: {} = {:.3e} at {:.4} (tol {:.1e})", c.name, c.worst, c.at, c.tol))
        .unwrap_or_default();
    (ok, format!("{} checks, {worst}", checks.len()))
}

fn oracle(laws: &Laws) -> Outcome {
    summarize(&oracle_suite(laws, None).expect("oracle suite"))
}

fn identities(laws: &Laws) -> Outcome {
    let checks: Vec<Check> =
        identities_suite(laws, None).expect("identity suite").into_iter().filter(|c| !c.name.contains("p = E''")).collect();
    summarize(&checks)
}

fn two_routes(laws: &Laws) -> Outcome {
    let checks: Vec<Check> =
        ode_suite(laws).expect("ode suite").into_iter().filter(|c| c.name.starts_with("tilde_sigma_B: direct")).collect();
    summarize(&checks)
}

fn repulsion(laws: &Laws) -> Outcome {
    let s: Vec<f64> = (0..=20).map(|k| 10f64.powf(-3.0 + k as f64 / 20.0)).collect();
    let mut ok = true;
    let mut msg = Vec::new();
    for beta in Beta::ALL {
        let pts: Vec<(f64, f64)> =
            s.iter().map(|&s| (s.ln(), laws.spacing_density(beta, Real::of(s)).expect("density").f64().ln())).collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let b = f64::from(beta.value());
        ok &= ((slope - b) / b).abs() <= 0.02;
        msg.push(format!("slope_{beta} = {slope:.5}"));
    }
    let ratio: Vec<f64> = s
        .iter()
        .rev()
        .map(|&s| {
            let p4 = laws.spacing_density(Beta::Four, Real::of(s)).unwrap().f64();
            let p1 = laws.spacing_density(Beta::One, Real::of(s)).unwrap().f64();
            p4 / p1
        })
        .collect();
    let shrinking = ratio.windows(2).all(|w| w[1] < w[0]);
    ok &= shrinking && ratio[ratio.len() - 1] < 1e-6;
    msg.push(format!("p4/p1 {:.2e} -> {:.2e}", ratio[0], ratio[ratio.len() - 1]));
    (ok, msg.join(", "))
}

fn moments(laws: &Laws) -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for beta in Beta::ALL {
        let t = laws.tabulate(beta, 8.0, 0.005).expect("table");
        let (m0, m1, tail) = t.moments();
        ok &= (m0 - 1.0).abs() <= 1e-4 && (m1 - 1.0).abs() <= 1e-4 && tail < 1e-4;
        msg.push(format!("beta {beta}: m0-1 {:.1e}, m1-1 {:.1e}, E(8) {tail:.1e}", m0 - 1.0, m1 - 1.0));
    }
    (ok, msg.join("; "))
}

fn surmise(laws: &Laws) -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (m, name) in [(DeviationMetric::MaxAbs, "max abs"), (DeviationMetric::MaxRelAtPeak, "relative at peak")] {
        let d = laws.surmise_deviation(m).expect("deviation");
        ok &= (0.005..=0.03).contains(&d.value);
        msg.push(format!("{name} {:.4} at s = {:.3}", d.value, d.at));
    }
    (ok, msg.join(", "))
}

fn monte_carlo(laws: &Laws) -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for beta in Beta::ALL {
        let samples = samples_for(200_000, DEFAULT_DIMENSION, DEFAULT_WINDOW);
        let sp = collect_spacings(beta, DEFAULT_DIMENSION, samples, 2024, DEFAULT_WINDOW).expect("sampling");
        let ks = ks_distance(laws, &sp, beta).expect("ks");
        let limit = if beta == Beta::Four { 0.015 } else { 0.01 };
        ok &= sp.len() >= 200_000 && ks < limit;
        msg.push(format!("beta {beta}: KS {ks:.5} over {} spacings", sp.len()));
    }
    (ok, msg.join("; "))
}

fn series() -> Outcome {
    summarize(&series_suite().expect("series suite"))
}

fn convergence() -> Outcome {
    let mut tols = vec![];
    let mut t = 1e-10;
    while t > 1e-12 {
        tols.push(t);
        t /= 2.0;
    }
    tols.push(1e-12);
    // compared before rounding to f64, which would leave only representation noise
    let values: Vec<Vec<DoubleDouble>> = tols
        .iter()
        .map(|&rel_tol| {
            let laws = Laws::new(LawsConfig { rel_tol, ..LawsConfig::default() }).expect("laws");
            Beta::ALL
                .iter()
                .flat_map(|&b| (0..=100).map(move |i| (b, i as f64 * 0.05)))
                .flat_map(|(b, s)| {
                    let s = DoubleDouble::of(s);
                    [laws.gap_probability(b, s).expect("E"), laws.spacing_density(b, s).expect("p")]
                })
                .collect()
        })
        .collect();
    let diffs: Vec<f64> =
        values.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (*a - *b).abs().f64()).fold(0.0, f64::max)).collect();
    let monotone = diffs.windows(2).all(|w| w[1] <= w[0]);
    let last = diffs[diffs.len() - 1];
    let shown: Vec<String> = diffs.iter().map(|d| format!("{d:.1e}")).collect();
    (monotone && last < 1e-9, format!("successive max differences {}", shown.join(" ")))
}

fn main() {
    let t0 = Instant::now();
    let laws = Laws::new(LawsConfig::default()).expect("laws");
    let criteria: Vec<Criterion> = vec![
        ("1 oracle agreement", Box::new(|| oracle(&laws))),
        ("2 identity suite", Box::new(|| identities(&laws))),
        ("3 two-route transcendent", Box::new(|| two_routes(&laws))),
        ("4 level repulsion", Box::new(|| repulsion(&laws))),
        ("5 probability laws", Box::new(|| moments(&laws))),
        ("6 surmise deviation", Box::new(|| surmise(&laws))),
        ("7 Monte-Carlo referee", Box::new(|| monte_carlo(&laws))),
        ("8 series self-consistency", Box::new(series)),
        ("9 convergence", Box::new(convergence)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t = Instant::now();
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("criterion {name:<28} {}  [{:.1}s] {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{} passed in {:.1}s", criteria.len() - failed, criteria.len(), t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
