use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rmt_spacing::fredholm::{oracle_compare, oracle_csv, DEFAULT_NODES};
use rmt_spacing::rmt::{collect_spacings, histogram, histogram_csv, ks_distance, DEFAULT_DIMENSION, DEFAULT_WINDOW};
use rmt_spacing::spacing::{Beta, DeviationMetric, LawsConfig, DEFAULT_S_COVER};
use rmt_spacing::verify::{self, Suite, ORACLE_GRID};
use rmt_spacing::{Error, Laws};

/// Directory for output files when `--output` is not given.
const OUTPUT_DIR_ENV: &str = "RMT_SPACING_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "rmt-spacing", version, about = "Exact spacing distributions of the Gaussian ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Relative accuracy requested of tabulated values.
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate E, p, the surmise and their difference.
    Tabulate {
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Run verification suites; exit status 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Override the tolerance of the identity and oracle checks.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Deviation of the exact beta = 1 density from the Wigner surmise.
    Surmise {
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Monte-Carlo spacing histogram and Kolmogorov-Smirnov distance.
    Mc {
        #[arg(long, value_parser = parse_beta)]
        beta: Beta,
        /// Number of random matrices.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DIMENSION)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
    },
    /// Compare E_2 with the sine-kernel determinant.
    OracleCompare {
        /// Comma-separated spacings.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    MaxAbs,
    MaxRelAtPeak,
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    let b: u8 = s.parse().map_err(|_| format!("'{s}' is not 1, 2 or 4"))?;
    Beta::try_from(b).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Verification(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn emit(common: &Common, default_name: &str, body: &str) -> Result<(), Failure> {
    let path = common.output.clone().or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)));
    match path {
        Some(p) => std::fs::write(&p, body).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn laws(common: &Common) -> Result<Laws, Failure> {
    Ok(Laws::new(LawsConfig { rel_tol: common.rel_tol, ..LawsConfig::default() })?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    if !(1e-13..=1e-6).contains(&common.rel_tol) {
        return Err(Failure::Usage(format!("--rel-tol must lie in [1e-13, 1e-6], got {:e}", common.rel_tol)));
    }
    match cli.command {
        Command::Tabulate { beta, s_max, step } => {
            if !(step > 0.0 && step < s_max) {
                return Err(Failure::Usage(format!("need 0 < --step < --s-max, got step {step}, s-max {s_max}")));
            }
            let laws = laws(common)?;
            let table = laws.tabulate_with(beta, s_max, step, true)?;
            if table.metadata.tail_truncated {
                eprintln!(
                    "warning: rows beyond s = {DEFAULT_S_COVER} use the tail policy (p = 0, E frozen at s = {DEFAULT_S_COVER})"
                );
            }
            let body = match common.format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json() + "\n",
            };
            emit(common, &format!("tabulate-beta{beta}.{}", ext(common.format)), &body)
        }
        Command::Verify { suite, tol } => {
            if let Some(t) = tol {
                if t.is_nan() || t <= 0.0 {
                    return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
                }
            }
            let laws = laws(common)?;
            let report = verify::run(suite, &laws, tol)?;
            let body = match common.format {
                Format::Csv => report.to_string(),
                Format::Json => serde_json::to_string_pretty(&report).expect("plain data") + "\n",
            };
            emit(common, &format!("verify.{}", if common.format == Format::Json { "json" } else { "txt" }), &body)?;
            match report.worst_failure() {
                None => Ok(()),
                Some(c) => Err(Failure::Verification(format!("{} failed: worst {:e} at {} (tol {:e})", c.name, c.worst, c.at, c.tol))),
            }
        }
        Command::Surmise { metric } => {
            let laws = laws(common)?;
            let metrics = match metric {
                Some(MetricArg::MaxAbs) => vec![DeviationMetric::MaxAbs],
                Some(MetricArg::MaxRelAtPeak) => vec![DeviationMetric::MaxRelAtPeak],
                None => vec![DeviationMetric::MaxAbs, DeviationMetric::MaxRelAtPeak],
            };
            let mut rows = Vec::new();
            for m in metrics {
                rows.push((m, laws.surmise_deviation(m)?));
            }
            let body = match common.format {
                Format::Csv => {
                    let mut s = String::from("metric,value,s\n");
                    for (m, d) in &rows {
                        let name = serde_json::to_value(m).expect("plain data");
                        s += &format!("{},{:.16e},{:.16e}\n", name.as_str().unwrap_or_default(), d.value, d.at);
                    }
                    s
                }
                Format::Json => {
                    let v: Vec<_> = rows.iter().map(|(m, d)| serde_json::json!({"metric": m, "value": d.value, "s": d.at})).collect();
                    serde_json::to_string_pretty(&v).expect("plain data") + "\n"
                }
            };
            emit(common, &format!("surmise.{}", ext(common.format)), &body)
        }
        Command::Mc { beta, samples, seed, n, window, bins, s_max } => {
            if samples == 0 || n < 2 || bins == 0 || s_max.is_nan() || s_max <= 0.0 {
                return Err(Failure::Usage("--samples, --bins and --s-max must be positive and --n at least 2".into()));
            }
            if !(window > 0.0 && window < 1.0) {
                return Err(Failure::Usage(format!("--window must lie in (0, 1), got {window}")));
            }
            let laws = laws(common)?;
            let sp = collect_spacings(beta, n, samples, seed, window)?;
            match ks_distance(&laws, &sp, beta) {
                Ok(ks) => eprintln!("beta {beta}: {} spacings, KS distance {ks:.6}", sp.len()),
                Err(e) => eprintln!("beta {beta}: {} spacings, KS distance unavailable: {e}", sp.len()),
            }
            let h = histogram(&laws, beta, &sp, s_max, bins);
            let body = match common.format {
                Format::Csv => histogram_csv(&h),
                Format::Json => serde_json::to_string_pretty(&h).expect("plain data") + "\n",
            };
            emit(common, &format!("mc-beta{beta}.{}", ext(common.format)), &body)
        }
        Command::OracleCompare { grid, nodes } => {
            if nodes < 8 {
                return Err(Failure::Usage(format!("--nodes must be at least 8, got {nodes}")));
            }
            let grid = grid.unwrap_or_else(|| ORACLE_GRID.to_vec());
            let laws = laws(common)?;
            let rows = oracle_compare(&laws, &grid, nodes)?;
            let body = match common.format {
                Format::Csv => oracle_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("plain data") + "\n",
            };
            emit(common, &format!("oracle.{}", ext(common.format)), &body)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
