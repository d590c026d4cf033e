//! `E_2(0; s)` as the Fredholm determinant of the sine kernel on `[0, s]`,
//! by Nystrom discretization on Gauss-Legendre nodes. Uses no Painleve input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;
use crate::spacing::{Beta, SpacingLaws};

pub const DEFAULT_NODES: usize = 80;
pub const ORACLE_CSV_HEADER: [&str; 4] = ["s", "E2_painleve", "E2_fredholm", "diff"];

/// `sin(pi d)/(pi d)`, equal to 1 at `d = 0`.
pub fn sine_kernel<T: Real>(x: T, y: T) -> T {
    let d = T::pi() * (x - y).abs();
    if d == T::zero() {
        T::one()
    } else {
        d.sin() / d
    }
}

/// `sqrt(w_i) K(x_i, x_j) sqrt(w_j)` on `[0, s]`.
pub fn nystrom_matrix<T: Real>(s: T, n_nodes: usize) -> Vec<Vec<T>> {
    let rule = QuadratureRule::<T>::gauss_legendre(n_nodes);
    let (x, w) = rule.mapped(T::zero(), s);
    let r: Vec<T> = w.iter().map(|w| w.sqrt()).collect();
    let mut k = vec![vec![T::zero(); n_nodes]; n_nodes];
    for i in 0..n_nodes {
        for j in i..n_nodes {
            let v = r[i] * sine_kernel(x[i], x[j]) * r[j];
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Lower Cholesky factor, or `None` if a pivot is not positive.
pub fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / djj;
        }
    }
    Some(l)
}

/// `ln det(I - K)` on `[0, s]`.
pub fn sine_kernel_log_det<T: Real>(s: T, n_nodes: usize) -> Result<T> {
    if n_nodes < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 nodes, got {n_nodes}")));
    }
    if !(s.f64() >= 0.0) {
        return Err(Error::InvalidArgument(format!("interval length must be nonnegative, got {}", s.f64())));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let mut a = nystrom_matrix(s, n_nodes);
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v = -*v;
        }
        row[i] += T::one();
    }
    let l = cholesky(&a)
        .ok_or_else(|| Error::InvalidArgument(format!("I - K is not positive definite at s = {}", s.f64())))?;
    Ok(l.iter().enumerate().fold(T::zero(), |acc, (i, row)| acc + T::of(2.0) * row[i].ln()))
}

/// `det(I - K)` on `[0, s]`.
pub fn sine_kernel_det<T: Real>(s: T, n_nodes: usize) -> Result<T> {
    Ok(sine_kernel_log_det(s, n_nodes)?.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub s: f64,
    #[serde(rename = "E2_painleve")]
    pub e2_painleve: f64,
    #[serde(rename = "E2_fredholm")]
    pub e2_fredholm: f64,
    pub diff: f64,
}

/// Painleve against Nystrom on each grid point.
pub fn oracle_compare<T: Real + Send + Sync>(laws: &SpacingLaws<T>, grid: &[f64], n_nodes: usize) -> Result<Vec<OracleRow>> {
    grid.par_iter()
        .map(|&s| {
            let p = laws.gap_probability(Beta::Two, T::of(s))?;
            let f = sine_kernel_det(T::of(s), n_nodes)?;
            Ok(OracleRow { s, e2_painleve: p.f64(), e2_fredholm: f.f64(), diff: (p - f).f64() })
        })
        .collect()
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(ORACLE_CSV_HEADER).expect("in memory");
    for r in rows {
        out.write_record([r.s, r.e2_painleve, r.e2_fredholm, r.diff].map(|v| format!("{v:.16e}"))).expect("in memory");
    }
    String::from_utf8(out.into_inner().expect("in memory")).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_tiny_intervals() {
        assert_eq!(sine_kernel_det(0.0, 20).unwrap(), 1.0);
        let s = 1e-4;
        let d = sine_kernel_det(s, 20).unwrap();
        assert!((d - (1.0 - s)).abs() < 1e-7);
        assert!(sine_kernel_det(1.0, 4).is_err());
    }

    #[test]
    fn known_values() {
        // double-double runs with 120 nodes, rounded to f64
        let refs = [
            (0.5, 0.5150733950728519),
            (1.0, 0.17021742137918522),
            (2.0, 0.0034973251491690976),
            (3.0, 6.603942158351013e-6),
        ];
        for (s, v) in refs {
            let d = sine_kernel_det(s, 80).unwrap();
            assert!((d - v).abs() < 1e-14, "{s}: {d}");
            let dd = sine_kernel_det(crate::scalar::DoubleDouble::of(s), 80).unwrap();
            assert_eq!(dd.hi, v);
        }
    }

    #[test]
    fn spectral_self_convergence() {
        let a = sine_kernel_det(2.0, 60).unwrap();
        let b = sine_kernel_det(2.0, 80).unwrap();
        assert!((a - b).abs() < 1e-12);
        let d = |n| (sine_kernel_det(3.0, n).unwrap() - sine_kernel_det(3.0, 2 * n).unwrap()).abs();
        let (d10, d20) = (d(10), d(20));
        assert!(d20 < d10 * 1e-3, "{d10:e} {d20:e}");
    }

    #[test]
    fn symmetric_contraction() {
        for s in [0.5, 2.0, 4.0] {
            let k = nystrom_matrix(s, 30);
            for i in 0..30 {
                for j in 0..30 {
                    assert_eq!(k[i][j], k[j][i]);
                }
            }
            // eigenvalues of K in [0, 1): both K + eps I and I - K are positive definite
            let mut kp = k.clone();
            let mut im = k.clone();
            for i in 0..30 {
                kp[i][i] += 1e-12;
                for j in 0..30 {
                    im[i][j] = if i == j { 1.0 } else { 0.0 } - k[i][j];
                }
            }
            assert!(cholesky(&kp).is_some() && cholesky(&im).is_some());
        }
    }

    #[test]
    fn strictly_decreasing() {
        let v: Vec<f64> = (0..=30).map(|i| sine_kernel_det(i as f64 * 0.1, 40).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn csv_header() {
        let rows = [OracleRow { s: 0.0, e2_painleve: 1.0, e2_fredholm: 1.0, diff: 0.0 }];
        assert!(oracle_csv(&rows).starts_with("s,E2_painleve,E2_fredholm,diff\n"));
    }
}
