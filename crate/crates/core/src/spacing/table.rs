use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Beta, SpacingLaws};
use crate::catalog::TranscendentId;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const CSV_HEADER: [&str; 5] = ["s", "E", "p", "surmise", "deviation"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingRow {
    pub s: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub p: f64,
    pub surmise: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub rel_tol: f64,
    pub internal_tol: f64,
    pub s_coverage: f64,
    /// Set when rows past the coverage were filled by the tail policy.
    pub tail_truncated: bool,
    pub trajectory_hashes: BTreeMap<String, String>,
    /// Seconds since the Unix epoch.
    pub generated_unix: u64,
}

impl TableMetadata {
    pub(super) fn new<T: Real>(laws: &SpacingLaws<T>, tail_truncated: bool) -> Self {
        let trajectory_hashes = TranscendentId::ALL
            .iter()
            .map(|&id| {
                let mut h = DefaultHasher::new();
                for n in &laws.trajectory(id).nodes {
                    for v in [n.x, n.sigma, n.dsigma, n.integral] {
                        v.f64().to_bits().hash(&mut h);
                    }
                }
                (id.to_string(), format!("{:016x}", h.finish()))
            })
            .collect();
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            rel_tol: laws.config.rel_tol,
            internal_tol: laws.internal_tol(),
            s_coverage: laws.coverage(),
            tail_truncated,
            trajectory_hashes,
            generated_unix,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingTable {
    pub beta: Beta,
    pub rows: Vec<SpacingRow>,
    pub metadata: TableMetadata,
}

/// 17 significant digits.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl SpacingTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidArgument(format!("writing CSV: {e}"));
        out.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            out.write_record([r.s, r.e, r.p, r.surmise, r.deviation].map(fmt17)).map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Composite Simpson sums of `p` and `s p` over the rows, plus the tail
    /// bound `E(s_last)` on the missing mass.
    pub fn moments(&self) -> (f64, f64, f64) {
        let n = self.rows.len() - 1;
        let simpson = |f: &dyn Fn(&SpacingRow) -> f64| {
            let h = self.rows[1].s - self.rows[0].s;
            let even = n - n % 2;
            let mut acc = 0.0;
            for i in (0..even).step_by(2) {
                acc += f(&self.rows[i]) + 4.0 * f(&self.rows[i + 1]) + f(&self.rows[i + 2]);
            }
            acc *= h / 3.0;
            if n % 2 == 1 {
                acc += h / 2.0 * (f(&self.rows[n - 1]) + f(&self.rows[n]));
            }
            acc
        };
        (simpson(&|r| r.p), simpson(&|r| r.s * r.p), self.rows[n].e)
    }
}
