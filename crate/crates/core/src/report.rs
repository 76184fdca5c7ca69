//! Verification outcomes and their serialized form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gaussian::{ValuePair, GQ};
use crate::rational::{fmt_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Where two sides first disagree: exponents for exact checks, sample
/// coordinates for numeric ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub q: String,
    pub z: String,
    pub lhs: ValuePair,
    pub rhs: ValuePair,
}

impl Discrepancy {
    pub fn exact(q_exp: Q, z_exp: Q, lhs: &GQ, rhs: &GQ) -> Self {
        Self { q: fmt_q(&q_exp), z: fmt_q(&z_exp), lhs: lhs.to_pair(), rhs: rhs.to_pair() }
    }

    pub fn numeric(tau: Complex64, z: Complex64, lhs: Complex64, rhs: Complex64) -> Self {
        Self {
            q: fmt_complex(tau),
            z: fmt_complex(z),
            lhs: ValuePair::from_complex(lhs),
            rhs: ValuePair::from_complex(rhs),
        }
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub status: Status,
    pub checked_to: String,
    pub first_discrepancy: Option<Discrepancy>,
    pub derived_constants: BTreeMap<String, String>,
    /// Only filled when timing is requested, so default output stays byte-stable.
    pub wall_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(id: impl Into<String>, checked_to: Q) -> Self {
        Self {
            id: id.into(),
            status: Status::Pass,
            checked_to: fmt_q(&checked_to),
            first_discrepancy: None,
            derived_constants: BTreeMap::new(),
            wall_ms: None,
        }
    }

    /// A report for a floating-point check; `checked_to` records the tolerance.
    pub fn numeric(id: impl Into<String>, tolerance: f64) -> Self {
        let mut r = Self::new(id, Q::from_integer(0));
        r.checked_to = format!("{tolerance:e}");
        r
    }

    pub fn fail(mut self, d: Discrepancy) -> Self {
        self.status = Status::Fail;
        self.first_discrepancy = Some(d);
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.derived_constants.insert(key.to_string(), value.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Fails the report at the first exact difference, if any.
    pub fn compare(self, diff: Option<(Q, Q, GQ, GQ)>) -> Self {
        match diff {
            None => self,
            Some((a, s, l, r)) => self.fail(Discrepancy::exact(a, s, &l, &r)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// `passed P / failed F / total T`.
pub fn summary_line(reports: &[VerificationReport]) -> String {
    let passed = reports.iter().filter(|r| r.passed()).count();
    format!("passed {} / failed {} / total {}", passed, reports.len() - passed, reports.len())
}

/// Renders reports sorted by id, followed by the summary line (text and csv only).
pub fn report_emit(reports: &[VerificationReport], format: OutputFormat) -> String {
    let mut sorted: Vec<&VerificationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    match format {
        OutputFormat::Json => {
            let owned: Vec<VerificationReport> = sorted.into_iter().cloned().collect();
            let mut s = serde_json::to_string_pretty(&owned).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("id,status,checked_to,discrepancy_q,discrepancy_z\n");
            for r in sorted {
                let (dq, dz) = r.first_discrepancy.as_ref().map(|d| (d.q.clone(), d.z.clone())).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    csv_field(&r.id),
                    status_str(r.status),
                    csv_field(&r.checked_to),
                    csv_field(&dq),
                    csv_field(&dz)
                );
            }
            let _ = writeln!(s, "# {}", summary_line(reports));
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            for r in sorted {
                let _ = write!(s, "{:<40} {} (to {})", r.id, status_str(r.status).to_uppercase(), r.checked_to);
                if let Some(d) = &r.first_discrepancy {
                    let _ = write!(
                        s,
                        " first difference at q={} z={}: lhs={} rhs={}",
                        d.q,
                        d.z,
                        pair_str(&d.lhs),
                        pair_str(&d.rhs)
                    );
                }
                s.push('\n');
                for (k, v) in &r.derived_constants {
                    let _ = writeln!(s, "    {k} = {v}");
                }
            }
            let _ = writeln!(s, "{}", summary_line(reports));
            s
        }
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
    }
}

fn pair_str(p: &ValuePair) -> String {
    format!("({}, {})", p.re, p.im)
}

/// RFC 4180 quoting when the field needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
