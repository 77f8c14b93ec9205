//! Verification reports and their CSV / JSON renderings.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::FracParams;

/// Version stamped into every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One sampled radius of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub r: f64,
    /// Computed operator value.
    pub value: f64,
    pub err_est: f64,
    /// Expected value or bound the operator is compared with.
    pub reference: f64,
    /// Relative or absolute residual, or signed margin for one-sided bounds.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Outcome of an identity or barrier verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: String,
    pub params: FracParams,
    /// Scalar inputs and derived constants (beta, C(beta), eps, ...).
    pub parameters: BTreeMap<String, f64>,
    pub rows: Vec<ReportRow>,
    pub flags: Vec<String>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(kind: impl Into<String>, params: FracParams) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            params,
            parameters: BTreeMap::new(),
            rows: Vec::new(),
            flags: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    /// Appends rows and recomputes the verdict.
    pub fn with_rows(mut self, rows: Vec<ReportRow>) -> Self {
        self.rows = rows;
        self.verdict = Verdict::from_bool(!self.rows.is_empty() && self.rows.iter().all(|r| r.pass));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// Largest residual over the rows.
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::domain("report", e.to_string()))
    }

    /// One CSV line per row, prefixed by the schema version and report kind.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            schema_version: u32,
            kind: &'a str,
            n: u32,
            s: f64,
            p: f64,
            r: f64,
            value: f64,
            err_est: f64,
            reference: f64,
            residual: f64,
            tolerance: f64,
            pass: bool,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(Line {
                schema_version: self.schema_version,
                kind: &self.kind,
                n: self.params.n(),
                s: self.params.s(),
                p: self.params.p(),
                r: row.r,
                value: row.value,
                err_est: row.err_est,
                reference: row.reference,
                residual: row.residual,
                tolerance: row.tolerance,
                pass: row.pass,
            })
            .map_err(|e| Error::domain("report", e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::domain("report", e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::domain("report", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let p = FracParams::new(2, 0.5, 3.0).unwrap();
        Report::new("fundamental", p)
            .with_parameter("beta", -0.3)
            .with_rows(vec![ReportRow {
                r: 1.0,
                value: 2.0,
                err_est: 1e-9,
                reference: 2.0,
                residual: 0.0,
                tolerance: 1e-3,
                pass: true,
            }])
    }

    #[test]
    fn verdict_follows_rows() {
        let r = sample();
        assert!(r.passed());
        let mut rows = r.rows.clone();
        rows[0].pass = false;
        assert!(!r.with_rows(rows).passed());
        let empty = Report::new("x", FracParams::new(2, 0.5, 2.0).unwrap()).with_rows(vec![]);
        assert!(!empty.passed());
    }

    #[test]
    fn renders() {
        let r = sample();
        let json = r.to_json().unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"verdict\": \"pass\""));
        let csv = r.to_csv().unwrap();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("schema_version,kind,n,s,p,r"));
        assert!(lines.next().unwrap().starts_with("1,fundamental,2,0.5,3.0,1.0"));
    }
}
