//! Versioned JSON report.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 7,
//!   "records": [
//!     {"check_id": "rescale.scaling_equals_taylor", "anchor": "scaling order equals Taylor order",
//!      "status": "pass", "witness": null, "timing_ms": 812}
//!   ],
//!   "summary": {"pass": 1, "fail": 0, "inconclusive": 0}
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub check_id: String,
    /// The result this check exercises, as a short human label.
    pub anchor: String,
    pub status: Status,
    pub witness: Option<String>,
    pub timing_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub records: Vec<Record>,
    pub summary: Summary,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("summary does not match the records")]
    Summary,
}

impl Report {
    pub fn new(seed: u64, records: Vec<Record>) -> Self {
        let mut summary = Summary::default();
        for r in &records {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Inconclusive => summary.inconclusive += 1,
            }
        }
        Report { schema_version: SCHEMA_VERSION, seed, records, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0 && self.summary.inconclusive == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses and checks the version and the summary counts.
    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        let r: Report = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Version(r.schema_version));
        }
        if Report::new(r.seed, r.records.clone()).summary != r.summary {
            return Err(ReportError::Summary);
        }
        Ok(r)
    }

    /// Copy with every timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.timing_ms = 0;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(status: Status) -> Record {
        Record { check_id: "a.b".into(), anchor: "x".into(), status, witness: None, timing_ms: 3 }
    }

    #[test]
    fn round_trip_and_exit() {
        let r = Report::new(1, vec![rec(Status::Pass), rec(Status::Inconclusive)]);
        assert_eq!(r.exit_code(), 1);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(Report::new(1, vec![rec(Status::Pass)]).exit_code(), 0);
    }

    #[test]
    fn rejects_tampering() {
        let mut r = Report::new(1, vec![rec(Status::Fail)]);
        r.summary.fail = 0;
        assert!(matches!(Report::from_json(&r.to_json()), Err(ReportError::Summary)));
        r = Report::new(1, vec![]);
        r.schema_version = 9;
        assert!(matches!(Report::from_json(&r.to_json()), Err(ReportError::Version(9))));
        assert!(Report::from_json("{").is_err());
    }
}
