//! Verification records and their JSON-lines encoding.

use serde::{Deserialize, Serialize};

use crate::partition::BoundarySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skip => "skip",
        })
    }
}

/// One `(check, spec, seed)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub x: Vec<usize>,
    pub seed: u64,
    pub residual: Option<f64>,
    pub tol: f64,
    pub status: CheckStatus,
    pub ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(check_id: &str, spec: Option<&BoundarySpec>, seed: u64, tol: f64) -> Self {
        let (m, n, x) = match spec {
            Some(s) => (s.m(), s.n(), s.x().to_vec()),
            None => (0, 0, Vec::new()),
        };
        Self {
            check_id: check_id.to_string(),
            m,
            n,
            x,
            seed,
            residual: None,
            tol,
            status: CheckStatus::Skip,
            ms: 0.0,
            detail: None,
        }
    }

    fn key(&self) -> (String, usize, usize, Vec<usize>, u64) {
        (self.check_id.clone(), self.m, self.n, self.x.clone(), self.seed)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    /// Sorts records by `(check_id, M, N, x, seed)`.
    pub fn canonicalize(&mut self) {
        self.records.sort_by_key(|r| r.key());
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn all_passed(&self) -> bool {
        self.count(CheckStatus::Fail) == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == CheckStatus::Fail)
    }

    /// Largest residual among records of `check_id`.
    pub fn worst(&self, check_id: &str) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.check_id == check_id)
            .filter_map(|r| r.residual)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Whether any `(check, spec, seed)` key appears twice.
    pub fn has_duplicates(&self) -> bool {
        let mut keys: Vec<_> = self.records.iter().map(|r| r.key()).collect();
        keys.sort();
        keys.windows(2).any(|w| w[0] == w[1])
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> serde_json::Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<serde_json::Result<Vec<_>>>()?;
        Ok(Self { records })
    }
}

/// Fixed-width float format shared by every text output: 17 significant
/// digits with a lowercase exponent.
pub fn canonical_float(value: f64) -> String {
    format!("{value:.16e}")
}
