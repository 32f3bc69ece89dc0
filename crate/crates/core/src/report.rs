//! Structured verdicts for identity checks.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::expr::{Bindings, Comparison};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

/// Outcome of one identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub max_residual: f64,
    /// Sample point of the first failure; empty otherwise.
    pub witness: BTreeMap<String, String>,
    pub ms: u64,
    /// Free-form detail, e.g. the failing component.
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// A suite of identity checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

fn witness(point: &Bindings) -> BTreeMap<String, String> {
    point.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

impl CheckReport {
    pub fn new(suite: &str, seed: u64) -> CheckReport {
        CheckReport { suite: suite.to_string(), seed, results: Vec::new() }
    }

    /// Record a sampled comparison. `labels` names the compared pairs so a
    /// failure can say which component broke.
    pub fn record(&mut self, name: &str, started: Instant, cmp: &Comparison, labels: &dyn Fn(usize) -> String) {
        let (status, witness, detail) = match &cmp.failure {
            None => (Status::Pass, BTreeMap::new(), String::new()),
            Some(f) => (Status::Fail, self::witness(&f.point), labels(f.index)),
        };
        self.push(CheckResult {
            name: name.to_string(),
            status,
            max_residual: cmp.max_residual,
            witness,
            detail,
            ms: started.elapsed().as_millis() as u64,
        });
    }

    /// Record a check that could not be evaluated.
    pub fn record_error(&mut self, name: &str, started: Instant, err: impl fmt::Display) {
        self.push(CheckResult {
            name: name.to_string(),
            status: Status::Fail,
            max_residual: f64::INFINITY,
            witness: BTreeMap::new(),
            detail: err.to_string(),
            ms: started.elapsed().as_millis() as u64,
        });
    }

    pub fn record_numeric(&mut self, name: &str, started: Instant, residual: f64, tol: f64, witness: BTreeMap<String, String>) {
        let ok = residual <= tol;
        self.push(CheckResult {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            max_residual: residual,
            witness: if ok { BTreeMap::new() } else { witness },
            detail: String::new(),
            ms: started.elapsed().as_millis() as u64,
        });
    }

    pub fn skip(&mut self, name: &str, why: &str) {
        self.push(CheckResult {
            name: name.to_string(),
            status: Status::Skipped,
            max_residual: 0.0,
            witness: BTreeMap::new(),
            detail: why.to_string(),
            ms: 0,
        });
    }

    /// Add a result; a repeated name replaces the earlier entry.
    pub fn push(&mut self, r: CheckResult) {
        match self.results.iter_mut().find(|x| x.name == r.name) {
            Some(slot) => *slot = r,
            None => self.results.push(r),
        }
    }

    pub fn extend(&mut self, other: CheckReport) {
        for r in other.results {
            self.push(r);
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.suite, self.seed)?;
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &self.results {
            write!(f, "  {:<width$}  {:<7}  {:>10.3e}", r.name, r.status, r.max_residual)?;
            if !r.detail.is_empty() {
                write!(f, "  {}", r.detail)?;
            }
            if !r.witness.is_empty() {
                let w: Vec<String> = r.witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "  at {}", w.join(", "))?;
            }
            writeln!(f)?;
        }
        let passed = self.results.iter().filter(|r| r.status == Status::Pass).count();
        write!(f, "{passed}/{} passed", self.results.len())
    }
}
