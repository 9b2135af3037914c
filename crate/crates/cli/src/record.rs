use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

/// Outcome of one named check inside a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: u64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, cases: u64, failures: u64, detail: Value) -> Self {
        Check {
            name: name.into(),
            passed: failures == 0,
            cases,
            failures,
            detail,
        }
    }

    pub fn single(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Check::new(name, 1, u64::from(!passed), detail)
    }
}

/// Machine-readable record of a run. Wall time goes to stderr so that
/// seeded runs serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub payload: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunRecord {
    pub fn new(config: &ExperimentConfig, payload: Value, checks: Vec<Check>) -> Self {
        RunRecord {
            command: config.mode_name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            payload,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records contain only finite JSON values")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
