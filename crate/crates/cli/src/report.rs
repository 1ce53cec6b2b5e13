//! JSON run reports. Everything except the `timing` object is a function of
//! the configuration.

use serde::Serialize;
use serde_json::Value;

pub const FORMAT: &str = "qae-report v1";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Serialize) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: serde_json::to_value(detail).unwrap_or(Value::Null),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn new(name: &str, checks: Vec<Check>) -> Self {
        SuiteResult {
            name: name.to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub suites_ms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub config: serde_json::Map<String, Value>,
    /// Worker threads used; results are independent of it.
    pub parallelism: usize,
    pub snapshot_digest: Option<String>,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
    pub timing: Timing,
}

impl RunReport {
    /// Pretty JSON, optionally without the `timing` object.
    pub fn to_json(&self, with_timing: bool) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if !with_timing {
            if let Value::Object(m) = &mut v {
                m.remove("timing");
            }
        }
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}
