//! Named verification suites (placeholder; filled in alongside the
//! acceptance tests).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub lines: Vec<CheckLine>,
}

/// Run a named suite.
pub fn run_suite(name: &str) -> Result<SuiteReport> {
    Err(Error::Config(format!("unknown suite: {name}")))
}

/// All suite names in execution order.
pub fn suite_names() -> Vec<&'static str> {
    vec![]
}
