use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

const DEFAULTS: &str = include_str!("../../data/thresholds.json");

/// Versioned table of pass/fail tolerances. Records store the table they
/// were judged against, so verdicts can be recomputed later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub version: u32,
    pub thresholds: BTreeMap<String, f64>,
}

impl Thresholds {
    pub fn defaults() -> Self {
        serde_json::from_str(DEFAULTS).expect("bundled thresholds file is valid JSON")
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.thresholds.get(name).copied()
    }

    /// Value of a threshold the harness relies on.
    ///
    /// # Panics
    /// If `name` is missing, which means the bundled file and the verdict
    /// code disagree.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("threshold `{name}` missing from table v{}", self.version))
    }

    pub fn with_overrides(mut self, overrides: &BTreeMap<String, f64>) -> Self {
        for (k, &v) in overrides {
            self.thresholds.insert(k.clone(), v);
        }
        self
    }
}
