use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentKind, RunConfig};
use super::payload::{verdicts, Payload, Verdict};
use super::thresholds::Thresholds;

pub const SCHEMA_VERSION: u32 = 1;

/// One finished run. Written once to the registry and never modified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub version: String,
    pub config: RunConfig,
    pub thresholds: Thresholds,
    /// Hex SHA-256 over a git-style `run <len>\0<canonical inputs>` blob.
    pub input_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub payload: Payload,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

/// Canonical JSON of everything that determines a payload: config,
/// thresholds, schema and crate version. Object keys come out sorted.
fn canonical_inputs(config: &RunConfig, thresholds: &Thresholds, version: &str) -> Vec<u8> {
    let value = serde_json::json!({
        "config": config,
        "thresholds": thresholds,
        "schema": SCHEMA_VERSION,
        "version": version,
    });
    serde_json::to_vec(&value).expect("inputs serialize")
}

pub fn input_hash(config: &RunConfig, thresholds: &Thresholds, version: &str) -> String {
    let body = canonical_inputs(config, thresholds, version);
    let mut h = Sha256::new();
    h.update(format!("run {}\0", body.len()).as_bytes());
    h.update(&body);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn timestamp(t: SystemTime) -> String {
    humantime::format_rfc3339_millis(t).to_string()
}

impl RunRecord {
    pub fn new(
        config: RunConfig,
        payload: Payload,
        started: SystemTime,
        finished: SystemTime,
    ) -> Self {
        let thresholds = config.effective_thresholds();
        let version = env!("CARGO_PKG_VERSION").to_string();
        let input_hash = input_hash(&config, &thresholds, &version);
        let verdicts = verdicts(&payload, &thresholds);
        let passed = verdicts.iter().all(|v| v.pass);
        Self {
            schema: SCHEMA_VERSION,
            version,
            config,
            thresholds,
            input_hash,
            started_at: timestamp(started),
            finished_at: timestamp(finished),
            payload,
            verdicts,
            passed,
        }
    }

    pub fn kind(&self) -> ExperimentKind {
        self.payload.kind()
    }

    /// Verdicts recomputed from the stored payload and thresholds.
    pub fn recompute_verdicts(&self) -> Vec<Verdict> {
        verdicts(&self.payload, &self.thresholds)
    }

    /// Whether the stored hash matches the stored inputs.
    pub fn hash_is_consistent(&self) -> bool {
        input_hash(&self.config, &self.thresholds, &self.version) == self.input_hash
    }

    /// Process exit status: 0 when every verdict passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn short_id(&self) -> &str {
        &self.input_hash[..12]
    }
}
