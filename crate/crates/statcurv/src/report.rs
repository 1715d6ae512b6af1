//! Machine-readable run reports. Key order is stable (struct order plus
//! BTreeMaps), so identical (spec, seed, plan) inputs serialize to
//! byte-identical JSON; timing never goes into the report body.

use crate::spec::ManifoldSpec;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// Echo of the subcommand and its arguments.
    pub command: String,
    /// Spec reference as given on the command line.
    pub spec: String,
    /// Content hash of the canonical spec encoding.
    pub fingerprint: String,
    pub seed: u64,
    pub points: usize,
    pub trials: usize,
    pub residuals: BTreeMap<String, ResidualEntry>,
    pub verdicts: BTreeMap<String, String>,
}

impl RunReport {
    pub fn new(command: String, spec_ref: String, spec: &ManifoldSpec) -> RunReport {
        RunReport {
            command,
            spec: spec_ref,
            fingerprint: fingerprint(spec),
            seed: 0,
            points: 0,
            trials: 0,
            residuals: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn push_residual(&mut self, name: &str, value: f64, tolerance: f64) {
        self.residuals.insert(
            name.to_string(),
            ResidualEntry {
                value,
                tolerance,
                pass: value <= tolerance,
            },
        );
    }

    pub fn all_pass(&self) -> bool {
        self.residuals.values().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

pub fn fingerprint(spec: &ManifoldSpec) -> String {
    let mut hasher = Sha256::new();
    hasher.update(spec.to_canonical_json().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}
