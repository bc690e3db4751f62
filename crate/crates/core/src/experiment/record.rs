use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::plot::PlotSpec;
use super::table::Table;

pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));

/// Experiment parameters; the ordered map gives a canonical JSON encoding.
pub type Params = BTreeMap<String, Value>;

/// One finished run, self-describing on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub params: Params,
    pub table: Table,
    pub violations: Vec<String>,
    #[serde(default)]
    pub plot: Option<PlotSpec>,
    pub wall_time_s: f64,
    pub version: String,
    pub cache_key: String,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, params: Params, table: Table, violations: Vec<String>, wall_time_s: f64) -> Self {
        let cache_key = cache_key(experiment, &params);
        Self {
            experiment: experiment.to_string(),
            params,
            table,
            violations,
            plot: None,
            wall_time_s,
            version: ARTIFACT_VERSION.to_string(),
            cache_key,
        }
    }
}

/// Hex SHA-256 of the experiment name and its canonical parameters.
pub fn cache_key(experiment: &str, params: &Params) -> String {
    let canonical = serde_json::to_string(params).expect("params serialize");
    let mut h = Sha256::new();
    h.update(experiment.as_bytes());
    h.update([0u8]);
    h.update(canonical.as_bytes());
    hex::encode(h.finalize())
}
