use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::io::sha256_hex;

/// Provenance record of one run; written next to, not into, the JSON result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub input_digests: BTreeMap<String, String>,
    pub version: String,
    pub wall_time_ms: u128,
    pub result_digest: String,
}

impl RunManifest {
    pub fn new(command: Vec<String>, input_digests: BTreeMap<String, String>, wall_time_ms: u128, result: &str) -> Self {
        Self {
            command,
            input_digests,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms,
            result_digest: sha256_hex(result.as_bytes()),
        }
    }
}
