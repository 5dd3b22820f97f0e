//! JSON inputs with their SHA-256 digests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use sha2::{Digest, Sha256};
use siegel_theta::linalg::{int_matrix_from_json, GramForm, IntMatrix};
use siegel_theta::theta::SiegelPoint;

use crate::error::{CliError, CliResult, Context};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads JSON files and remembers the digest of every file read.
#[derive(Debug, Default)]
pub struct Inputs {
    digests: BTreeMap<String, String>,
}

impl Inputs {
    pub fn digests(&self) -> &BTreeMap<String, String> {
        &self.digests
    }

    pub fn value(&mut self, path: &Path) -> CliResult<Value> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.digests.insert(path.display().to_string(), sha256_hex(&bytes));
        serde_json::from_slice(&bytes).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    pub fn typed<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let v = self.value(path)?;
        serde_json::from_value(v).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    pub fn int_matrix(&mut self, path: &Path) -> CliResult<IntMatrix> {
        let v = self.value(path)?;
        int_matrix_from_json(&v).context(format!("matrix in {}", path.display()))
    }

    pub fn form(&mut self, path: &Path) -> CliResult<GramForm> {
        let m = self.int_matrix(path)?;
        GramForm::new(m).context(format!("form in {}", path.display()))
    }

    pub fn point(&mut self, path: &Path) -> CliResult<SiegelPoint> {
        let v = self.value(path)?;
        SiegelPoint::from_json(&v).context(format!("point in {}", path.display()))
    }
}
