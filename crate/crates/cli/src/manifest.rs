use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{read_bytes, write_text, Outcome};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Characterize,
    Fit,
    Radar,
    Validate,
}

/// Provenance of one output directory. No timestamps, so reruns with the
/// same inputs write the same bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: CommandKind,
    pub config_path: String,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: String,
    /// sha256 of every input file, keyed by path.
    pub input_digests: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(
        command: CommandKind,
        config_path: &Path,
        seed: Option<u64>,
        output_dir: &Path,
    ) -> Self {
        Self {
            command,
            config_path: config_path.display().to_string(),
            seed,
            output_dir: output_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Outcome<()> {
        let bytes = read_bytes(path)?;
        self.input_digests
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Create the output directory and write the manifest into it.
    pub fn write(&self, dir: &Path) -> Outcome<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| crate::failure::Failure::from(e).context(dir.display()))?;
        let mut s = serde_json::to_string_pretty(self).expect("manifests always serialize");
        s.push('\n');
        write_text(&dir.join(MANIFEST_FILE), &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
