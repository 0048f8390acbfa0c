use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use overlap_ec::campaign::ROUNDING_RULE;
use overlap_ec::{EcInstance, RngSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn instance_digest(inst: &EcInstance) -> String {
    format!("sha256:{}", sha256_hex(inst.to_text().as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedSeed {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<RngSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<RngSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub campaign_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_digest: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name; passing them again reproduces
    /// every listed output.
    pub command_line: Vec<String>,
    pub seed: u64,
    pub threads: usize,
    pub rounding_rule: String,
    pub instance_digest: Option<String>,
    pub wall_time_secs: f64,
    pub derived_seeds: Vec<DerivedSeed>,
    pub outputs: Vec<OutputFile>,
}

/// Collects the files of one invocation and writes them together with a
/// manifest. Without a destination, data goes to stdout and no manifest is
/// written.
pub struct Outputs {
    started: Instant,
    seed: u64,
    threads: usize,
    files: Vec<OutputFile>,
    pub instance_digest: Option<String>,
    pub derived_seeds: Vec<DerivedSeed>,
}

impl Outputs {
    pub fn new(seed: u64, threads: usize) -> Self {
        Outputs {
            started: Instant::now(),
            seed,
            threads,
            files: Vec::new(),
            instance_digest: None,
            derived_seeds: Vec::new(),
        }
    }

    pub fn write(&mut self, path: &Path, data: &[u8]) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        }
        fs::write(path, data).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.files.push(OutputFile {
            path: path.to_path_buf(),
            sha256: sha256_hex(data),
            bytes: data.len(),
        });
        Ok(())
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&mut self, path: Option<&Path>, data: &[u8]) -> CliResult<()> {
        match path {
            Some(p) => self.write(p, data),
            None => std::io::stdout()
                .write_all(data)
                .map_err(|e| CliError::io("writing stdout", e)),
        }
    }

    pub fn finish(self, manifest_path: Option<&Path>) -> CliResult<Option<RunManifest>> {
        let Some(path) = manifest_path else {
            return Ok(None);
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: std::env::args().skip(1).collect(),
            seed: self.seed,
            threads: self.threads,
            rounding_rule: ROUNDING_RULE.to_string(),
            instance_digest: self.instance_digest,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            derived_seeds: self.derived_seeds,
            outputs: self.files,
        };
        let json = serde_json::to_vec_pretty(&manifest)?;
        fs::write(path, json).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        Ok(Some(manifest))
    }
}

/// `<file>.manifest.json` next to a single output file.
pub fn manifest_for(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}
