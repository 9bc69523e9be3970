use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::run::RunConfig;
use crate::InputError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// SHA-256 of every input file, by absolute path.
    pub inputs: BTreeMap<PathBuf, String>,
    /// SHA-256 of every output file, by name relative to the output directory.
    pub outputs: BTreeMap<String, String>,
    pub started: String,
    pub finished: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn hash_inputs(paths: &[PathBuf]) -> Result<BTreeMap<PathBuf, String>> {
    paths
        .iter()
        .map(|p| Ok((p.clone(), sha256_file(p)?)))
        .collect()
}

/// Hashes every file under `dir` except the manifest itself.
pub fn hash_outputs(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).with_context(|| format!("listing {}", d.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(dir)
                .expect("under dir")
                .to_string_lossy()
                .replace('\\', "/");
            if rel != MANIFEST_FILE {
                out.insert(rel, sha256_file(&path)?);
            }
        }
    }
    Ok(out)
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| {
            InputError(format!("{}: not a valid manifest: {e}", path.display())).into()
        })
    }

    /// Fails if any recorded input has changed since the run.
    pub fn check_inputs(&self) -> Result<()> {
        for (path, expected) in &self.inputs {
            let actual = sha256_file(path).map_err(|e| InputError(format!("{e:#}")))?;
            if &actual != expected {
                return Err(InputError(format!(
                    "input {} changed since the recorded run",
                    path.display()
                ))
                .into());
            }
        }
        Ok(())
    }
}
