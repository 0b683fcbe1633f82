//! Run manifests. Every output file gets a deterministic header (command,
//! parameters, seed, version, input digests) and a `<file>.manifest.json`
//! sidecar that adds output digests, thread count and a timestamp.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const TOOL: &str = "dyapack";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), sha256: hex(&Sha256::digest(&bytes)) })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name; `dyapack replay` feeds them back in.
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub created_unix: u64,
}

/// Collects provenance while a command runs.
pub struct Run {
    command: &'static str,
    argv: Vec<String>,
    params: serde_json::Value,
    seed: Option<u64>,
    threads: Option<usize>,
    inputs: Vec<FileDigest>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(
        command: &'static str,
        argv: Vec<String>,
        params: &impl Serialize,
        seed: Option<u64>,
        threads: Option<usize>,
    ) -> Self {
        Self {
            command,
            argv,
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            seed,
            threads,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Header lines without comment markers; identical across reruns.
    pub fn header(&self) -> Vec<String> {
        let mut out = vec![
            format!("{TOOL} {VERSION}"),
            format!("command: {}", self.command),
            format!("params: {}", self.params),
        ];
        if let Some(s) = self.seed {
            out.push(format!("seed: {s}"));
        }
        for f in &self.inputs {
            out.push(format!("input: {} sha256={}", f.path.display(), f.sha256));
        }
        out
    }

    /// Header lines prefixed for CSV and text outputs.
    pub fn hash_header(&self) -> String {
        self.header().iter().map(|l| format!("# {l}\n")).collect()
    }

    /// Writes one sidecar per output, each listing every output digest.
    pub fn finish(self) -> CliResult<()> {
        let outputs = self.outputs.iter().map(|p| FileDigest::of(p)).collect::<CliResult<Vec<_>>>()?;
        let manifest = RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: self.command.into(),
            argv: self.argv,
            params: self.params,
            seed: self.seed,
            threads: self.threads,
            inputs: self.inputs,
            outputs,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        for p in &self.outputs {
            let side = sidecar_path(p);
            fs::write(&side, format!("{text}\n")).map_err(|e| CliError::io(&side, e))?;
        }
        Ok(())
    }
}

pub fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn read_manifest(path: &Path) -> CliResult<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}
