//! Run manifest: the single JSON record a pipeline invocation leaves
//! behind. Stage commands append to an existing manifest in the same
//! output directory; an interrupted command leaves `complete: false`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ResolvedConfig, StageSeeds};
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GraphInfo {
    pub n: usize,
    pub m: usize,
    pub f: usize,
    pub mean_degree: f64,
    pub raw_edge_lines: usize,
    pub self_loops_skipped: usize,
    pub storage_bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionRecord {
    pub clique_size: usize,
    pub clique_count: usize,
    pub candidates: usize,
    pub seed: u64,
    pub anomalous_nodes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub complete: bool,
    pub command: String,
    pub created_unix: u64,
    pub updated_unix: u64,
    pub config: ResolvedConfig,
    pub config_hash: String,
    pub seeds: StageSeeds,
    pub inputs: Vec<FileDigest>,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_rss_bytes: Option<u64>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn begin(command: &str, config: &ResolvedConfig) -> Self {
        RunManifest {
            complete: false,
            command: command.to_string(),
            created_unix: now_unix(),
            updated_unix: now_unix(),
            config: config.clone(),
            config_hash: config.hash(),
            seeds: config.seeds(),
            inputs: Vec::new(),
            stages: Vec::new(),
            graph: None,
            injection: None,
            auc: None,
            peak_rss_bytes: None,
        }
    }

    /// Loads the manifest already present in `out_dir` (so consecutive stage
    /// commands accumulate) and re-marks it in progress for `command`.
    /// Falls back to a fresh manifest when none exists or the config
    /// changed.
    pub fn begin_in(out_dir: &Path, command: &str, config: &ResolvedConfig) -> Self {
        let path = out_dir.join(MANIFEST_FILE);
        if let Ok(raw) = std::fs::read_to_string(&path) {
            if let Ok(mut existing) = serde_json::from_str::<RunManifest>(&raw) {
                if existing.config_hash == config.hash() {
                    existing.complete = false;
                    existing.command = command.to_string();
                    existing.updated_unix = now_unix();
                    return existing;
                }
            }
        }
        RunManifest::begin(command, config)
    }

    pub fn record_input(&mut self, path: &Path) {
        let digest = file_sha256(path).unwrap_or_else(|_| "unreadable".to_string());
        self.inputs.retain(|d| d.path != path);
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: digest,
        });
    }

    pub fn record_stage(&mut self, name: &str, outputs: Vec<PathBuf>) {
        self.stages.retain(|s| s.name != name);
        self.stages.push(StageRecord {
            name: name.to_string(),
            outputs,
        });
    }

    pub fn save(&mut self, out_dir: &Path) -> Result<()> {
        self.updated_unix = now_unix();
        let path = out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&path, json).map_err(|source| CliError::Io { path, source })
    }

    pub fn finish(&mut self, out_dir: &Path) -> Result<()> {
        self.complete = true;
        self.peak_rss_bytes = crate::memory::peak_rss_bytes();
        self.save(out_dir)
    }

    pub fn load(out_dir: &Path) -> Result<Self> {
        let path = out_dir.join(MANIFEST_FILE);
        let raw = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&raw).map_err(|e| CliError::Format {
            path,
            message: format!("invalid manifest: {e}"),
        })
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
