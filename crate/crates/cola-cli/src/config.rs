//! Configuration: JSON file, flag overrides, validation, seed fan-out.
//!
//! Precedence is flags > config file > defaults. Defaults follow the
//! reference protocol: `c = 4`, `d = 64`, `B = 300`, `R = 256`,
//! `restart_prob = 0.5`, 100 epochs at learning rate 1e-3, injection
//! `p = 15`, `q = 5`, `k = 50`. Unknown JSON keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cola_core::detector::{EstimationMode, ScoreSource, TrainConfig};
use cola_core::inject::InjectionConfig;
use cola_core::model::ReadoutMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// One base seed fans out to per-stage seeds by fixed offsets so stages are
/// independently reproducible and `run` equals the staged composition.
pub const SEED_OFFSET_INJECT: u64 = 1;
pub const SEED_OFFSET_TRAIN: u64 = 2;
pub const SEED_OFFSET_INFER: u64 = 3;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct StageSeeds {
    pub base: u64,
    pub inject: u64,
    pub train: u64,
    pub infer: u64,
}

impl StageSeeds {
    pub fn from_base(base: u64) -> Self {
        StageSeeds {
            base,
            inject: base.wrapping_add(SEED_OFFSET_INJECT),
            train: base.wrapping_add(SEED_OFFSET_TRAIN),
            infer: base.wrapping_add(SEED_OFFSET_INFER),
        }
    }
}

/// The JSON config file. Every key is optional; unknown keys are errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub subgraph_size: Option<usize>,
    pub embedding_dim: Option<usize>,
    pub layers: Option<usize>,
    pub rounds: Option<usize>,
    pub restart_prob: Option<f64>,
    pub max_steps: Option<usize>,
    pub seed: Option<u64>,
    pub readout: Option<String>,
    pub estimation_mode: Option<String>,
    pub score_source: Option<String>,
    pub activate_final_layer: Option<bool>,
    pub clique_size: Option<usize>,
    pub clique_count: Option<usize>,
    pub candidates: Option<usize>,
    pub normalize_attrs: Option<bool>,
    pub workers: Option<usize>,
    pub edges: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&raw)
            .map_err(|e| CliError::usage(format!("config file `{}`: {e}", path.display())))
    }
}

/// Flag-level overrides collected by the argument parser; `None` means the
/// flag was not given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub subgraph_size: Option<usize>,
    pub embedding_dim: Option<usize>,
    pub layers: Option<usize>,
    pub rounds: Option<usize>,
    pub restart_prob: Option<f64>,
    pub max_steps: Option<usize>,
    pub seed: Option<u64>,
    pub readout: Option<String>,
    pub estimation_mode: Option<String>,
    pub score_source: Option<String>,
    pub activate_final_layer: Option<bool>,
    pub clique_size: Option<usize>,
    pub clique_count: Option<usize>,
    pub candidates: Option<usize>,
    pub normalize_attrs: Option<bool>,
    pub workers: Option<usize>,
    pub edges: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Fully resolved settings, snapshot into manifests and sidecars.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResolvedConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub subgraph_size: usize,
    pub embedding_dim: usize,
    pub layers: usize,
    pub rounds: usize,
    pub restart_prob: f64,
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub readout: String,
    pub estimation_mode: String,
    pub score_source: String,
    pub activate_final_layer: bool,
    pub clique_size: usize,
    pub clique_count: usize,
    pub candidates: usize,
    pub normalize_attrs: bool,
    pub workers: Option<usize>,
    pub edges: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        ResolvedConfig {
            epochs: 100,
            batch_size: 300,
            learning_rate: 1e-3,
            subgraph_size: 4,
            embedding_dim: 64,
            layers: 1,
            rounds: 256,
            restart_prob: 0.5,
            max_steps: None,
            seed: 1,
            readout: "average".into(),
            estimation_mode: "mean".into(),
            score_source: "both".into(),
            activate_final_layer: true,
            clique_size: 15,
            clique_count: 5,
            candidates: 50,
            normalize_attrs: false,
            workers: None,
            edges: None,
            attrs: None,
            labels: None,
            graph: None,
            out_dir: PathBuf::from("cola-out"),
        }
    }
}

fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

impl ResolvedConfig {
    /// Merges defaults, config file, flags, and the output-directory env
    /// var, then validates ranges.
    pub fn resolve(file: &FileConfig, flags: &Overrides) -> Result<Self> {
        let defaults = ResolvedConfig::default();
        let out_dir = flags
            .out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .or_else(|| std::env::var_os("COLA_OUT_DIR").map(PathBuf::from))
            .unwrap_or(defaults.out_dir);
        let cfg = ResolvedConfig {
            epochs: pick(&flags.epochs, &file.epochs, defaults.epochs),
            batch_size: pick(&flags.batch_size, &file.batch_size, defaults.batch_size),
            learning_rate: pick(&flags.learning_rate, &file.learning_rate, defaults.learning_rate),
            subgraph_size: pick(&flags.subgraph_size, &file.subgraph_size, defaults.subgraph_size),
            embedding_dim: pick(&flags.embedding_dim, &file.embedding_dim, defaults.embedding_dim),
            layers: pick(&flags.layers, &file.layers, defaults.layers),
            rounds: pick(&flags.rounds, &file.rounds, defaults.rounds),
            restart_prob: pick(&flags.restart_prob, &file.restart_prob, defaults.restart_prob),
            max_steps: pick_opt(&flags.max_steps, &file.max_steps),
            seed: pick(&flags.seed, &file.seed, defaults.seed),
            readout: pick(&flags.readout, &file.readout, defaults.readout),
            estimation_mode: pick(&flags.estimation_mode, &file.estimation_mode, defaults.estimation_mode),
            score_source: pick(&flags.score_source, &file.score_source, defaults.score_source),
            activate_final_layer: pick(
                &flags.activate_final_layer,
                &file.activate_final_layer,
                defaults.activate_final_layer,
            ),
            clique_size: pick(&flags.clique_size, &file.clique_size, defaults.clique_size),
            clique_count: pick(&flags.clique_count, &file.clique_count, defaults.clique_count),
            candidates: pick(&flags.candidates, &file.candidates, defaults.candidates),
            normalize_attrs: pick(&flags.normalize_attrs, &file.normalize_attrs, defaults.normalize_attrs),
            workers: pick_opt(&flags.workers, &file.workers),
            edges: pick_opt(&flags.edges, &file.edges),
            attrs: pick_opt(&flags.attrs, &file.attrs),
            labels: pick_opt(&flags.labels, &file.labels),
            graph: pick_opt(&flags.graph, &file.graph),
            out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks, reported with the flag-style key names.
    pub fn validate(&self) -> Result<()> {
        fn at_least_one(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(CliError::usage(format!("`{name}` must be >= 1, got 0")));
            }
            Ok(())
        }
        at_least_one("c", self.subgraph_size)?;
        at_least_one("d", self.embedding_dim)?;
        at_least_one("B", self.batch_size)?;
        at_least_one("R", self.rounds)?;
        at_least_one("layers", self.layers)?;
        at_least_one("k", self.candidates)?;
        if self.clique_size < 2 {
            return Err(CliError::usage(format!(
                "`p` must be >= 2, got {}",
                self.clique_size
            )));
        }
        if let Some(0) = self.max_steps {
            return Err(CliError::usage("`max_steps` must be >= 1, got 0".to_string()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CliError::usage(format!(
                "`lr` must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(self.restart_prob > 0.0 && self.restart_prob < 1.0) {
            return Err(CliError::usage(format!(
                "`restart_prob` must be in (0, 1), got {}",
                self.restart_prob
            )));
        }
        if let Some(0) = self.workers {
            return Err(CliError::usage("`workers` must be >= 1, got 0".to_string()));
        }
        ReadoutMode::from_str(&self.readout).map_err(|e| CliError::usage(e.to_string()))?;
        EstimationMode::from_str(&self.estimation_mode).map_err(|e| CliError::usage(e.to_string()))?;
        ScoreSource::from_str(&self.score_source).map_err(|e| CliError::usage(e.to_string()))?;
        Ok(())
    }

    pub fn seeds(&self) -> StageSeeds {
        StageSeeds::from_base(self.seed)
    }

    /// The core training/inference config with the given stage seed.
    pub fn train_config(&self, stage_seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            subgraph_size: self.subgraph_size,
            embedding_dim: self.embedding_dim,
            layers: self.layers,
            rounds: self.rounds,
            restart_prob: self.restart_prob,
            max_steps: self.max_steps,
            seed: stage_seed,
            readout: ReadoutMode::from_str(&self.readout).expect("validated"),
            estimation: EstimationMode::from_str(&self.estimation_mode).expect("validated"),
            score_source: ScoreSource::from_str(&self.score_source).expect("validated"),
            activate_final_layer: self.activate_final_layer,
        }
    }

    pub fn injection_config(&self, stage_seed: u64) -> InjectionConfig {
        InjectionConfig {
            clique_size: self.clique_size,
            clique_count: self.clique_count,
            candidates: self.candidates,
            seed: stage_seed,
        }
    }

    /// SHA-256 of the canonical JSON snapshot.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_paper_defaults() {
        let cfg = ResolvedConfig::resolve(&FileConfig::default(), &Overrides::default()).unwrap();
        assert_eq!(cfg.subgraph_size, 4);
        assert_eq!(cfg.embedding_dim, 64);
        assert_eq!(cfg.batch_size, 300);
        assert_eq!(cfg.rounds, 256);
        assert_eq!(cfg.restart_prob, 0.5);
        assert_eq!(cfg.clique_size, 15);
        assert_eq!(cfg.candidates, 50);
    }

    #[test]
    fn flags_beat_file_values() {
        let file = FileConfig {
            rounds: Some(256),
            ..FileConfig::default()
        };
        let flags = Overrides {
            rounds: Some(8),
            ..Overrides::default()
        };
        let cfg = ResolvedConfig::resolve(&file, &flags).unwrap();
        assert_eq!(cfg.rounds, 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<FileConfig>("{\"epoch\": 5}").unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn zero_c_is_a_usage_error_naming_c() {
        let flags = Overrides {
            subgraph_size: Some(0),
            ..Overrides::default()
        };
        let err = ResolvedConfig::resolve(&FileConfig::default(), &flags).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`c`"));
    }

    #[test]
    fn seed_fanout_is_fixed_offsets() {
        let seeds = StageSeeds::from_base(100);
        assert_eq!(seeds.inject, 101);
        assert_eq!(seeds.train, 102);
        assert_eq!(seeds.infer, 103);
    }

    #[test]
    fn hash_is_stable_and_config_sensitive() {
        let a = ResolvedConfig::default();
        let mut b = ResolvedConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.rounds = 8;
        assert_ne!(a.hash(), b.hash());
    }
}
