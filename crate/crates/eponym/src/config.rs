//! Run configuration. Precedence: command-line flags > the `STP_DATA_DIR`
//! environment variable (data directory only) > config file > built-in
//! defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use eponym_core::ids::EntityId;
use eponym_core::model::Hyperparameters;
use eponym_core::person::ExtractConfig;

use crate::error::Error;

pub const DATA_DIR_ENV: &str = "STP_DATA_DIR";

/// Config-file schema (TOML). Every field is optional; unset fields fall
/// back to the defaults below.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data_dir: Option<PathBuf>,
    pub language: Option<String>,
    pub affix_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub negatives_per_street: Option<usize>,
    pub region_ids: Option<Vec<String>>,
    pub learning_rate: Option<f64>,
    pub l2: Option<f64>,
    pub epochs: Option<u32>,
    /// Knowledge-graph property mapping overrides.
    pub properties: Option<ExtractConfig>,
}

/// Fully resolved configuration used by the pipeline stages.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub language: String,
    pub affix_dir: Option<PathBuf>,
    pub seed: u64,
    pub threshold: f64,
    pub negatives_per_street: usize,
    pub region_ids: Vec<EntityId>,
    pub hyper: Hyperparameters,
    pub extract: ExtractConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: PathBuf::from("."),
            language: String::from("de"),
            affix_dir: None,
            seed: 42,
            threshold: 0.5,
            negatives_per_street: 50,
            region_ids: Vec::new(),
            hyper: Hyperparameters::default(),
            extract: ExtractConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(config_path: Option<&Path>) -> Result<Self, Error> {
        let file = match config_path {
            Some(path) => {
                let body = std::fs::read_to_string(path)
                    .map_err(|e| Error::io("config", path, e))?;
                toml::from_str::<FileConfig>(&body)
                    .map_err(|e| Error::format("config", path, e.to_string()))?
            }
            None => FileConfig::default(),
        };
        let mut config = RunConfig::default();
        config.apply_file(file);
        if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
            if !dir.is_empty() {
                config.data_dir = PathBuf::from(dir);
            }
        }
        Ok(config)
    }

    fn apply_file(&mut self, file: FileConfig) {
        if let Some(dir) = file.data_dir {
            self.data_dir = dir;
        }
        if let Some(language) = file.language {
            self.language = language;
        }
        if let Some(dir) = file.affix_dir {
            self.affix_dir = Some(dir);
        }
        if let Some(seed) = file.seed {
            self.seed = seed;
            self.hyper.seed = seed;
        }
        if let Some(threshold) = file.threshold {
            self.threshold = threshold;
        }
        if let Some(k) = file.negatives_per_street {
            self.negatives_per_street = k;
        }
        if let Some(regions) = file.region_ids {
            self.region_ids = regions.into_iter().map(EntityId::from).collect();
        }
        if let Some(lr) = file.learning_rate {
            self.hyper.learning_rate = lr;
        }
        if let Some(l2) = file.l2 {
            self.hyper.l2 = l2;
        }
        if let Some(epochs) = file.epochs {
            self.hyper.epochs = epochs;
        }
        if let Some(extract) = file.properties {
            self.extract = extract;
        }
    }

    /// Validate a threshold coming from flags or file.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::usage(
                "config",
                format!("threshold must lie in (0, 1), got {}", self.threshold),
            ));
        }
        if self.negatives_per_street == 0 {
            return Err(Error::usage("config", "negatives-per-street must be at least 1"));
        }
        Ok(())
    }
}
