//! Pipeline configuration.
//!
//! Loaded from a TOML document; every field has a default, so an empty file
//! is a valid configuration. The SHA-256 of the canonical JSON encoding is
//! the config digest embedded in every artifact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{HealthWeights, DEFAULT_EPSILON};
use crate::fuzzy::{Feature, FuzzyPartition, WINDOW_LENGTH};
use crate::ingest::ColumnMapping;
use crate::prognosis::{PredictParams, DEFAULT_INTERVAL_LEVEL, DEFAULT_TOP_K};
use crate::segmentation::{
    RunSplitParams, DEFAULT_BACKWASH_THRESHOLD_GPM, DEFAULT_FAILURE_HI, DEFAULT_HI_JUMP,
    DEFAULT_MAX_GAP_HOURS, DEFAULT_MIN_CYCLE_SAMPLES,
};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub backwash_gpm: f64,
    pub hi_jump: f64,
    pub max_gap_hours: f64,
    pub failure_hi: f64,
    pub min_cycle_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            backwash_gpm: DEFAULT_BACKWASH_THRESHOLD_GPM,
            hi_jump: DEFAULT_HI_JUMP,
            max_gap_hours: DEFAULT_MAX_GAP_HOURS,
            failure_hi: DEFAULT_FAILURE_HI,
            min_cycle_samples: DEFAULT_MIN_CYCLE_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealthConfig {
    pub weights: HealthWeights,
    pub epsilon: f64,
    /// Starred value for a feature that is constant across a run.
    pub constant_fill: f64,
}

impl Default for HealthConfig {
    fn default() -> Self {
        Self {
            weights: HealthWeights::default(),
            epsilon: DEFAULT_EPSILON,
            constant_fill: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzyConfig {
    pub hi_range: [f64; 2],
    pub dhi_range: [f64; 2],
    pub window_length: usize,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self {
            hi_range: [0.0, 1.0],
            dhi_range: [-1.0, 1.0],
            window_length: WINDOW_LENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrognosisConfig {
    pub top_k: usize,
    pub interval_level: f64,
    /// Let retrieval return exemplars from the query's own run.
    pub allow_same_run: bool,
}

impl Default for PrognosisConfig {
    fn default() -> Self {
        Self {
            top_k: DEFAULT_TOP_K,
            interval_level: DEFAULT_INTERVAL_LEVEL,
            allow_same_run: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub train_fraction: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub columns: ColumnMapping,
    pub thresholds: Thresholds,
    pub health: HealthConfig,
    pub fuzzy: FuzzyConfig,
    pub prognosis: PrognosisConfig,
    pub evaluation: EvaluationConfig,
    /// Overrides the scenario seed for `simulate` when set.
    pub seed: Option<u64>,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        let positive = [
            ("thresholds.backwash_gpm", t.backwash_gpm),
            ("thresholds.hi_jump", t.hi_jump),
            ("thresholds.max_gap_hours", t.max_gap_hours),
            ("health.epsilon", self.health.epsilon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&t.failure_hi) {
            return Err(Error::Config(format!(
                "thresholds.failure_hi must be in [0, 1), got {}",
                t.failure_hi
            )));
        }
        if t.min_cycle_samples == 0 {
            return Err(Error::Config("thresholds.min_cycle_samples must be >= 1".into()));
        }
        self.health.weights.validate()?;
        if !(0.0..=1.0).contains(&self.health.constant_fill) {
            return Err(Error::Config("health.constant_fill must be in [0, 1]".into()));
        }
        if self.fuzzy.window_length != WINDOW_LENGTH {
            return Err(Error::Config(format!(
                "fuzzy.window_length must be {WINDOW_LENGTH} (signatures are fixed-width)"
            )));
        }
        self.hi_partition()?;
        self.dhi_partition()?;
        if self.prognosis.top_k == 0 {
            return Err(Error::Config("prognosis.top_k must be >= 1".into()));
        }
        let level = self.prognosis.interval_level;
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Config(format!(
                "prognosis.interval_level must be in (0, 1), got {level}"
            )));
        }
        let f = self.evaluation.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!(
                "evaluation.train_fraction must be in (0, 1), got {f}"
            )));
        }
        Ok(())
    }

    pub fn hi_partition(&self) -> Result<FuzzyPartition> {
        let [lo, hi] = self.fuzzy.hi_range;
        FuzzyPartition::uniform(Feature::Hi, lo, hi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dhi_partition(&self) -> Result<FuzzyPartition> {
        let [lo, hi] = self.fuzzy.dhi_range;
        FuzzyPartition::uniform(Feature::DHi, lo, hi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn split_params(&self) -> RunSplitParams {
        RunSplitParams {
            hi_jump: self.thresholds.hi_jump,
            max_gap_hours: self.thresholds.max_gap_hours,
            constant_fill: self.health.constant_fill,
        }
    }

    pub fn predict_params(&self) -> PredictParams {
        PredictParams {
            k: self.prognosis.top_k,
            level: self.prognosis.interval_level,
            eps: self.health.epsilon,
            exclude_same_run: !self.prognosis.allow_same_run,
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
