//! `key=value` run configuration shared by every subcommand.

use std::path::Path;
use std::str::FromStr;

use plrefine::laser::{DEFAULT_ABOVE, DEFAULT_BELOW, DEFAULT_MOUNT_HEIGHT};
use plrefine::metrics::{DEFAULT_EFS_MAX_DIST, DEFAULT_EMD_CAP, DEFAULT_SUBSAMPLE_SEED};
use plrefine::refinement::{
    OptimizerKind, TrainConfig, DEFAULT_K, DEFAULT_OFFSET_CLAMP, DEFAULT_REJECT_RADIUS,
};
use plrefine::spatial::{DEFAULT_CELL, DEFAULT_SIGMA};
use plrefine::synth::{CorruptionSpec, DatasetConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // synthetic data
    pub scene_seed: u64,
    /// Frames to synthesize, or to process; `None` means 5 for synthesis
    /// and every frame present otherwise.
    pub frames: Option<usize>,
    pub first_frame: usize,
    pub extent: f64,
    pub camera_height: f64,
    pub mount_height: f64,
    pub beam_count: usize,
    pub map_thresh: f64,
    pub tail_prob: f64,
    pub tail_length: f64,
    pub misalign_sigma: f64,
    pub corruption_seed: u64,
    // mask
    pub below: f64,
    pub above: f64,
    // features and model
    pub k: usize,
    pub sigma: f64,
    pub cell: f64,
    pub grid_padding: f64,
    pub reject_radius: Option<f64>,
    pub offset_clamp: f64,
    // training
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub clip_norm: Option<f64>,
    pub max_points_per_sample: Option<usize>,
    // metrics
    pub emd_cap: usize,
    pub emd_seed: u64,
    pub efs_max_dist: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let data = DatasetConfig::<f64>::default();
        let train = TrainConfig::<f64>::default();
        Self {
            scene_seed: 0,
            frames: None,
            first_frame: 0,
            extent: data.extent,
            camera_height: data.camera_height,
            mount_height: DEFAULT_MOUNT_HEIGHT,
            beam_count: data.beam_count,
            map_thresh: data.map_thresh,
            tail_prob: 0.5,
            tail_length: 2.0,
            misalign_sigma: 0.15,
            corruption_seed: 1,
            below: DEFAULT_BELOW,
            above: DEFAULT_ABOVE,
            k: DEFAULT_K,
            sigma: DEFAULT_SIGMA,
            cell: DEFAULT_CELL,
            grid_padding: 1.0,
            reject_radius: Some(DEFAULT_REJECT_RADIUS),
            offset_clamp: DEFAULT_OFFSET_CLAMP,
            seed: train.seed,
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            batch_size: train.batch_size,
            optimizer: train.optimizer,
            beta1: train.beta1,
            beta2: train.beta2,
            clip_norm: train.clip_norm,
            max_points_per_sample: train.max_points_per_sample,
            emd_cap: DEFAULT_EMD_CAP,
            emd_seed: DEFAULT_SUBSAMPLE_SEED,
            efs_max_dist: DEFAULT_EFS_MAX_DIST,
        }
    }
}

fn value<V: FromStr>(key: &str, raw: &str) -> Result<V, String> {
    raw.parse()
        .map_err(|_| format!("invalid value '{raw}' for '{key}'"))
}

/// `none` disables an optional setting.
fn optional<V: FromStr>(key: &str, raw: &str) -> Result<Option<V>, String> {
    if raw == "none" {
        Ok(None)
    } else {
        value(key, raw).map(Some)
    }
}

impl RunConfig {
    /// Applies one `key=value` assignment.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        match key {
            "scene_seed" => self.scene_seed = value(key, raw)?,
            "frames" => self.frames = optional(key, raw)?,
            "first_frame" => self.first_frame = value(key, raw)?,
            "extent" => self.extent = value(key, raw)?,
            "camera_height" => self.camera_height = value(key, raw)?,
            "mount_height" => self.mount_height = value(key, raw)?,
            "beam_count" => self.beam_count = value(key, raw)?,
            "map_thresh" => self.map_thresh = value(key, raw)?,
            "tail_prob" => self.tail_prob = value(key, raw)?,
            "tail_length" => self.tail_length = value(key, raw)?,
            "misalign_sigma" => self.misalign_sigma = value(key, raw)?,
            "corruption_seed" => self.corruption_seed = value(key, raw)?,
            "below" => self.below = value(key, raw)?,
            "above" => self.above = value(key, raw)?,
            "k" => self.k = value(key, raw)?,
            "sigma" => self.sigma = value(key, raw)?,
            "cell" => self.cell = value(key, raw)?,
            "grid_padding" => self.grid_padding = value(key, raw)?,
            "reject_radius" => self.reject_radius = optional(key, raw)?,
            "offset_clamp" => self.offset_clamp = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "learning_rate" => self.learning_rate = value(key, raw)?,
            "epochs" => self.epochs = value(key, raw)?,
            "batch_size" => self.batch_size = value(key, raw)?,
            "optimizer" => {
                self.optimizer = raw.parse().map_err(|e: plrefine::Error| e.to_string())?
            }
            "beta1" => self.beta1 = value(key, raw)?,
            "beta2" => self.beta2 = value(key, raw)?,
            "clip_norm" => self.clip_norm = optional(key, raw)?,
            "max_points_per_sample" => self.max_points_per_sample = optional(key, raw)?,
            "emd_cap" => self.emd_cap = value(key, raw)?,
            "emd_seed" => self.emd_seed = value(key, raw)?,
            "efs_max_dist" => self.efs_max_dist = value(key, raw)?,
            other => return Err(format!("unknown configuration key '{other}'")),
        }
        Ok(())
    }

    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            cfg.set(key.trim(), raw.trim())
                .map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("'{name}' must be positive, got {v}"))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("'{name}' must be non-negative, got {v}"))
            }
        };
        if self.frames == Some(0) {
            return Err("'frames' must be at least 1".into());
        }
        if self.beam_count < 2 {
            return Err("'beam_count' must be at least 2".into());
        }
        if self.k == 0 {
            return Err("'k' must be at least 1".into());
        }
        if self.emd_cap == 0 {
            return Err("'emd_cap' must be at least 1".into());
        }
        for (name, v) in [
            ("extent", self.extent),
            ("camera_height", self.camera_height),
            ("mount_height", self.mount_height),
            ("map_thresh", self.map_thresh),
            ("sigma", self.sigma),
            ("cell", self.cell),
            ("efs_max_dist", self.efs_max_dist),
        ] {
            positive(name, v)?;
        }
        for (name, v) in [
            ("tail_length", self.tail_length),
            ("misalign_sigma", self.misalign_sigma),
            ("below", self.below),
            ("above", self.above),
            ("grid_padding", self.grid_padding),
        ] {
            non_negative(name, v)?;
        }
        if let Some(r) = self.reject_radius {
            positive("reject_radius", r)?;
        }
        self.dataset().validate().map_err(|e| e.to_string())?;
        self.corruption().validate().map_err(|e| e.to_string())?;
        self.training().validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn dataset(&self) -> DatasetConfig<f64> {
        DatasetConfig {
            extent: self.extent,
            camera_height: self.camera_height,
            mount_height: self.mount_height,
            beam_count: self.beam_count,
            map_thresh: self.map_thresh,
            ..DatasetConfig::default()
        }
    }

    pub fn corruption(&self) -> CorruptionSpec<f64> {
        CorruptionSpec {
            tail_prob: self.tail_prob,
            tail_length: self.tail_length,
            misalign_sigma: self.misalign_sigma,
            seed: self.corruption_seed,
        }
    }

    pub fn training(&self) -> TrainConfig<f64> {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            optimizer: self.optimizer,
            beta1: self.beta1,
            beta2: self.beta2,
            clip_norm: self.clip_norm,
            offset_clamp: self.offset_clamp,
            max_points_per_sample: self.max_points_per_sample,
        }
    }
}
