//! Run configuration: one JSON document with a section per stage.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{template_by_name, GeneratorConfig};
use crate::layout_init::{DetectionNoise, ViewConfig, WallFitConfig};
use crate::pose::PoseConfig;
use crate::posterior::PosteriorConfig;
use crate::projection::PanoSize;
use crate::render::MODEL_VIEW_SIZE;
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub rooms: usize,
    /// Templates assigned to rooms in rotation.
    pub templates: Vec<String>,
    pub width: usize,
    pub height: usize,
    pub master_seed: u64,
    pub generator: GeneratorConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            rooms: 20,
            templates: ["rect", "wide", "l_shape", "t_shape"].map(String::from).to_vec(),
            width: 1024,
            height: 512,
            master_seed: 0,
            generator: GeneratorConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn size(&self) -> PanoSize {
        PanoSize::new(self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Probability that an observed label is replaced by another class.
    pub label_flip: f64,
    pub detection: DetectionNoise,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { label_flip: 0.05, detection: DetectionNoise::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub views: ViewConfig,
    pub fit: WallFitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrfConfig {
    #[serde(flatten)]
    pub pose: PoseConfig,
    /// Side of the square library and crop images.
    pub image_size: usize,
    pub auxiliary_seed: u64,
}

impl Default for CrfConfig {
    fn default() -> Self {
        CrfConfig { pose: PoseConfig::default(), image_size: MODEL_VIEW_SIZE, auxiliary_seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub noise: NoiseConfig,
    pub layout: LayoutConfig,
    pub crf: CrfConfig,
    pub sampler: SamplerConfig,
    pub posterior: PosteriorConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_json(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.rooms == 0 {
            return Err(Error::Config("dataset needs at least one room".into()));
        }
        if self.dataset.templates.is_empty() {
            return Err(Error::Config("dataset lists no templates".into()));
        }
        for t in &self.dataset.templates {
            template_by_name(t)?;
        }
        if self.dataset.width < 16 || self.dataset.height < 8 {
            return Err(Error::Config(format!("panorama {}x{} is too small", self.dataset.width, self.dataset.height)));
        }
        if !(0.0..=1.0).contains(&self.noise.label_flip) || !(0.0..=1.0).contains(&self.noise.detection.miss_rate) {
            return Err(Error::Config("noise probabilities must lie in [0, 1]".into()));
        }
        if self.sampler.total_samples() > 0 {
            self.sampler.validate()?;
        }
        Ok(())
    }
}
