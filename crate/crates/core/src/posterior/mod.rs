//! Scoring of scene hypotheses against an observed panorama.

pub mod context;
pub mod surface;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout_init::{rasterize_detections, Detection};
use crate::models::ModelLibrary;
use crate::pose::hog::HogDescriptor;
use crate::pose::labels::PoseLabel;
use crate::pose::library::PoseLibrary;
use crate::pose::{orientation_cost, relative_pose};
use crate::render::{Mask, OrientationPanorama};
use crate::scene::SceneParameters;
use context::{context_prior, ContextWeights};
use surface::{surface_cost, SurfaceScorer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosteriorConfig {
    pub surface_weight: f64,
    pub orientation_weight: f64,
    pub prior_weight: f64,
    /// Average orientation costs over objects instead of summing them.
    pub average_orientation: bool,
    pub context: ContextWeights,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        PosteriorConfig {
            surface_weight: 100.0,
            orientation_weight: 1.0,
            prior_weight: 1.0,
            average_orientation: true,
            context: ContextWeights::default(),
        }
    }
}

impl PosteriorConfig {
    /// All three terms weighted equally.
    pub fn unit() -> Self {
        PosteriorConfig { surface_weight: 1.0, orientation_weight: 1.0, prior_weight: 1.0, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBreakdown {
    pub e_s: f64,
    pub e_o: f64,
    pub e_ow: f64,
    pub e_oo: f64,
    pub log_posterior: f64,
}

pub const CSV_HEADER: &str = "seed,lambda,e_s,e_o,e_ow,e_oo,log_posterior";

impl PosteriorBreakdown {
    pub fn combine(e_s: f64, e_o: f64, e_ow: f64, e_oo: f64, cfg: &PosteriorConfig) -> Self {
        let log_posterior = -(cfg.surface_weight * e_s
            + cfg.orientation_weight * e_o
            + cfg.prior_weight * (e_ow + cfg.context.mu * e_oo));
        PosteriorBreakdown { e_s, e_o, e_ow, e_oo, log_posterior }
    }

    /// Log of the context prior alone.
    pub fn log_prior(&self, cfg: &PosteriorConfig) -> f64 {
        -(self.e_ow + cfg.context.mu * self.e_oo)
    }

    pub fn csv_row(&self, seed: u64, lambda: f64) -> String {
        format!("{seed},{lambda},{},{},{},{},{}", self.e_s, self.e_o, self.e_ow, self.e_oo, self.log_posterior)
    }
}

/// Observed panorama, detections and one crop descriptor per detection
/// (`None` where orientation is not estimated).
#[derive(Debug, Clone)]
pub struct ObservedBundle {
    pub pano: OrientationPanorama,
    pub mask: Mask,
    pub detections: Vec<Detection>,
    pub crops: Vec<Option<HogDescriptor>>,
}

impl ObservedBundle {
    pub fn new(pano: OrientationPanorama, detections: Vec<Detection>, crops: Vec<Option<HogDescriptor>>) -> Self {
        let mask = rasterize_detections(&detections, pano.size);
        ObservedBundle { pano, mask, detections, crops }
    }
}

/// Mean (or sum) of crop-to-library descriptor distances at each object's pose.
pub fn orientation_term(
    crops: &[Option<HogDescriptor>],
    hypothesis: &SceneParameters,
    models: &ModelLibrary,
    poses: &PoseLibrary,
    average: bool,
) -> Result<f64> {
    if crops.len() != hypothesis.objects.len() {
        return Err(Error::Config(format!(
            "{} crops for {} hypothesis objects",
            crops.len(),
            hypothesis.objects.len()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (crop, object) in crops.iter().zip(&hypothesis.objects) {
        let Some(crop) = crop else { continue };
        if !object.class.has_orientation() {
            continue;
        }
        let (yaw, pitch) = relative_pose(object, models.get(&object.model_id)?, hypothesis.camera.height);
        total += orientation_cost(crop, poses, &object.model_id, PoseLabel::quantize(yaw, pitch))?;
        count += 1;
    }
    Ok(if average && count > 0 { total / count as f64 } else { total })
}

pub fn log_posterior(
    bundle: &ObservedBundle,
    hypothesis: &SceneParameters,
    models: &ModelLibrary,
    poses: &PoseLibrary,
    cfg: &PosteriorConfig,
) -> Result<PosteriorBreakdown> {
    let e_s = surface_cost(&bundle.pano, &bundle.mask, hypothesis, models)?;
    let e_o = orientation_term(&bundle.crops, hypothesis, models, poses, cfg.average_orientation)?;
    let prior = context_prior(hypothesis, &cfg.context)?;
    Ok(PosteriorBreakdown::combine(e_s, e_o, prior.e_ow, prior.e_oo, cfg))
}

/// Reusable scorer for many hypotheses sharing one wall outline.
pub struct Evaluator<'a> {
    pub bundle: &'a ObservedBundle,
    pub models: &'a ModelLibrary,
    pub poses: &'a PoseLibrary,
    pub config: PosteriorConfig,
    surface: SurfaceScorer,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        bundle: &'a ObservedBundle,
        walls: &[crate::scene::Wall],
        models: &'a ModelLibrary,
        poses: &'a PoseLibrary,
        config: PosteriorConfig,
    ) -> Result<Self> {
        let surface = SurfaceScorer::new(&bundle.pano, &bundle.mask, walls)?;
        Ok(Evaluator { bundle, models, poses, config, surface })
    }

    pub fn evaluate(&self, hypothesis: &SceneParameters) -> Result<PosteriorBreakdown> {
        let e_s = self.surface.score(hypothesis, self.models)?;
        let e_o =
            orientation_term(&self.bundle.crops, hypothesis, self.models, self.poses, self.config.average_orientation)?;
        let prior = context_prior(hypothesis, &self.config.context)?;
        Ok(PosteriorBreakdown::combine(e_s, e_o, prior.e_ow, prior.e_oo, &self.config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_room, template_by_name, GeneratorConfig};
    use crate::projection::PanoSize;
    use crate::render::render_orientation_pano;

    #[test]
    fn breakdown_arithmetic() {
        let b = PosteriorBreakdown::combine(0.2, 0.3, 1.0, 4.0, &PosteriorConfig::unit());
        assert!((b.log_posterior + 2.5).abs() < 1e-12);
        assert!((b.log_prior(&PosteriorConfig::unit()) + 2.0).abs() < 1e-12);
        assert!((b.log_prior(&PosteriorConfig::unit()).exp() - 0.1353).abs() < 1e-4);
        assert_eq!(b.csv_row(7, 1.1), "7,1.1,0.2,0.3,1,4,-2.5");
        assert_eq!(CSV_HEADER.split(',').count(), b.csv_row(0, 1.0).split(',').count());
    }

    #[test]
    fn ranking_is_shift_invariant() {
        let cfg = PosteriorConfig::unit();
        let scores: Vec<f64> = [(0.1, 0.2, 0.3, 0.0), (0.3, 0.1, 0.0, 1.0), (0.0, 0.5, 0.2, 0.2)]
            .iter()
            .map(|&(a, b, c, d)| PosteriorBreakdown::combine(a, b, c, d, &cfg).log_posterior)
            .collect();
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
        let shifted: Vec<f64> = scores.iter().map(|s| s + 123.0).collect();
        assert_eq!(argmax(&scores), argmax(&shifted));
    }

    #[test]
    fn ground_truth_beats_scaled_variants() {
        let models = ModelLibrary::default();
        let poses = PoseLibrary::build(&models, 32).unwrap();
        let size = PanoSize::new(256, 128);
        let scene =
            generate_room(&template_by_name("l_shape").unwrap(), 4, &GeneratorConfig::default(), &models).unwrap();
        let pano = render_orientation_pano(&scene, size);
        let bundle = ObservedBundle::new(pano, vec![], vec![None; scene.objects.len()]);
        let cfg = PosteriorConfig::default();
        let truth = log_posterior(&bundle, &scene, &models, &poses, &cfg).unwrap();
        assert_eq!(truth.e_s, 0.0);
        let eval = Evaluator::new(&bundle, &scene.walls, &models, &poses, cfg).unwrap();
        assert_eq!(eval.evaluate(&scene).unwrap(), truth);
        for k in -6..=6 {
            if k == 0 {
                continue;
            }
            let variant = scene.with_lambda(scene.lambda + 0.05 * k as f64);
            assert!(eval.evaluate(&variant).unwrap().log_posterior < truth.log_posterior);
        }
    }
}
