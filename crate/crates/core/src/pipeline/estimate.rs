//! Per-room estimation: layout, object poses, then posterior sampling.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{derive_seed, load_room, write_text, Manifest, Observation};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::layout_init::{estimate_layout, initial_hypothesis, LayoutEstimate};
use crate::models::ModelLibrary;
use crate::pose::library::PoseLibrary;
use crate::pose::{absolute_yaw, estimate_object_poses, PoseContext};
use crate::posterior::{Evaluator, PosteriorBreakdown};
use crate::sampler::{run_map, MapResult};
use crate::scene::{CameraModel, SceneParameters};

pub const INIT_FILE: &str = "init.json";
pub const FINAL_FILE: &str = "final.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const STATUS_FILE: &str = "status.json";

/// Shared, read-only state for estimating many rooms.
pub struct Estimator {
    pub models: ModelLibrary,
    pub pose: PoseContext,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RoomEstimate {
    pub layout: LayoutEstimate,
    pub init: SceneParameters,
    pub init_score: PosteriorBreakdown,
    pub result: SceneParameters,
    pub result_score: PosteriorBreakdown,
    pub map: Option<MapResult>,
}

impl Estimator {
    pub fn new(config: RunConfig, models: ModelLibrary) -> Result<Self> {
        let library = PoseLibrary::build(&models, config.crf.image_size)?;
        let pose = PoseContext::build(&models, library, config.crf.pose, config.crf.auxiliary_seed)?;
        Ok(Estimator { models, pose, config })
    }

    pub fn camera(&self) -> CameraModel {
        CameraModel { height: self.config.dataset.generator.camera_height }
    }

    /// Initial hypothesis: fitted walls, detections on their rays, CRF poses.
    pub fn initialize(&self, obs: &Observation) -> Result<(LayoutEstimate, SceneParameters)> {
        let camera = self.camera();
        let layout = estimate_layout(&obs.pano, &camera, &self.config.layout.views, &self.config.layout.fit)?;
        let mut init = initial_hypothesis(&layout.walls, &obs.detections, camera, &self.models)?;
        let bundle = obs.bundle()?;
        let oriented: Vec<usize> = (0..bundle.crops.len()).filter(|&i| bundle.crops[i].is_some()).collect();
        let classes: Vec<_> = oriented.iter().map(|&i| obs.detections[i].class).collect();
        let crops: Vec<_> = oriented.iter().filter_map(|&i| bundle.crops[i].clone()).collect();
        let poses = estimate_object_poses(&classes, &crops, &self.pose)?;
        for (slot, &i) in oriented.iter().enumerate() {
            if let Some(p) = poses.poses[slot] {
                let o = &mut init.objects[i];
                o.yaw_deg = absolute_yaw(p.yaw_deg, o.position);
            }
        }
        Ok((layout, init))
    }

    /// Full estimate; `seed` drives the sampler.
    pub fn estimate(&self, obs: &Observation, seed: u64) -> Result<RoomEstimate> {
        let (layout, init) = self.initialize(obs)?;
        let bundle = obs.bundle()?;
        let evaluator = Evaluator::new(&bundle, &init.walls, &self.models, &self.pose.library, self.config.posterior)?;
        let init_score = evaluator.evaluate(&init)?;
        let sampler = crate::sampler::SamplerConfig { master_seed: seed, ..self.config.sampler };
        if sampler.total_samples() == 0 {
            return Ok(RoomEstimate {
                layout,
                result: init.clone(),
                init,
                init_score,
                result_score: init_score,
                map: None,
            });
        }
        let map = run_map(&evaluator, &init, &sampler)?;
        Ok(RoomEstimate {
            layout,
            result: map.best.clone(),
            result_score: map.breakdown,
            init,
            init_score,
            map: Some(map),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomStatus {
    pub id: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init_log_posterior: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_log_posterior: Option<f64>,
}

fn estimate_one(est: &Estimator, dataset: &Path, out: &Path, id: &str, seed: u64) -> Result<RoomEstimate> {
    let (_, obs) = load_room(&dataset.join(id), &est.models)?;
    let r = est.estimate(&obs, derive_seed(seed, 3))?;
    let dir = out.join(id);
    write_text(&dir.join(INIT_FILE), &r.init.to_json())?;
    write_text(&dir.join(FINAL_FILE), &r.result.to_json())?;
    if let Some(map) = &r.map {
        write_text(&dir.join(TRACE_FILE), &map.trace_csv())?;
    }
    Ok(r)
}

/// Estimate every room of a dataset. Failing rooms are recorded and skipped.
pub fn estimate_dataset(dataset: &Path, out: &Path, est: &Estimator) -> Result<Vec<RoomStatus>> {
    let manifest = Manifest::load(dataset)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let status: Vec<RoomStatus> = manifest
        .rooms
        .par_iter()
        .map(|room| match estimate_one(est, dataset, out, &room.id, room.seed) {
            Ok(r) => RoomStatus {
                id: room.id.clone(),
                ok: true,
                error: None,
                init_log_posterior: Some(r.init_score.log_posterior),
                final_log_posterior: Some(r.result_score.log_posterior),
            },
            Err(e) => RoomStatus {
                id: room.id.clone(),
                ok: false,
                error: Some(e.to_string()),
                init_log_posterior: None,
                final_log_posterior: None,
            },
        })
        .collect();
    write_text(&out.join(STATUS_FILE), &(serde_json::to_string_pretty(&status).expect("status serializes") + "\n"))?;
    Ok(status)
}
