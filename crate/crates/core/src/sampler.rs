//! Best-of-samples MAP search over object poses and global scale.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, Vec2};
use crate::posterior::{Evaluator, PosteriorBreakdown, CSV_HEADER};
use crate::scene::{SceneParameters, REFERENCE_WALL_HEIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub epochs: usize,
    pub samples_per_epoch: usize,
    /// Total sample count; overrides `epochs`, keeping the epoch size.
    pub total_override: Option<usize>,
    /// Location standard deviation along the camera ray, as a fraction of the camera distance.
    pub loc_sigma_along: f64,
    /// Location standard deviation across the camera ray, as a fraction of the camera distance.
    pub loc_sigma_perp: f64,
    /// Orientation standard deviation in radians.
    pub orient_sigma: f64,
    /// Wall-height interval in metres from which the scale is drawn.
    pub scale_range: (f64, f64),
    pub master_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            epochs: 8,
            samples_per_epoch: 25,
            total_override: None,
            loc_sigma_along: 0.1,
            loc_sigma_perp: 0.005,
            orient_sigma: 0.1,
            scale_range: (2.0, 3.5),
            master_seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn total_samples(&self) -> usize {
        self.total_override.unwrap_or(self.epochs * self.samples_per_epoch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_samples() == 0 || self.samples_per_epoch == 0 {
            return Err(Error::Config("sampler needs at least one sample per epoch".into()));
        }
        if !(self.loc_sigma_along >= 0.0 && self.loc_sigma_perp >= 0.0 && self.orient_sigma >= 0.0) {
            return Err(Error::Config("sampler deviations must be non-negative".into()));
        }
        if !(self.scale_range.0 > 0.0 && self.scale_range.0 < self.scale_range.1) {
            return Err(Error::Config(format!("invalid wall-height range {:?}", self.scale_range)));
        }
        Ok(())
    }
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("validated deviation")
}

/// One independent draw around `current`, reproducible from `(master_seed, sample_seed)`.
pub fn propose(current: &SceneParameters, cfg: &SamplerConfig, sample_seed: u64) -> SceneParameters {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(sample_seed);
    let unit = normal(1.0);
    let mut next = current.clone();
    for o in &mut next.objects {
        let d = o.position.norm();
        let ray = if d > 1e-9 { o.position * (1.0 / d) } else { Vec2::new(1.0, 0.0) };
        let along = unit.sample(&mut rng) * cfg.loc_sigma_along * d;
        let across = unit.sample(&mut rng) * cfg.loc_sigma_perp * d;
        o.position = o.position + ray * along + ray.perp() * across;
        o.yaw_deg = wrap_deg(o.yaw_deg + (unit.sample(&mut rng) * cfg.orient_sigma).to_degrees());
    }
    let height = rng.random_range(cfg.scale_range.0..=cfg.scale_range.1);
    next.with_lambda(height / REFERENCE_WALL_HEIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub index: usize,
    pub seed: u64,
    pub lambda: f64,
    pub breakdown: PosteriorBreakdown,
}

#[derive(Debug, Clone)]
pub struct MapResult {
    pub best: SceneParameters,
    pub breakdown: PosteriorBreakdown,
    pub initial: PosteriorBreakdown,
    pub trace: Vec<TraceRow>,
}

impl MapResult {
    pub fn trace_csv(&self) -> String {
        let mut out = format!("epoch,index,{CSV_HEADER}\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{}", r.epoch, r.index, r.breakdown.csv_row(r.seed, r.lambda));
        }
        out
    }
}

/// Epochs of proposals around a seed hypothesis. Each epoch's highest-prior
/// sample seeds the next; the highest-posterior hypothesis seen, the
/// initial one included, is returned.
pub fn run_map(evaluator: &Evaluator<'_>, init: &SceneParameters, cfg: &SamplerConfig) -> Result<MapResult> {
    cfg.validate()?;
    let initial = evaluator.evaluate(init)?;
    let mut best = (init.clone(), initial);
    let mut seed_scene = init.clone();
    let mut trace = Vec::with_capacity(cfg.total_samples());
    let total = cfg.total_samples();
    let mut epoch = 0;
    let mut start = 0;
    while start < total {
        let end = (start + cfg.samples_per_epoch).min(total);
        let scored = (start..end)
            .into_par_iter()
            .map(|k| {
                let h = propose(&seed_scene, cfg, k as u64);
                let b = evaluator.evaluate(&h)?;
                Ok((h, b))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut seed_pick: Option<(usize, f64)> = None;
        for (i, (h, b)) in scored.iter().enumerate() {
            let k = start + i;
            trace.push(TraceRow { epoch, index: i, seed: k as u64, lambda: h.lambda, breakdown: *b });
            if b.log_posterior > best.1.log_posterior {
                best = (h.clone(), *b);
            }
            let p = b.log_prior(&evaluator.config);
            if seed_pick.is_none_or(|(_, bp)| p > bp) {
                seed_pick = Some((i, p));
            }
        }
        if let Some((i, _)) = seed_pick {
            seed_scene = scored[i].0.clone();
        }
        start = end;
        epoch += 1;
    }
    Ok(MapResult { best: best.0, breakdown: best.1, initial, trace })
}
