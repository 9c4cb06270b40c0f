//! Top-down context prior: object-to-wall distance and alignment, and
//! pairwise footprint overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::footprint_intersection_area;
use crate::scene::{closest_wall, SceneParameters};

/// How the object/wall normal agreement enters the object-to-wall cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentTerm {
    /// `|n_o · n_w|`, penalizing objects that face along the wall normal.
    AsWritten,
    /// `1 - |n_o · n_w|`, rewarding objects square to their wall.
    #[default]
    RewardParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContextWeights {
    /// Weight of the overlap term.
    pub mu: f64,
    /// Weight of the alignment term.
    pub nu_n: f64,
    pub alignment: AlignmentTerm,
}

impl Default for ContextWeights {
    fn default() -> Self {
        ContextWeights { mu: 0.25, nu_n: 10.0, alignment: AlignmentTerm::RewardParallel }
    }
}

pub fn context_cost_ow(scene: &SceneParameters, nu_n: f64, alignment: AlignmentTerm) -> Result<f64> {
    if scene.walls.is_empty() {
        return Err(Error::Config("object-to-wall cost needs at least one wall".into()));
    }
    let mut distance = 0.0;
    let mut align = 0.0;
    for o in &scene.objects {
        let w = &scene.walls[closest_wall(o.position, &scene.walls)];
        distance += w.distance_to(o.position);
        let dot = o.normal().dot(w.normal).abs();
        align += match alignment {
            AlignmentTerm::AsWritten => dot,
            AlignmentTerm::RewardParallel => 1.0 - dot,
        };
    }
    Ok(distance + nu_n * align)
}

/// Sum of footprint overlaps over unordered object pairs.
pub fn context_cost_oo(scene: &SceneParameters) -> f64 {
    let fps: Vec<_> = scene.objects.iter().map(|o| o.footprint()).collect();
    let mut total = 0.0;
    for j in 0..fps.len() {
        for k in (j + 1)..fps.len() {
            total += footprint_intersection_area(&fps[j], &fps[k]);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextPrior {
    pub e_ow: f64,
    pub e_oo: f64,
    /// `-(e_ow + mu * e_oo)`.
    pub log_value: f64,
}

impl ContextPrior {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

pub fn context_prior(scene: &SceneParameters, weights: &ContextWeights) -> Result<ContextPrior> {
    let e_ow = context_cost_ow(scene, weights.nu_n, weights.alignment)?;
    let e_oo = context_cost_oo(scene);
    Ok(ContextPrior { e_ow, e_oo, log_value: -(e_ow + weights.mu * e_oo) })
}
