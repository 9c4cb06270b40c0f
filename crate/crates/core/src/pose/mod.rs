//! Object orientation from HOG retrieval over a rendered pose library,
//! smoothed by a CRF over target and auxiliary images.

pub mod crf;
pub mod hog;
pub mod labels;
pub mod library;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, Vec2};
use crate::models::{Model, ModelLibrary};
use crate::render::{render_model_framed, Framing, GrayView, MODEL_FILL};
use crate::scene::{ObjectClass, SceneObject};
use crf::{trws_infer, Crf, Edge, Pairwise, TrwsResult};
use hog::{hog, HogDescriptor};
use labels::{angle_distance, PoseLabel, LABEL_COUNT};
use library::{Neighbor, PoseLibrary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoseConfig {
    pub knn: usize,
    pub gamma_deg: f64,
    pub iterations: usize,
    pub graph_neighbors: usize,
    pub auxiliary_per_class: usize,
    pub binary_weight: f64,
    pub aux_scale_jitter: f64,
    pub aux_shift_jitter: f64,
    pub aux_noise_sigma: f64,
}

impl Default for PoseConfig {
    fn default() -> Self {
        PoseConfig {
            knn: 6,
            gamma_deg: 20.0,
            iterations: 100,
            graph_neighbors: 4,
            auxiliary_per_class: 60,
            binary_weight: 0.0,
            aux_scale_jitter: 0.15,
            aux_shift_jitter: 0.08,
            aux_noise_sigma: 5.0 / 255.0,
        }
    }
}

/// `exp(-n)` per label, n counting neighbours rendered at that label.
pub fn unary_energy(neighbors: &[Neighbor], library: &PoseLibrary) -> Vec<f64> {
    let mut counts = vec![0u32; LABEL_COUNT];
    for n in neighbors {
        counts[library.entries[n.index].pose.index()] += 1;
    }
    counts.into_iter().map(|c| (-(c as f64)).exp()).collect()
}

pub fn binary_energy(di: &HogDescriptor, dj: &HogDescriptor, li: PoseLabel, lj: PoseLabel, gamma: f64) -> f64 {
    angle_distance(li, lj, gamma).1 * di.distance(dj)
}

pub const TIE_BREAK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PoseNode {
    pub descriptor: HogDescriptor,
    pub unary: Vec<f64>,
    /// Rank of the first neighbour at each label, `knn` where none.
    pub rank: Vec<usize>,
    pub is_target: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseGraph {
    pub class: ObjectClass,
    pub nodes: Vec<PoseNode>,
    /// `(a, b, hog distance)` with `a < b`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl PoseGraph {
    /// Targets first, then auxiliary images; edges join every node to its
    /// nearest descriptors, then components are bridged by their closest pair.
    pub fn build(
        class: ObjectClass,
        targets: &[HogDescriptor],
        auxiliary: &[HogDescriptor],
        library: &PoseLibrary,
        cfg: &PoseConfig,
    ) -> Result<Self> {
        let descriptors: Vec<&HogDescriptor> = targets.iter().chain(auxiliary).collect();
        let nodes = descriptors
            .par_iter()
            .enumerate()
            .map(|(i, d)| {
                let nn = library.knn(d, class, cfg.knn)?;
                let mut rank = vec![nn.len(); LABEL_COUNT];
                for (r, n) in nn.iter().enumerate().rev() {
                    rank[library.entries[n.index].pose.index()] = r;
                }
                Ok(PoseNode {
                    descriptor: (*d).clone(),
                    unary: unary_energy(&nn, library),
                    rank,
                    is_target: i < targets.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = nodes.len();
        let dist: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| descriptors[i].distance(descriptors[j])).collect()).collect();
        let mut edges = std::collections::BTreeMap::new();
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
            for &j in others.iter().take(cfg.graph_neighbors) {
                edges.insert((i.min(j), i.max(j)), dist[i][j]);
            }
        }
        // bridge components
        loop {
            let comp = components(n, edges.keys().copied());
            let count = comp.iter().copied().max().map_or(0, |m| m + 1);
            if count <= 1 {
                break;
            }
            let mut best = (f64::INFINITY, 0, 0);
            for i in (0..n).filter(|&i| comp[i] == 0) {
                for j in (0..n).filter(|&j| comp[j] != 0) {
                    if dist[i][j] < best.0 {
                        best = (dist[i][j], i, j);
                    }
                }
            }
            edges.insert((best.1.min(best.2), best.1.max(best.2)), best.0);
        }
        Ok(PoseGraph { class, nodes, edges: edges.into_iter().map(|((a, b), d)| (a, b, d)).collect() })
    }

    /// Equal neighbour counts are broken in favour of the closer neighbour.
    pub fn to_crf(&self, cfg: &PoseConfig) -> Crf {
        Crf {
            unaries: self
                .nodes
                .iter()
                .map(|n| n.unary.iter().zip(&n.rank).map(|(u, &r)| u + TIE_BREAK * r as f64).collect())
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b, d)| Edge {
                    a,
                    b,
                    potential: Pairwise::TruncatedPose { weight: cfg.binary_weight * d, gamma: cfg.gamma_deg },
                })
                .collect(),
        }
    }
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            label[r]
        })
        .collect()
}

/// Perturbed renders standing in for unlabelled images of a class.
pub fn auxiliary_views(
    models: &ModelLibrary,
    class: ObjectClass,
    count: usize,
    size: usize,
    seed: u64,
    cfg: &PoseConfig,
) -> Result<Vec<GrayView>> {
    let candidates: Vec<_> = models.models.iter().filter(|m| m.class == class).collect();
    if candidates.is_empty() {
        return Err(Error::Config(format!("no models of class {class}")));
    }
    let noise = Normal::new(0.0, cfg.aux_noise_sigma.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<_> = (0..count)
        .map(|_| {
            let model = candidates[rng.random_range(0..candidates.len())];
            let yaw = rng.random_range(0.0..360.0);
            let pitch = rng.random_range(0.0..labels::MAX_PITCH_DEG);
            let fill = MODEL_FILL * (1.0 + rng.random_range(-cfg.aux_scale_jitter..=cfg.aux_scale_jitter));
            let j = cfg.aux_shift_jitter;
            let shift = (rng.random_range(-j..=j), rng.random_range(-j..=j));
            (model, yaw, pitch, Framing { fill, shift }, rng.random::<u64>())
        })
        .collect();
    Ok(specs
        .into_par_iter()
        .map(|(model, yaw, pitch, framing, s)| {
            let mut img = render_model_framed(model, yaw, pitch, size, size, framing).image;
            let mut r = ChaCha8Rng::seed_from_u64(s);
            img.data.iter_mut().for_each(|v| *v = (*v + noise.sample(&mut r) as f32).clamp(0.0, 1.0));
            img
        })
        .collect())
}

/// Library, per-class auxiliary descriptors and configuration shared by all rooms.
#[derive(Debug, Clone)]
pub struct PoseContext {
    pub library: PoseLibrary,
    pub auxiliary: Vec<(ObjectClass, Vec<HogDescriptor>)>,
    pub config: PoseConfig,
}

impl PoseContext {
    pub fn build(models: &ModelLibrary, library: PoseLibrary, config: PoseConfig, seed: u64) -> Result<Self> {
        let mut auxiliary = Vec::new();
        for (k, class) in ObjectClass::ALL.into_iter().filter(|c| c.has_orientation()).enumerate() {
            let views = auxiliary_views(
                models,
                class,
                config.auxiliary_per_class,
                library.image_size,
                seed.wrapping_add(k as u64),
                &config,
            )?;
            auxiliary.push((class, views.iter().map(hog).collect::<Result<Vec<_>>>()?));
        }
        Ok(PoseContext { library, auxiliary, config })
    }

    fn auxiliary_for(&self, class: ObjectClass) -> &[HogDescriptor] {
        self.auxiliary.iter().find(|(c, _)| *c == class).map_or(&[], |(_, d)| d.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct PoseEstimate {
    /// Relative pose per target; `None` for classes without orientation.
    pub poses: Vec<Option<PoseLabel>>,
    pub runs: Vec<(ObjectClass, TrwsResult)>,
}

/// MAP relative pose of every target crop, one CRF per class.
pub fn estimate_object_poses(
    classes: &[ObjectClass],
    crops: &[HogDescriptor],
    ctx: &PoseContext,
) -> Result<PoseEstimate> {
    let mut poses = vec![None; classes.len()];
    let mut runs = Vec::new();
    for class in ObjectClass::ALL.into_iter().filter(|c| c.has_orientation()) {
        let members: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        let targets: Vec<HogDescriptor> = members.iter().map(|&i| crops[i].clone()).collect();
        let graph = PoseGraph::build(class, &targets, ctx.auxiliary_for(class), &ctx.library, &ctx.config)?;
        let result = trws_infer(&graph.to_crf(&ctx.config), ctx.config.iterations)?;
        for (slot, &i) in members.iter().enumerate() {
            poses[i] = Some(PoseLabel::from_index(result.labels[slot]));
        }
        runs.push((class, result));
    }
    Ok(PoseEstimate { poses, runs })
}

/// Continuous pose of an object relative to the camera ray: yaw measured
/// from facing the camera, pitch as the downward viewing angle.
pub fn relative_pose(object: &SceneObject, model: &Model, camera_height: f64) -> (f64, f64) {
    let bearing = object.position.angle_deg();
    let yaw = wrap_deg(object.yaw_deg - bearing - 180.0);
    let pitch = (camera_height - model.centroid()[2]).atan2(object.position.norm()).to_degrees();
    (yaw, pitch)
}

/// World yaw of an object at `position` whose relative yaw is `relative_yaw`.
pub fn absolute_yaw(relative_yaw: f64, position: Vec2) -> f64 {
    wrap_deg(relative_yaw + position.angle_deg() + 180.0)
}

/// Descriptor distance between a crop and the library view at `pose`.
pub fn orientation_cost(crop: &HogDescriptor, library: &PoseLibrary, model_id: &str, pose: PoseLabel) -> Result<f64> {
    library
        .view_at(model_id, pose)
        .map(|e| crop.distance(&e.descriptor))
        .ok_or_else(|| Error::UnknownModel(model_id.to_string()))
}
