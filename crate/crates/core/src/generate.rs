//! Synthetic ground-truth rooms built from Manhattan templates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_boundary, is_simple_polygon, point_in_polygon, signed_area, Vec2};
use crate::models::ModelLibrary;
use crate::posterior::context::{context_prior, ContextWeights};
use crate::scene::{walls_from_polygon, CameraModel, ObjectClass, SceneObject, SceneParameters, REFERENCE_WALL_HEIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Vec2,
    pub end: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectSlot {
    pub class: ObjectClass,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomTemplate {
    pub name: String,
    /// Counter-clockwise wall segments around the camera at the origin.
    pub walls: Vec<Segment>,
    pub slots: Vec<ObjectSlot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub wall_height_mean: f64,
    pub wall_height_std: f64,
    /// Walls longer than this receive a length offset.
    pub offset_min_length: f64,
    pub offset_range: f64,
    pub hill_climb_steps: usize,
    /// Smallest clearance between the camera and any wall line.
    pub camera_clearance: f64,
    /// Smallest distance between an object centre and the wall polygon.
    pub object_margin: f64,
    pub placement_attempts: usize,
    pub camera_height: f64,
    /// Smallest distance between the camera and any object footprint.
    pub camera_gap: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            wall_height_mean: 2.7,
            wall_height_std: 0.2,
            offset_min_length: 0.7,
            offset_range: 0.3,
            hill_climb_steps: 50,
            camera_clearance: 1.0,
            object_margin: 0.02,
            placement_attempts: 40,
            camera_height: crate::scene::DEFAULT_CAMERA_HEIGHT,
            camera_gap: 0.5,
        }
    }
}

impl RoomTemplate {
    pub fn from_vertices(name: &str, vertices: &[(f64, f64)], slots: Vec<ObjectSlot>) -> Self {
        let n = vertices.len();
        let walls = (0..n)
            .map(|i| Segment {
                start: Vec2::new(vertices[i].0, vertices[i].1),
                end: Vec2::new(vertices[(i + 1) % n].0, vertices[(i + 1) % n].1),
            })
            .collect();
        RoomTemplate { name: name.to_string(), walls, slots }
    }

    pub fn polygon(&self) -> Vec<Vec2> {
        self.walls.iter().map(|s| s.start).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |reason: &str| Error::InvalidTemplate { name: self.name.clone(), reason: reason.to_string() };
        let n = self.walls.len();
        if n < 4 {
            return Err(err("fewer than 4 walls"));
        }
        for i in 0..n {
            if self.walls[i].end.distance(self.walls[(i + 1) % n].start) > 1e-9 {
                return Err(err("polygon is not closed"));
            }
            let d = self.walls[i].end - self.walls[i].start;
            if d.x != 0.0 && d.y != 0.0 {
                return Err(err("wall is not axis-aligned"));
            }
        }
        let poly = self.polygon();
        if !is_simple_polygon(&poly) || !crate::geometry::is_manhattan_polygon(&poly, 0.0) {
            return Err(err("polygon self-intersects or is not Manhattan"));
        }
        if signed_area(&poly) <= 0.0 {
            return Err(err("polygon must be counter-clockwise"));
        }
        if camera_clearance(&poly) <= 0.0 {
            return Err(err("camera does not see every wall"));
        }
        Ok(())
    }
}

fn slots(bed: (usize, usize), chair: (usize, usize), tv: (usize, usize), plant: (usize, usize)) -> Vec<ObjectSlot> {
    [(ObjectClass::Bed, bed), (ObjectClass::Chair, chair), (ObjectClass::Tv, tv), (ObjectClass::Plant, plant)]
        .into_iter()
        .filter(|(_, (_, max))| *max > 0)
        .map(|(class, (min, max))| ObjectSlot { class, min, max })
        .collect()
}

/// Built-in templates. Each polygon is star-shaped around the origin.
pub fn builtin_templates() -> Vec<RoomTemplate> {
    vec![
        RoomTemplate::from_vertices(
            "rect",
            &[(-2.2, -2.0), (2.6, -2.0), (2.6, 2.4), (-2.2, 2.4)],
            slots((1, 1), (1, 1), (1, 1), (1, 1)),
        ),
        RoomTemplate::from_vertices(
            "wide",
            &[(-3.0, -2.4), (3.2, -2.4), (3.2, 2.8), (-3.0, 2.8)],
            slots((1, 1), (1, 2), (1, 1), (1, 1)),
        ),
        RoomTemplate::from_vertices(
            "l_shape",
            &[(-2.5, -2.0), (3.5, -2.0), (3.5, 1.2), (1.2, 1.2), (1.2, 4.0), (-2.5, 4.0)],
            slots((1, 1), (1, 1), (1, 1), (1, 1)),
        ),
        RoomTemplate::from_vertices(
            "t_shape",
            &[(-1.3, -5.0), (1.3, -5.0), (1.3, -1.2), (3.8, -1.2), (3.8, 1.2), (-3.8, 1.2), (-3.8, -1.2), (-1.3, -1.2)],
            slots((1, 1), (1, 1), (1, 1), (0, 1)),
        ),
    ]
}

pub fn template_by_name(name: &str) -> Result<RoomTemplate> {
    builtin_templates().into_iter().find(|t| t.name == name).ok_or_else(|| Error::UnknownTemplate(name.to_string()))
}

/// Signed clearance of the origin from every wall line; positive means the
/// origin sees the whole room.
fn camera_clearance(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let normal = (b - a).normalized().perp();
            normal.dot(Vec2::ZERO - a)
        })
        .fold(f64::INFINITY, f64::min)
}

fn perturb_walls(poly: &mut [Vec2], cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) {
    let n = poly.len();
    let original: Vec<f64> = (0..n).map(|i| poly[i].distance(poly[(i + 1) % n])).collect();
    for i in 0..n {
        let delta = rng.random_range(-cfg.offset_range..=cfg.offset_range);
        // wall i grows by shifting wall i+1 along it, which also changes
        // the parallel wall i+2
        if original[i] <= cfg.offset_min_length || original[(i + 2) % n] <= cfg.offset_min_length {
            continue;
        }
        let dir = (poly[(i + 1) % n] - poly[i]).normalized();
        let mut candidate = poly.to_vec();
        candidate[(i + 1) % n] = candidate[(i + 1) % n] + dir * delta;
        candidate[(i + 2) % n] = candidate[(i + 2) % n] + dir * delta;
        let lengths_ok = (0..n).all(|k| candidate[k].distance(candidate[(k + 1) % n]) > cfg.offset_min_length);
        if lengths_ok
            && is_simple_polygon(&candidate)
            && signed_area(&candidate) > 0.0
            && camera_clearance(&candidate) >= cfg.camera_clearance
        {
            poly.copy_from_slice(&candidate);
        }
    }
}

fn sample_inside(poly: &[Vec2], margin: f64, rng: &mut ChaCha8Rng) -> Vec2 {
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    loop {
        let p = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if point_in_polygon(p, poly) && distance_to_boundary(p, poly) >= margin {
            return p;
        }
    }
}

fn admissible(o: &SceneObject, poly: &[Vec2], cfg: &GeneratorConfig) -> bool {
    let p = o.position;
    if !(point_in_polygon(p, poly) && distance_to_boundary(p, poly) >= cfg.object_margin) {
        return false;
    }
    let fp = o.footprint().corners();
    !point_in_polygon(Vec2::ZERO, &fp) && distance_to_boundary(Vec2::ZERO, &fp) >= cfg.camera_gap
}

/// Greedy local search on the context prior, one object at a time.
fn hill_climb(scene: &mut SceneParameters, cfg: &GeneratorConfig, weights: &ContextWeights) {
    let poly = scene.polygon();
    let log_prior = |s: &SceneParameters| context_prior(s, weights).map(|p| p.log_value).unwrap_or(f64::NEG_INFINITY);
    let mut pos_step = 0.5;
    let mut yaw_step = 15.0;
    let mut current = log_prior(scene);
    for _ in 0..cfg.hill_climb_steps {
        let mut improved = false;
        for j in 0..scene.objects.len() {
            let base = scene.objects[j].clone();
            let wall = &scene.walls[crate::scene::closest_wall(base.position, &scene.walls)];
            let to_wall = -wall.normal * (wall.distance_to(base.position) - cfg.object_margin).clamp(0.0, pos_step);
            let moves = [
                (to_wall, 0.0),
                (Vec2::new(pos_step, 0.0), 0.0),
                (Vec2::new(-pos_step, 0.0), 0.0),
                (Vec2::new(0.0, pos_step), 0.0),
                (Vec2::new(0.0, -pos_step), 0.0),
                (Vec2::ZERO, yaw_step),
                (Vec2::ZERO, -yaw_step),
            ];
            let mut best: Option<(f64, SceneObject)> = None;
            for (dp, dyaw) in moves {
                let mut cand = base.clone();
                cand.position = base.position + dp;
                cand.yaw_deg = crate::geometry::wrap_deg(base.yaw_deg + dyaw);
                if !admissible(&cand, &poly, cfg) {
                    continue;
                }
                scene.objects[j] = cand.clone();
                let v = log_prior(scene);
                if v > current + 1e-12 && best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, cand));
                }
            }
            match best {
                Some((v, cand)) => {
                    scene.objects[j] = cand;
                    current = v;
                    improved = true;
                }
                None => scene.objects[j] = base,
            }
        }
        if !improved {
            pos_step *= 0.5;
            yaw_step *= 0.5;
        }
    }
}

/// Generate one ground-truth room. Deterministic for a fixed seed.
pub fn generate_room(
    template: &RoomTemplate,
    seed: u64,
    cfg: &GeneratorConfig,
    library: &ModelLibrary,
) -> Result<SceneParameters> {
    template.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let height_dist = Normal::new(cfg.wall_height_mean, cfg.wall_height_std)
        .map_err(|e| Error::Config(format!("wall height distribution: {e}")))?;
    let mut wall_height = height_dist.sample(&mut rng);
    while wall_height <= cfg.camera_height + 0.1 {
        wall_height = height_dist.sample(&mut rng);
    }
    // store the height as an exact multiple of the scale
    let lambda = wall_height / REFERENCE_WALL_HEIGHT;
    let wall_height = REFERENCE_WALL_HEIGHT * lambda;

    let mut poly = template.polygon();
    perturb_walls(&mut poly, cfg, &mut rng);

    let mut counts = Vec::new();
    for slot in &template.slots {
        let k = rng.random_range(slot.min..=slot.max);
        for _ in 0..k {
            counts.push(library.for_class(slot.class)?.id.clone());
        }
    }

    let weights = ContextWeights::default();
    let base = SceneParameters {
        camera: CameraModel { height: cfg.camera_height },
        lambda,
        walls: walls_from_polygon(&poly, wall_height),
        objects: Vec::new(),
    };
    let mut models = counts;
    loop {
        for _ in 0..cfg.placement_attempts {
            let mut scene = base.clone();
            for id in &models {
                let mut object = None;
                for _ in 0..1000 {
                    let p = sample_inside(&poly, 0.6, &mut rng);
                    let yaw = rng.random_range(0.0..360.0);
                    let o = SceneObject::from_library(library, id, p, yaw)?;
                    let ok = admissible(&o, &poly, cfg);
                    object = Some(o);
                    if ok {
                        break;
                    }
                }
                let object = object.expect("at least one draw");
                scene.objects.push(object);
            }
            hill_climb(&mut scene, cfg, &weights);
            if crate::posterior::context::context_cost_oo(&scene) <= 1e-9 {
                scene.validate()?;
                return Ok(scene);
            }
        }
        // crowded room: drop the last object and retry
        models.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(name: &str, seed: u64) -> SceneParameters {
        generate_room(&template_by_name(name).unwrap(), seed, &GeneratorConfig::default(), &ModelLibrary::default())
            .unwrap()
    }

    #[test]
    fn deterministic_for_seed() {
        let a = gen("l_shape", 42);
        let b = gen("l_shape", 42);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.walls.len(), 6);
        assert_ne!(a.to_json(), gen("l_shape", 43).to_json());
    }

    #[test]
    fn rectangle_stays_manhattan() {
        let s = gen("rect", 5);
        assert_eq!(s.walls.len(), 4);
        for a in &s.walls {
            for b in &s.walls {
                let ang = (a.orientation_deg() - b.orientation_deg()).abs();
                assert!(ang < 1e-9 || (ang - 90.0).abs() < 1e-9, "{ang}");
            }
        }
    }

    #[test]
    fn generated_rooms_are_valid_and_objects_hug_walls() {
        for (i, t) in builtin_templates().iter().enumerate() {
            for seed in 0..5 {
                let s = generate_room(t, seed * 31 + i as u64, &GeneratorConfig::default(), &ModelLibrary::default())
                    .unwrap();
                s.validate().unwrap();
                assert!(!s.objects.is_empty());
                assert!(crate::posterior::context::context_cost_oo(&s) <= 1e-9);
                for o in &s.objects {
                    let d = s.walls[crate::scene::closest_wall(o.position, &s.walls)].distance_to(o.position);
                    assert!(d < 0.3, "{} at {d} m from its wall", o.class);
                }
            }
        }
    }

    #[test]
    fn wall_height_statistics() {
        let t = template_by_name("rect").unwrap();
        let mut cfg = GeneratorConfig::default();
        cfg.hill_climb_steps = 0;
        let heights: Vec<f64> = (0..1000)
            .map(|s| {
                let mut t = t.clone();
                t.slots.clear();
                generate_room(&t, s, &cfg, &ModelLibrary::default()).unwrap().walls[0].height
            })
            .collect();
        let mean = heights.iter().sum::<f64>() / heights.len() as f64;
        let std = (heights.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (heights.len() - 1) as f64).sqrt();
        assert!((mean - 2.7).abs() <= 0.05, "mean {mean}");
        assert!((std - 0.2).abs() <= 0.05, "std {std}");
    }

    #[test]
    fn short_walls_keep_their_length() {
        let short = RoomTemplate::from_vertices(
            "notch",
            &[(-2.0, -2.0), (2.0, -2.0), (2.0, 1.5), (1.5, 1.5), (1.5, 2.0), (-2.0, 2.0)],
            vec![],
        );
        short.validate().unwrap();
        for seed in 0..50 {
            let s = generate_room(&short, seed, &GeneratorConfig::default(), &ModelLibrary::default()).unwrap();
            for (w, t) in s.walls.iter().zip(&short.walls) {
                let orig = t.start.distance(t.end);
                if orig <= 0.7 {
                    assert!((w.length() - orig).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_templates_are_rejected() {
        let mut open = template_by_name("rect").unwrap();
        open.walls[2].end = Vec2::new(0.0, 9.0);
        assert!(matches!(open.validate(), Err(Error::InvalidTemplate { .. })));
        let bowtie = RoomTemplate {
            name: "bowtie".into(),
            walls: vec![
                Segment { start: Vec2::new(-1.0, -1.0), end: Vec2::new(1.0, -1.0) },
                Segment { start: Vec2::new(1.0, -1.0), end: Vec2::new(1.0, 1.0) },
                Segment { start: Vec2::new(1.0, 1.0), end: Vec2::new(-1.0, 1.0) },
                Segment { start: Vec2::new(-1.0, 1.0), end: Vec2::new(-1.0, -3.0) },
                Segment { start: Vec2::new(-1.0, -3.0), end: Vec2::new(-1.0, -1.0) },
            ],
            slots: vec![],
        };
        assert!(bowtie.validate().is_err());
        assert!(matches!(template_by_name("castle"), Err(Error::UnknownTemplate(_))));
    }
}
