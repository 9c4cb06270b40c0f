//! Scene hypothesis: camera, global scale, Manhattan walls and objects.
//!
//! Coordinates are right-handed with the floor at z = 0 and the camera
//! above the origin. Panorama azimuth 0° looks along +x.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    is_manhattan_polygon, is_simple_polygon, point_in_polygon, point_segment_distance, signed_area, wrap_deg,
    OrientedRect, Vec2,
};
use crate::models::ModelLibrary;

/// Wall height represented by a unit global scale.
pub const REFERENCE_WALL_HEIGHT: f64 = 2.5;
pub const DEFAULT_CAMERA_HEIGHT: f64 = 1.70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Bed,
    Chair,
    Tv,
    Plant,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [ObjectClass::Bed, ObjectClass::Chair, ObjectClass::Tv, ObjectClass::Plant];

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Bed => "bed",
            ObjectClass::Chair => "chair",
            ObjectClass::Tv => "tv",
            ObjectClass::Plant => "plant",
        }
    }

    /// Rotationally symmetric classes carry no orientation.
    pub fn has_orientation(self) -> bool {
        self != ObjectClass::Plant
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub height: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel { height: DEFAULT_CAMERA_HEIGHT }
    }
}

impl CameraModel {
    pub fn position(&self) -> Vec2 {
        Vec2::ZERO
    }
}

/// Which Manhattan axis a wall's normal follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallAxis {
    /// Normal along ±x; the wall line is x = const.
    X,
    /// Normal along ±y.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub start: Vec2,
    pub end: Vec2,
    pub height: f64,
    /// Unit normal pointing into the room.
    pub normal: Vec2,
}

impl Wall {
    /// Wall whose interior lies to the left of `start -> end`.
    pub fn new(start: Vec2, end: Vec2, height: f64) -> Self {
        let normal = (end - start).normalized().perp();
        Wall { start, end, height, normal }
    }

    pub fn center(&self) -> Vec2 {
        (self.start + self.end) * 0.5
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    /// Orientation of the wall line in [0, 180).
    pub fn orientation_deg(&self) -> f64 {
        (self.end - self.start).angle_deg() % 180.0
    }

    pub fn axis(&self) -> WallAxis {
        if self.normal.x.abs() >= self.normal.y.abs() {
            WallAxis::X
        } else {
            WallAxis::Y
        }
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        point_segment_distance(p, self.start, self.end)
    }
}

/// Build walls from a counter-clockwise polygon.
pub fn walls_from_polygon(poly: &[Vec2], height: f64) -> Vec<Wall> {
    let n = poly.len();
    (0..n).map(|i| Wall::new(poly[i], poly[(i + 1) % n], height)).collect()
}

/// Index of the wall segment nearest to `p`; ties go to the lowest index.
pub fn closest_wall(p: Vec2, walls: &[Wall]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, w) in walls.iter().enumerate() {
        let d = w.distance_to(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub class: ObjectClass,
    pub position: Vec2,
    /// Facing direction in degrees, [0, 360).
    pub yaw_deg: f64,
    pub model_id: String,
    pub width: f64,
    pub depth: f64,
}

impl SceneObject {
    pub fn from_library(library: &ModelLibrary, model_id: &str, position: Vec2, yaw_deg: f64) -> Result<Self> {
        let m = library.get(model_id)?;
        Ok(SceneObject {
            class: m.class,
            position,
            yaw_deg: wrap_deg(yaw_deg),
            model_id: m.id.clone(),
            width: m.width,
            depth: m.depth,
        })
    }

    pub fn normal(&self) -> Vec2 {
        Vec2::from_angle_deg(self.yaw_deg)
    }

    pub fn footprint(&self) -> OrientedRect {
        OrientedRect::new(self.position, self.width, self.depth, self.yaw_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParameters {
    pub camera: CameraModel,
    pub lambda: f64,
    pub walls: Vec<Wall>,
    pub objects: Vec<SceneObject>,
}

impl SceneParameters {
    /// Wall polygon vertices (start point of each wall).
    pub fn polygon(&self) -> Vec<Vec2> {
        self.walls.iter().map(|w| w.start).collect()
    }

    pub fn is_closed(&self) -> bool {
        let n = self.walls.len();
        n >= 3 && (0..n).all(|i| self.walls[i].end.distance(self.walls[(i + 1) % n].start) < 1e-9)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        point_in_polygon(p, &self.polygon())
    }

    /// Wall height implied by the global scale.
    pub fn scaled_wall_height(&self) -> f64 {
        REFERENCE_WALL_HEIGHT * self.lambda
    }

    /// Copy with the global scale replaced and wall heights following it.
    pub fn with_lambda(&self, lambda: f64) -> SceneParameters {
        let mut s = self.clone();
        s.lambda = lambda;
        let h = REFERENCE_WALL_HEIGHT * lambda;
        for w in &mut s.walls {
            w.height = h;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.camera.height > 0.0) {
            return Err(Error::InvalidScene("camera height must be positive".into()));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidScene(format!("scale {} must be positive", self.lambda)));
        }
        if !self.is_closed() {
            return Err(Error::InvalidScene("wall polygon is not closed".into()));
        }
        let poly = self.polygon();
        if !is_simple_polygon(&poly) {
            return Err(Error::InvalidScene("wall polygon self-intersects".into()));
        }
        if !is_manhattan_polygon(&poly, 1e-6) {
            return Err(Error::InvalidScene("wall polygon is not Manhattan".into()));
        }
        if signed_area(&poly) <= 0.0 {
            return Err(Error::InvalidScene("wall polygon must be counter-clockwise".into()));
        }
        if self.walls.iter().any(|w| !(w.height > 0.0)) {
            return Err(Error::InvalidScene("wall height must be positive".into()));
        }
        for o in &self.objects {
            if !point_in_polygon(o.position, &poly) {
                return Err(Error::InvalidScene(format!(
                    "{} at ({:.3}, {:.3}) lies outside the room",
                    o.class, o.position.x, o.position.y
                )));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            camera: CameraFile { height: self.camera.height },
            lambda: self.lambda,
            walls: self
                .walls
                .iter()
                .map(|w| WallFile { x1: w.start.x, y1: w.start.y, x2: w.end.x, y2: w.end.y, height: w.height })
                .collect(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectFile {
                    class: o.class,
                    x: o.position.x,
                    y: o.position.y,
                    yaw_deg: o.yaw_deg,
                    model_id: o.model_id.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &SceneFile, library: &ModelLibrary) -> Result<Self> {
        let walls =
            file.walls.iter().map(|w| Wall::new(Vec2::new(w.x1, w.y1), Vec2::new(w.x2, w.y2), w.height)).collect();
        let objects = file
            .objects
            .iter()
            .map(|o| {
                let mut obj = SceneObject::from_library(library, &o.model_id, Vec2::new(o.x, o.y), o.yaw_deg)?;
                obj.class = o.class;
                obj.yaw_deg = o.yaw_deg;
                Ok(obj)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SceneParameters { camera: CameraModel { height: file.camera.height }, lambda: file.lambda, walls, objects })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, library: &ModelLibrary) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SceneFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Self::from_file(&file, library)
    }
}

/// On-disk interchange schema for scenes and hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub camera: CameraFile,
    pub lambda: f64,
    pub walls: Vec<WallFile>,
    pub objects: Vec<ObjectFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFile {
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallFile {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectFile {
    pub class: ObjectClass,
    pub x: f64,
    pub y: f64,
    pub yaw_deg: f64,
    pub model_id: String,
}
