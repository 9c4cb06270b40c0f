//! Parametric furniture models built from boxes, cylinders and spheres.
//!
//! Each model lives in its own frame: origin at the footprint centre on the
//! floor, +x pointing along the facing direction, +z up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::ObjectClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    /// Axis-aligned box in model coordinates.
    Box {
        center: [f64; 3],
        size: [f64; 3],
    },
    /// Vertical cylinder.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z0: f64,
        z1: f64,
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
}

impl Primitive {
    /// Axis-aligned bounds `(min, max)` in model coordinates.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match *self {
            Primitive::Box { center, size } => (
                [center[0] - size[0] / 2.0, center[1] - size[1] / 2.0, center[2] - size[2] / 2.0],
                [center[0] + size[0] / 2.0, center[1] + size[1] / 2.0, center[2] + size[2] / 2.0],
            ),
            Primitive::Cylinder { center, radius, z0, z1 } => {
                ([center[0] - radius, center[1] - radius, z0], [center[0] + radius, center[1] + radius, z1])
            }
            Primitive::Sphere { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub id: String,
    pub class: ObjectClass,
    /// Footprint extent across the facing axis (m).
    pub width: f64,
    /// Footprint extent along the facing axis (m).
    pub depth: f64,
    pub primitives: Vec<Primitive>,
}

impl Model {
    pub fn height(&self) -> f64 {
        self.primitives.iter().map(|p| p.bounds().1[2]).fold(0.0, f64::max)
    }

    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.primitives {
            let (a, b) = p.bounds();
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        (lo, hi)
    }

    /// Centre of the bounding box.
    pub fn centroid(&self) -> [f64; 3] {
        let (lo, hi) = self.bounds();
        [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, (lo[2] + hi[2]) / 2.0]
    }

    /// Radius of the sphere around [`Model::centroid`] enclosing every primitive.
    pub fn bounding_radius(&self) -> f64 {
        let (lo, hi) = self.bounds();
        0.5 * ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLibrary {
    pub models: Vec<Model>,
}

impl Default for ModelLibrary {
    fn default() -> Self {
        let bed = Model {
            id: "bed-01".into(),
            class: ObjectClass::Bed,
            width: 1.6,
            depth: 2.0,
            primitives: vec![
                Primitive::Box { center: [0.05, 0.0, 0.25], size: [1.9, 1.6, 0.5] },
                // headboard
                Primitive::Box { center: [-0.95, 0.0, 0.55], size: [0.1, 1.6, 1.1] },
            ],
        };
        let chair = Model {
            id: "chair-01".into(),
            class: ObjectClass::Chair,
            width: 0.5,
            depth: 0.5,
            primitives: vec![
                Primitive::Box { center: [0.0, 0.0, 0.225], size: [0.5, 0.5, 0.45] },
                Primitive::Box { center: [-0.21, 0.0, 0.7], size: [0.08, 0.5, 0.5] },
            ],
        };
        let tv = Model {
            id: "tv-01".into(),
            class: ObjectClass::Tv,
            width: 1.1,
            depth: 0.3,
            primitives: vec![
                Primitive::Box { center: [0.1, 0.0, 0.6], size: [0.1, 1.1, 1.2] },
                // rear housing
                Primitive::Box { center: [-0.05, 0.0, 0.7], size: [0.2, 0.6, 0.4] },
            ],
        };
        let plant = Model {
            id: "plant-01".into(),
            class: ObjectClass::Plant,
            width: 0.7,
            depth: 0.7,
            primitives: vec![
                Primitive::Cylinder { center: [0.0, 0.0], radius: 0.2, z0: 0.0, z1: 0.4 },
                Primitive::Sphere { center: [0.0, 0.0, 0.75], radius: 0.35 },
            ],
        };
        ModelLibrary { models: vec![bed, chair, tv, plant] }
    }
}

impl ModelLibrary {
    pub fn get(&self, id: &str) -> Result<&Model> {
        self.models.iter().find(|m| m.id == id).ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    /// First model registered for a class.
    pub fn for_class(&self, class: ObjectClass) -> Result<&Model> {
        self.models
            .iter()
            .find(|m| m.class == class)
            .ok_or_else(|| Error::Config(format!("no model for class {}", class.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footprints_enclose_primitives() {
        for m in &ModelLibrary::default().models {
            let (lo, hi) = m.bounds();
            assert!(lo[0] >= -m.depth / 2.0 - 1e-12 && hi[0] <= m.depth / 2.0 + 1e-12, "{}", m.id);
            assert!(lo[1] >= -m.width / 2.0 - 1e-12 && hi[1] <= m.width / 2.0 + 1e-12, "{}", m.id);
            assert!(lo[2] >= 0.0);
        }
    }

    #[test]
    fn lookup() {
        let lib = ModelLibrary::default();
        assert_eq!(lib.get("tv-01").unwrap().class, ObjectClass::Tv);
        assert!(matches!(lib.get("sofa"), Err(Error::UnknownModel(_))));
    }
}
