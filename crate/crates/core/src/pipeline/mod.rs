//! End-to-end harness: dataset generation, estimation, evaluation and figures.

pub mod dataset;
pub mod estimate;
pub mod eval;
pub mod floormap;

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::ModelLibrary;
use crate::projection::PanoSize;
use crate::render::{render_object_masks, render_orientation_pano};
use crate::scene::SceneParameters;

pub const LABELS_FILE: &str = "labels.png";
pub const OBJECTS_FILE: &str = "objects.png";

/// Writes the orientation panorama and object mask of `scene` into `out`.
pub fn render_scene(scene: &SceneParameters, size: PanoSize, models: &ModelLibrary, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    render_orientation_pano(scene, size).save_png(&out.join(LABELS_FILE))?;
    render_object_masks(scene, size, models)?.save_png(&out.join(OBJECTS_FILE))
}
