//! Rendered pose library: every model of a class seen from every label.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hog::{hog, HogDescriptor};
use super::labels::{all_labels, PoseLabel};
use crate::error::{Error, Result};
use crate::models::ModelLibrary;
use crate::render::{render_model_pose, GrayView, MODEL_VIEW_SIZE};
use crate::scene::ObjectClass;

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryEntry {
    pub class: ObjectClass,
    pub model_id: String,
    pub pose: PoseLabel,
    pub image: GrayView,
    pub descriptor: HogDescriptor,
}

#[derive(Debug, Clone, Default)]
pub struct PoseLibrary {
    pub entries: Vec<LibraryEntry>,
    pub image_size: usize,
    /// First entry of each model, whose 360 views follow in label order.
    offsets: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub class: ObjectClass,
    pub model_id: String,
    pub pose: PoseLabel,
    pub image_path: String,
}

/// A query hit: library index and descriptor distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl PoseLibrary {
    /// Renders every model of each oriented class at all 360 labels.
    pub fn build(models: &ModelLibrary, image_size: usize) -> Result<Self> {
        let jobs: Vec<(ObjectClass, String, PoseLabel)> = models
            .models
            .iter()
            .filter(|m| m.class.has_orientation())
            .flat_map(|m| all_labels().map(move |p| (m.class, m.id.clone(), p)))
            .collect();
        let entries = jobs
            .into_par_iter()
            .map(|(class, model_id, pose)| {
                let view =
                    render_model_pose(models.get(&model_id)?, pose.yaw_deg, pose.pitch_deg, image_size, image_size);
                let descriptor = hog(&view.image)?;
                Ok(LibraryEntry { class, model_id, pose, image: view.image, descriptor })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PoseLibrary::from_entries(entries, image_size))
    }

    pub fn from_entries(entries: Vec<LibraryEntry>, image_size: usize) -> Self {
        let mut offsets: Vec<(String, usize)> = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            if !offsets.iter().any(|(m, _)| *m == e.model_id) {
                offsets.push((e.model_id.clone(), i));
            }
        }
        PoseLibrary { entries, image_size, offsets }
    }

    pub fn build_default(models: &ModelLibrary) -> Result<Self> {
        Self::build(models, MODEL_VIEW_SIZE)
    }

    pub fn class_entries(&self, class: ObjectClass) -> impl Iterator<Item = (usize, &LibraryEntry)> {
        self.entries.iter().enumerate().filter(move |(_, e)| e.class == class)
    }

    /// Exact k nearest library views of `class`; ties go to the lower index.
    pub fn knn(&self, query: &HogDescriptor, class: ObjectClass, k: usize) -> Result<Vec<Neighbor>> {
        let mut all: Vec<Neighbor> = self
            .class_entries(class)
            .map(|(index, e)| Neighbor { index, distance: query.distance(&e.descriptor) })
            .collect();
        if all.len() < k || all.is_empty() {
            return Err(Error::LibraryTooSmall { available: all.len(), requested: k });
        }
        all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
        all.truncate(k);
        Ok(all)
    }

    /// Library view of `model_id` at the label nearest `pose`.
    pub fn view_at(&self, model_id: &str, pose: PoseLabel) -> Option<&LibraryEntry> {
        let q = PoseLabel::quantize(pose.yaw_deg, pose.pitch_deg);
        let fast = self
            .offsets
            .iter()
            .find(|(m, _)| m == model_id)
            .and_then(|(_, o)| self.entries.get(o + q.index()))
            .filter(|e| e.model_id == model_id && e.pose == q);
        fast.or_else(|| self.entries.iter().find(|e| e.model_id == model_id && e.pose == q))
    }

    /// Writes every view as a grayscale PNG plus `manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut rows = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let rel = format!(
                "{}/y{:03}_p{:02}.png",
                e.model_id,
                e.pose.yaw_deg.round() as i64,
                e.pose.pitch_deg.round() as i64
            );
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|err| Error::io(parent, err))?;
            }
            e.image.to_image().save(&path).map_err(|source| Error::Image { path: path.clone(), source })?;
            rows.push(ManifestRow { class: e.class, model_id: e.model_id.clone(), pose: e.pose, image_path: rel });
        }
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&rows).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let rows: Vec<ManifestRow> = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        let entries = rows
            .into_iter()
            .map(|r| {
                let p = dir.join(&r.image_path);
                let img = image::open(&p).map_err(|source| Error::Image { path: p.clone(), source })?.into_luma8();
                let image = GrayView::from_image(&img);
                let descriptor = hog(&image)?;
                Ok(LibraryEntry { class: r.class, model_id: r.model_id, pose: r.pose, image, descriptor })
            })
            .collect::<Result<Vec<_>>>()?;
        let image_size = entries.first().map_or(0, |e| e.image.width);
        Ok(PoseLibrary::from_entries(entries, image_size))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_library() -> PoseLibrary {
        PoseLibrary::build(&ModelLibrary::default(), 24).unwrap()
    }

    #[test]
    fn member_queries_return_themselves() {
        let lib = small_library();
        assert_eq!(lib.entries.len(), 3 * 360);
        for i in [0usize, 17, 400, 1079] {
            let e = &lib.entries[i];
            let hits = lib.knn(&e.descriptor, e.class, 6).unwrap();
            assert_eq!(hits[0].distance, 0.0);
            assert!(hits.iter().any(|h| h.index == i));
        }
    }

    #[test]
    fn knn_matches_exhaustive_scan() {
        let lib = small_library();
        let query = &lib.entries[450].descriptor;
        let full = lib.knn(query, ObjectClass::Chair, 360).unwrap();
        assert!(full.windows(2).all(|w| w[0].distance <= w[1].distance));
        let mut oracle: Vec<(f64, usize)> = lib
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.class == ObjectClass::Chair)
            .map(|(i, e)| (query.distance(&e.descriptor), i))
            .collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let top = lib.knn(query, ObjectClass::Chair, 6).unwrap();
        assert_eq!(
            top.iter().map(|n| n.index).collect::<Vec<_>>(),
            oracle[..6].iter().map(|o| o.1).collect::<Vec<_>>()
        );
        assert!(matches!(lib.knn(query, ObjectClass::Chair, 361), Err(Error::LibraryTooSmall { .. })));
        assert!(matches!(lib.knn(query, ObjectClass::Plant, 1), Err(Error::LibraryTooSmall { .. })));
    }

    #[test]
    fn manifest_round_trip() {
        let models = ModelLibrary { models: vec![ModelLibrary::default().get("tv-01").unwrap().clone()] };
        let lib = PoseLibrary::build(&models, 20).unwrap();
        let dir = tempfile::tempdir().unwrap();
        lib.save(dir.path()).unwrap();
        let back = PoseLibrary::load(dir.path()).unwrap();
        assert_eq!(back.entries.len(), 360);
        for (a, b) in lib.entries.iter().zip(&back.entries) {
            assert_eq!((a.class, &a.model_id, a.pose), (b.class, &b.model_id, b.pose));
            assert!(a.image.data.iter().zip(&b.image.data).all(|(x, y)| (x - y).abs() <= 0.5 / 255.0 + 1e-6));
        }
    }
}
