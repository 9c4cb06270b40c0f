//! Surface cost: label disagreement between the observed and predicted
//! orientation panoramas outside the joint object mask.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::models::ModelLibrary;
use crate::render::{
    column_hits, environment_hit, object_pixels, render_object_masks, render_orientation_pano, ColumnHit, Mask,
    OrientationPanorama, LABEL_HORIZONTAL,
};
use crate::scene::{SceneParameters, Wall};

/// `1 - matches / unmasked` over pixels where neither mask is set.
pub fn surface_cost_from_maps(
    observed: &OrientationPanorama,
    predicted: &OrientationPanorama,
    mask: &Mask,
) -> Result<f64> {
    if observed.size != predicted.size || observed.size != mask.size {
        return Err(Error::ResolutionMismatch {
            observed: (observed.size.width, observed.size.height),
            rendered: (predicted.size.width, predicted.size.height),
        });
    }
    let (mut unmasked, mut matches) = (0usize, 0usize);
    for ((o, p), m) in observed.labels.iter().zip(&predicted.labels).zip(&mask.bits) {
        if !m {
            unmasked += 1;
            matches += usize::from(o == p);
        }
    }
    if unmasked == 0 {
        return Err(Error::DegenerateMask);
    }
    Ok(1.0 - matches as f64 / unmasked as f64)
}

/// Reference implementation: full render of the hypothesis.
pub fn surface_cost(
    observed: &OrientationPanorama,
    observed_mask: &Mask,
    hypothesis: &SceneParameters,
    library: &ModelLibrary,
) -> Result<f64> {
    if observed.size != observed_mask.size {
        return Err(Error::ResolutionMismatch {
            observed: (observed.size.width, observed.size.height),
            rendered: (observed_mask.size.width, observed_mask.size.height),
        });
    }
    let predicted = render_orientation_pano(hypothesis, observed.size);
    let mask = observed_mask.union(&render_object_masks(hypothesis, observed.size, library)?);
    surface_cost_from_maps(observed, &predicted, &mask)
}

/// Incremental scorer for hypotheses that share one wall outline and differ
/// in wall height and objects.
#[derive(Debug, Clone)]
pub struct SurfaceScorer {
    observed: OrientationPanorama,
    observed_mask: Mask,
    outline: Vec<(Vec2, Vec2)>,
    hits: Vec<ColumnHit>,
    /// Per column, prefix counts over rows of unmasked pixels labelled
    /// horizontal and labelled as that column's wall.
    horizontal: Vec<Vec<u32>>,
    wall: Vec<Vec<u32>>,
    unmasked: usize,
}

fn outline(walls: &[Wall]) -> Vec<(Vec2, Vec2)> {
    walls.iter().map(|w| (w.start, w.end)).collect()
}

impl SurfaceScorer {
    pub fn new(observed: &OrientationPanorama, observed_mask: &Mask, walls: &[Wall]) -> Result<Self> {
        let size = observed.size;
        if size != observed_mask.size {
            return Err(Error::ResolutionMismatch {
                observed: (size.width, size.height),
                rendered: (observed_mask.size.width, observed_mask.size.height),
            });
        }
        let hits = column_hits(walls, size);
        let mut horizontal = Vec::with_capacity(size.width);
        let mut wall = Vec::with_capacity(size.width);
        let mut unmasked = 0;
        for (col, hit) in hits.iter().enumerate() {
            let mut h = vec![0u32; size.height + 1];
            let mut w = vec![0u32; size.height + 1];
            for row in 0..size.height {
                let idx = row * size.width + col;
                let free = !observed_mask.bits[idx];
                let l = observed.labels[idx];
                unmasked += usize::from(free);
                h[row + 1] = h[row] + u32::from(free && l == LABEL_HORIZONTAL);
                w[row + 1] = w[row] + u32::from(free && l == hit.label && hit.distance.is_finite());
            }
            horizontal.push(h);
            wall.push(w);
        }
        Ok(SurfaceScorer {
            observed: observed.clone(),
            observed_mask: observed_mask.clone(),
            outline: outline(walls),
            hits,
            horizontal,
            wall,
            unmasked,
        })
    }

    /// Rows `[top, bottom)` showing the wall of column `col` at `height`.
    fn wall_rows(&self, col: usize, height: f64, camera_height: f64) -> (usize, usize) {
        let size = self.observed.size;
        let hit = ColumnHit { height, ..self.hits[col] };
        if !hit.distance.is_finite() {
            return (0, 0);
        }
        let is_wall = |row: usize| environment_hit(&hit, camera_height, size.row_elevation(row)).0 != LABEL_HORIZONTAL;
        let rows_per_deg = size.height as f64 / 180.0;
        let guess = |z: f64| {
            let el = ((z - camera_height) / hit.distance).atan().to_degrees();
            ((90.0 - el) * rows_per_deg - 0.5).ceil().clamp(0.0, size.height as f64) as usize
        };
        let mut top = guess(height);
        while top > 0 && is_wall(top - 1) {
            top -= 1;
        }
        while top < size.height && !is_wall(top) {
            top += 1;
        }
        let mut bottom = guess(0.0).max(top);
        while bottom > top && !is_wall(bottom - 1) {
            bottom -= 1;
        }
        while bottom < size.height && is_wall(bottom) {
            bottom += 1;
        }
        (top, bottom)
    }

    pub fn score(&self, hypothesis: &SceneParameters, library: &ModelLibrary) -> Result<f64> {
        if outline(&hypothesis.walls) != self.outline {
            return surface_cost(&self.observed, &self.observed_mask, hypothesis, library);
        }
        let size = self.observed.size;
        let cam = hypothesis.camera.height;
        let mut matches: i64 = 0;
        let mut col_heights = Vec::with_capacity(size.width);
        for col in 0..size.width {
            let h = hypothesis.walls.get(self.hits[col].wall).map_or(0.0, |w| w.height);
            col_heights.push(h);
            let (top, bottom) = self.wall_rows(col, h, cam);
            let hz = &self.horizontal[col];
            let wl = &self.wall[col];
            matches += i64::from(hz[top] + (hz[size.height] - hz[bottom]) + (wl[bottom] - wl[top]));
        }
        let mut unmasked = self.unmasked as i64;
        if !hypothesis.objects.is_empty() {
            let hits: Vec<ColumnHit> =
                self.hits.iter().zip(&col_heights).map(|(h, &height)| ColumnHit { height, ..*h }).collect();
            for (idx, _) in object_pixels(hypothesis, size, library, &hits)? {
                if self.observed_mask.bits[idx] {
                    continue;
                }
                let (col, row) = (idx % size.width, idx / size.width);
                unmasked -= 1;
                let predicted = environment_hit(&hits[col], cam, size.row_elevation(row)).0;
                matches -= i64::from(predicted == self.observed.labels[idx]);
            }
        }
        if unmasked == 0 {
            return Err(Error::DegenerateMask);
        }
        Ok(1.0 - matches as f64 / unmasked as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_room, template_by_name, GeneratorConfig};
    use crate::projection::PanoSize;
    use crate::render::apply_label_noise;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_arithmetic() {
        let size = PanoSize::new(10, 10);
        let observed = OrientationPanorama { size, labels: vec![1; 100] };
        let mut predicted = observed.clone();
        let mut mask = Mask::empty(size);
        for i in 0..20 {
            mask.bits[i] = true;
        }
        for l in predicted.labels[20..40].iter_mut() {
            *l = 2;
        }
        assert!((surface_cost_from_maps(&observed, &predicted, &mask).unwrap() - 0.25).abs() < 1e-15);
        let opposite = OrientationPanorama { size, labels: vec![3; 100] };
        assert_eq!(surface_cost_from_maps(&observed, &opposite, &mask).unwrap(), 1.0);
        let full = Mask { size, bits: vec![true; 100] };
        assert!(matches!(surface_cost_from_maps(&observed, &predicted, &full), Err(Error::DegenerateMask)));
        let other = OrientationPanorama { size: PanoSize::new(20, 5), labels: vec![1; 100] };
        assert!(matches!(surface_cost_from_maps(&observed, &other, &mask), Err(Error::ResolutionMismatch { .. })));
    }

    #[test]
    fn ground_truth_scores_zero_on_every_template() {
        let lib = ModelLibrary::default();
        let size = PanoSize::new(256, 128);
        for name in ["rect", "wide", "l_shape", "t_shape"] {
            let scene = generate_room(&template_by_name(name).unwrap(), 5, &GeneratorConfig::default(), &lib).unwrap();
            let observed = render_orientation_pano(&scene, size);
            let mask = Mask::empty(size);
            assert_eq!(surface_cost(&observed, &mask, &scene, &lib).unwrap(), 0.0);
            let scorer = SurfaceScorer::new(&observed, &mask, &scene.walls).unwrap();
            assert_eq!(scorer.score(&scene, &lib).unwrap(), 0.0);
        }
    }

    #[test]
    fn incremental_scorer_matches_reference() {
        let lib = ModelLibrary::default();
        let size = PanoSize::new(256, 128);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..6 {
            let name = ["rect", "l_shape", "t_shape"][seed as usize % 3];
            let scene =
                generate_room(&template_by_name(name).unwrap(), seed, &GeneratorConfig::default(), &lib).unwrap();
            let observed = apply_label_noise(&render_orientation_pano(&scene, size), 0.05, seed);
            let mut mask = Mask::empty(size);
            for i in (0..size.len()).step_by(7) {
                mask.bits[i] = true;
            }
            let scorer = SurfaceScorer::new(&observed, &mask, &scene.walls).unwrap();
            for _ in 0..5 {
                let mut h = scene.with_lambda(rng.random_range(0.8..1.4));
                for o in &mut h.objects {
                    o.position.x += rng.random_range(-0.3..0.3);
                    o.position.y += rng.random_range(-0.3..0.3);
                    o.yaw_deg = rng.random_range(0.0..360.0);
                }
                let fast = scorer.score(&h, &lib).unwrap();
                let slow = surface_cost(&observed, &mask, &h, &lib).unwrap();
                assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            }
        }
    }
}
