//! Ray casting for orientation panoramas, object silhouettes and
//! stand-alone model views.

use std::path::Path;

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::models::{Model, ModelLibrary, Primitive};
use crate::projection::PanoSize;
use crate::scene::{SceneObject, SceneParameters, Wall, WallAxis};

pub const LABEL_MASKED: u8 = 0;
pub const LABEL_WALL_X: u8 = 1;
pub const LABEL_WALL_Y: u8 = 2;
pub const LABEL_HORIZONTAL: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationPanorama {
    pub size: PanoSize,
    /// Row-major label codes.
    pub labels: Vec<u8>,
}

impl OrientationPanorama {
    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.labels[row * self.size.width + col]
    }

    /// Fraction of pixels carrying `label`.
    pub fn fraction(&self, label: u8) -> f64 {
        self.labels.iter().filter(|&&l| l == label).count() as f64 / self.labels.len() as f64
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img = GrayImage::from_raw(self.size.width as u32, self.size.height as u32, self.labels.clone())
            .expect("buffer matches dimensions");
        img.save(path).map_err(|source| Error::Image { path: path.into(), source })
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?.into_luma8();
        let size = PanoSize::new(img.width() as usize, img.height() as usize);
        let labels = img.into_raw();
        if labels.iter().any(|&l| l > LABEL_HORIZONTAL) {
            return Err(Error::InvalidScene(format!("{}: label codes must lie in 0..=3", path.display())));
        }
        Ok(OrientationPanorama { size, labels })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub size: PanoSize,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn empty(size: PanoSize) -> Self {
        Mask { size, bits: vec![false; size.len()] }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn union(&self, other: &Mask) -> Mask {
        Mask { size: self.size, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect() }
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let raw = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        let img = GrayImage::from_raw(self.size.width as u32, self.size.height as u32, raw)
            .expect("buffer matches dimensions");
        img.save(path).map_err(|source| Error::Image { path: path.into(), source })
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?.into_luma8();
        let size = PanoSize::new(img.width() as usize, img.height() as usize);
        Ok(Mask { size, bits: img.into_raw().into_iter().map(|v| v >= 128).collect() })
    }
}

pub(crate) fn ray_segment(dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = a.cross(e) / denom;
    let s = a.cross(dir) / denom;
    (t > 1e-9 && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some(t)
}

/// First wall hit along a horizontal ray from the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ColumnHit {
    pub(crate) distance: f64,
    pub(crate) label: u8,
    pub(crate) height: f64,
    /// Index of the hit wall, `usize::MAX` when the ray escapes.
    pub(crate) wall: usize,
}

pub(crate) fn column_hits(walls: &[Wall], size: PanoSize) -> Vec<ColumnHit> {
    (0..size.width)
        .map(|col| {
            let dir = Vec2::from_angle_deg(size.column_azimuth(col));
            let mut best =
                ColumnHit { distance: f64::INFINITY, label: LABEL_HORIZONTAL, height: 0.0, wall: usize::MAX };
            for (i, w) in walls.iter().enumerate() {
                if let Some(t) = ray_segment(dir, w.start, w.end) {
                    if t < best.distance {
                        let label = match w.axis() {
                            WallAxis::X => LABEL_WALL_X,
                            WallAxis::Y => LABEL_WALL_Y,
                        };
                        best = ColumnHit { distance: t, label, height: w.height, wall: i };
                    }
                }
            }
            best
        })
        .collect()
}

/// Label of the first room surface hit and its distance along the unit ray.
pub(crate) fn environment_hit(hit: &ColumnHit, camera_height: f64, elevation_deg: f64) -> (u8, f64) {
    let el = elevation_deg.to_radians();
    let (s, c) = el.sin_cos();
    if hit.distance.is_finite() {
        let z = camera_height + hit.distance * el.tan();
        if (0.0..=hit.height).contains(&z) {
            return (hit.label, hit.distance / c);
        }
    }
    let t = if s < 0.0 {
        camera_height / -s
    } else if hit.distance.is_finite() {
        (hit.height - camera_height) / s
    } else {
        f64::INFINITY
    };
    (LABEL_HORIZONTAL, t)
}

/// Walls, floor and ceiling only; objects are not shaded.
pub fn render_orientation_pano(scene: &SceneParameters, size: PanoSize) -> OrientationPanorama {
    let hits = column_hits(&scene.walls, size);
    let cam = scene.camera.height;
    let labels = (0..size.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let el = size.row_elevation(row);
            hits.iter().map(move |h| environment_hit(h, cam, el).0).collect::<Vec<_>>()
        })
        .collect();
    OrientationPanorama { size, labels }
}

/// Flip each label independently with probability `p` to one of the two
/// other surface classes.
pub fn apply_label_noise(pano: &OrientationPanorama, p: f64, seed: u64) -> OrientationPanorama {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = pano
        .labels
        .iter()
        .map(|&l| {
            let flip = rng.random_bool(p.clamp(0.0, 1.0));
            let shift: u8 = rng.random_range(1..=2);
            if flip && l != LABEL_MASKED {
                (l - 1 + shift) % 3 + 1
            } else {
                l
            }
        })
        .collect();
    OrientationPanorama { size: pano.size, labels }
}

/// A unit-direction ray in some frame.
#[derive(Debug, Clone, Copy)]
struct Ray {
    origin: Vec3,
    dir: Vec3,
}

/// Nearest intersection with a primitive as `(t, outward normal)`.
fn intersect_primitive(p: &Primitive, ray: &Ray) -> Option<(f64, Vec3)> {
    match *p {
        Primitive::Box { center, size } => {
            let o = [ray.origin.x - center[0], ray.origin.y - center[1], ray.origin.z - center[2]];
            let d = [ray.dir.x, ray.dir.y, ray.dir.z];
            let mut t0 = f64::NEG_INFINITY;
            let mut t1 = f64::INFINITY;
            let mut axis = 0;
            let mut sign = 1.0;
            for k in 0..3 {
                let half = size[k] * 0.5;
                if d[k].abs() < 1e-15 {
                    if o[k].abs() > half {
                        return None;
                    }
                    continue;
                }
                let a = (-half - o[k]) / d[k];
                let b = (half - o[k]) / d[k];
                let (near, far) = if a < b { (a, b) } else { (b, a) };
                if near > t0 {
                    t0 = near;
                    axis = k;
                    sign = if d[k] > 0.0 { -1.0 } else { 1.0 };
                }
                t1 = t1.min(far);
            }
            if t0 > t1 || t1 <= 1e-9 {
                return None;
            }
            let mut n = [0.0; 3];
            n[axis] = sign;
            Some((t0.max(0.0), Vec3::new(n[0], n[1], n[2])))
        }
        Primitive::Cylinder { center, radius, z0, z1 } => {
            let ox = ray.origin.x - center[0];
            let oy = ray.origin.y - center[1];
            let (dx, dy) = (ray.dir.x, ray.dir.y);
            let mut best: Option<(f64, Vec3)> = None;
            let mut consider = |t: f64, n: Vec3| {
                if t > 1e-9 && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, n));
                }
            };
            let a = dx * dx + dy * dy;
            if a > 1e-15 {
                let b = 2.0 * (ox * dx + oy * dy);
                let c = ox * ox + oy * oy - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                        let z = ray.origin.z + t * ray.dir.z;
                        if (z0..=z1).contains(&z) {
                            consider(t, Vec3::new((ox + t * dx) / radius, (oy + t * dy) / radius, 0.0));
                        }
                    }
                }
            }
            if ray.dir.z.abs() > 1e-15 {
                for (zc, nz) in [(z0, -1.0), (z1, 1.0)] {
                    let t = (zc - ray.origin.z) / ray.dir.z;
                    let (x, y) = (ox + t * dx, oy + t * dy);
                    if x * x + y * y <= radius * radius {
                        consider(t, Vec3::new(0.0, 0.0, nz));
                    }
                }
            }
            best
        }
        Primitive::Sphere { center, radius } => {
            let c = Vec3::new(center[0], center[1], center[2]);
            let oc = ray.origin - c;
            let b = oc.dot(ray.dir);
            let disc = b * b - (oc.dot(oc) - radius * radius);
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let t = if -b - sq > 1e-9 { -b - sq } else { -b + sq };
            (t > 1e-9).then(|| (t, (ray.origin + ray.dir * t - c) * (1.0 / radius)))
        }
    }
}

fn intersect_model(model: &Model, ray: &Ray) -> Option<(f64, Vec3)> {
    model.primitives.iter().filter_map(|p| intersect_primitive(p, ray)).min_by(|a, b| a.0.total_cmp(&b.0))
}

/// An object placed in the world, with the world-to-model rotation cached.
struct Placed<'a> {
    model: &'a Model,
    position: Vec2,
    cos: f64,
    sin: f64,
    /// Inclusive pixel window `(col_start, col_count, row_min, row_max)`.
    window: (usize, usize, usize, usize),
}

impl Placed<'_> {
    fn hit(&self, camera: Vec3, dir: Vec3) -> Option<f64> {
        let o = camera - Vec3::new(self.position.x, self.position.y, 0.0);
        let local = |v: Vec3| Vec3::new(self.cos * v.x + self.sin * v.y, -self.sin * v.x + self.cos * v.y, v.z);
        intersect_model(self.model, &Ray { origin: local(o), dir: local(dir) }).map(|(t, _)| t)
    }
}

fn place<'a>(obj: &SceneObject, model: &'a Model, camera_height: f64, size: PanoSize) -> Placed<'a> {
    let (s, c) = obj.yaw_deg.to_radians().sin_cos();
    let (lo, hi) = model.bounds();
    let reach = lo.iter().zip(&hi).take(2).map(|(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max) * 2f64.sqrt();
    let dist = obj.position.norm();
    let top = hi[2];
    let (col_start, col_count, row_min, row_max) = if dist <= reach + 1e-6 {
        (0, size.width, 0, size.height - 1)
    } else {
        let half = (reach / dist).asin().to_degrees() + 360.0 / size.width as f64;
        let az = obj.position.angle_deg();
        let start = ((az - half) / 360.0 * size.width as f64).floor() as i64;
        let end = ((az + half) / 360.0 * size.width as f64).ceil() as i64;
        let count = ((end - start + 1) as usize).min(size.width);
        let near = dist - reach;
        let far = dist + reach;
        let el_max = (top - camera_height).atan2(if top > camera_height { near } else { far }).to_degrees();
        let el_min = (-camera_height).atan2(near).to_degrees();
        let row =
            |el: f64| ((90.0 - el) / 180.0 * size.height as f64).floor().clamp(0.0, size.height as f64 - 1.0) as usize;
        let start = start.rem_euclid(size.width as i64) as usize;
        (start, count, row(el_max).saturating_sub(1), (row(el_min) + 1).min(size.height - 1))
    };
    Placed { model, position: obj.position, cos: c, sin: s, window: (col_start, col_count, row_min, row_max) }
}

/// Sorted `(pixel index, object index)` for every pixel where an object lies
/// in front of the room surfaces described by `hits`.
pub(crate) fn object_pixels(
    scene: &SceneParameters,
    size: PanoSize,
    library: &ModelLibrary,
    hits: &[ColumnHit],
) -> Result<Vec<(usize, u16)>> {
    let placed = scene
        .objects
        .iter()
        .map(|o| Ok(place(o, library.get(&o.model_id)?, scene.camera.height, size)))
        .collect::<Result<Vec<_>>>()?;
    let camera = Vec3::new(0.0, 0.0, scene.camera.height);
    let mut found: Vec<(usize, f64, u16)> = Vec::new();
    for (k, p) in placed.iter().enumerate() {
        let (c0, count, r0, r1) = p.window;
        for row in r0..=r1 {
            let el = size.row_elevation(row);
            for i in 0..count {
                let col = (c0 + i) % size.width;
                let dir = size.pixel_center_direction(col, row).to_vector();
                if let Some(t) = p.hit(camera, dir) {
                    if t < environment_hit(&hits[col], scene.camera.height, el).1 {
                        found.push((row * size.width + col, t, k as u16));
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    found.dedup_by_key(|f| f.0);
    Ok(found.into_iter().map(|(i, _, k)| (i, k)).collect())
}

/// Per-pixel index of the first object hit in front of the room surfaces.
pub fn render_object_ids(scene: &SceneParameters, size: PanoSize, library: &ModelLibrary) -> Result<Vec<Option<u16>>> {
    let mut ids = vec![None; size.len()];
    if scene.objects.is_empty() {
        return Ok(ids);
    }
    for (i, k) in object_pixels(scene, size, library, &column_hits(&scene.walls, size))? {
        ids[i] = Some(k);
    }
    Ok(ids)
}

/// Pixels where some object occludes the room surfaces.
pub fn render_object_masks(scene: &SceneParameters, size: PanoSize, library: &ModelLibrary) -> Result<Mask> {
    Ok(Mask { size, bits: render_object_ids(scene, size, library)?.iter().map(Option::is_some).collect() })
}

/// Grayscale, single-channel image with intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayView {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl GrayView {
    pub fn new(width: usize, height: usize) -> Self {
        GrayView { width, height, data: vec![0.0; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([(self.get(x as usize, y as usize).clamp(0.0, 1.0) * 255.0).round() as u8])
        })
    }

    pub fn from_image(img: &GrayImage) -> Self {
        GrayView {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.pixels().map(|p| p.0[0] as f32 / 255.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedModelView {
    pub image: GrayView,
    pub silhouette: Vec<bool>,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

/// Fraction of the frame spanned by the model's bounding sphere.
pub const MODEL_FILL: f64 = 0.8;
pub const MODEL_VIEW_SIZE: usize = 48;

/// Orthographic view of a model. At yaw 0 the model faces the viewer; the
/// viewing direction is tilted down by `pitch_deg`.
pub fn render_model_pose(
    model: &Model,
    yaw_deg: f64,
    pitch_deg: f64,
    width: usize,
    height: usize,
) -> RenderedModelView {
    render_model_framed(model, yaw_deg, pitch_deg, width, height, Framing::default())
}

/// Placement of the model inside the frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Framing {
    /// Fraction of the frame spanned by the bounding sphere.
    pub fill: f64,
    /// Offset of the model centre as a fraction of the frame size.
    pub shift: (f64, f64),
}

impl Default for Framing {
    fn default() -> Self {
        Framing { fill: MODEL_FILL, shift: (0.0, 0.0) }
    }
}

pub fn render_model_framed(
    model: &Model,
    yaw_deg: f64,
    pitch_deg: f64,
    width: usize,
    height: usize,
    framing: Framing,
) -> RenderedModelView {
    let centroid = model.centroid();
    let centroid = Vec3::new(centroid[0], centroid[1], centroid[2]);
    let radius = model.bounding_radius();
    let (sp, cp) = pitch_deg.to_radians().sin_cos();
    let toward_viewer = Vec3::new(cp, 0.0, sp);
    let right = Vec3::new(0.0, 1.0, 0.0);
    let up = Vec3::new(-sp, 0.0, cp);
    let light = (toward_viewer * 0.7 + up * 0.6 + right * 0.4).normalized();
    // world units per pixel
    let scale = 2.0 * radius / (framing.fill * width.min(height) as f64);
    let (sy, cy) = yaw_deg.to_radians().sin_cos();
    // inverse rotation takes view-frame vectors into model coordinates
    let to_model = |v: Vec3| Vec3::new(cy * v.x + sy * v.y, -sy * v.x + cy * v.y, v.z);
    let to_view = |v: Vec3| Vec3::new(cy * v.x - sy * v.y, sy * v.x + cy * v.y, v.z);
    let mut image = GrayView::new(width, height);
    let mut silhouette = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let u = (x as f64 + 0.5 - (0.5 + framing.shift.0) * width as f64) * scale;
            let v = ((0.5 - framing.shift.1) * height as f64 - y as f64 - 0.5) * scale;
            let origin_view = toward_viewer * (4.0 * radius) + right * u + up * v;
            let ray = Ray { origin: to_model(origin_view) + centroid, dir: to_model(toward_viewer * -1.0) };
            if let Some((_, n)) = intersect_model(model, &ray) {
                let shade = 0.25 + 0.75 * to_view(n).dot(light).max(0.0);
                image.data[y * width + x] = shade as f32;
                silhouette[y * width + x] = true;
            }
        }
    }
    RenderedModelView { image, silhouette, yaw_deg, pitch_deg }
}

pub fn render_model_view(
    library: &ModelLibrary,
    model_id: &str,
    yaw_deg: f64,
    pitch_deg: f64,
    size: usize,
) -> Result<RenderedModelView> {
    Ok(render_model_pose(library.get(model_id)?, yaw_deg, pitch_deg, size, size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::scene::{walls_from_polygon, CameraModel};

    fn square_room(half: f64, lambda: f64) -> SceneParameters {
        let poly = [Vec2::new(-half, -half), Vec2::new(half, -half), Vec2::new(half, half), Vec2::new(-half, half)];
        SceneParameters {
            camera: CameraModel::default(),
            lambda,
            walls: walls_from_polygon(&poly, 2.5 * lambda),
            objects: vec![],
        }
    }

    const SIZE: PanoSize = PanoSize::new(256, 128);

    #[test]
    fn centred_square_room_is_symmetric() {
        let pano = render_orientation_pano(&square_room(2.0, 1.0), SIZE);
        for row in 0..SIZE.height {
            for col in 0..SIZE.width {
                // 180° rotation swaps nothing in a square centred on the camera
                assert_eq!(pano.get(col, row), pano.get((col + SIZE.width / 2) % SIZE.width, row));
                // mirror about the azimuth-0 column
                assert_eq!(pano.get(col, row), pano.get(SIZE.width - 1 - col, row));
            }
        }
        assert!((0..SIZE.width).all(|c| pano.get(c, SIZE.height - 1) == LABEL_HORIZONTAL));
        assert_eq!(pano.get(0, SIZE.height / 2), LABEL_WALL_X);
        assert_eq!(pano.get(SIZE.width / 4, SIZE.height / 2), LABEL_WALL_Y);
        assert_eq!(pano, render_orientation_pano(&square_room(2.0, 1.0), SIZE));
    }

    #[test]
    fn horizontal_fraction_grows_as_scale_shrinks() {
        let f: Vec<f64> = [0.6, 0.8, 1.0, 1.2, 1.4]
            .iter()
            .map(|&l| render_orientation_pano(&square_room(2.0, l), SIZE).fraction(LABEL_HORIZONTAL))
            .collect();
        assert!(f.windows(2).all(|w| w[0] > w[1]), "{f:?}");
    }

    #[test]
    fn downsampling_keeps_label_statistics() {
        let s = square_room(2.3, 1.05);
        let full = render_orientation_pano(&s, PanoSize::new(512, 256));
        let half = render_orientation_pano(&s, PanoSize::new(256, 128));
        for l in 1..=3 {
            assert!((full.fraction(l) - half.fraction(l)).abs() < 0.02);
        }
    }

    #[test]
    fn label_noise_flips_about_p() {
        let pano = render_orientation_pano(&square_room(2.0, 1.0), PanoSize::new(512, 256));
        let noisy = apply_label_noise(&pano, 0.05, 9);
        let flipped = pano.labels.iter().zip(&noisy.labels).filter(|(a, b)| a != b).count() as f64;
        assert!((flipped / pano.labels.len() as f64 - 0.05).abs() < 0.005);
        assert!(noisy.labels.iter().all(|&l| (1..=3).contains(&l)));
    }

    #[test]
    fn empty_scene_has_clear_mask() {
        let m = render_object_masks(&square_room(2.0, 1.0), SIZE, &ModelLibrary::default()).unwrap();
        assert_eq!(m.count(), 0);
    }

    fn components(mask: &Mask) -> usize {
        let (w, h) = (mask.size.width, mask.size.height);
        let mut seen = vec![false; w * h];
        let mut n = 0;
        for start in 0..w * h {
            if !mask.bits[start] || seen[start] {
                continue;
            }
            n += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                let (c, r) = (i % w, i / w);
                let mut nb = vec![r * w + (c + 1) % w, r * w + (c + w - 1) % w];
                if r > 0 {
                    nb.push(i - w);
                }
                if r + 1 < h {
                    nb.push(i + w);
                }
                for j in nb {
                    if mask.bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        n
    }

    #[test]
    fn single_bed_is_one_blob_and_hidden_objects_vanish() {
        let lib = ModelLibrary::default();
        let mut s = square_room(3.0, 1.0);
        s.objects.push(SceneObject::from_library(&lib, "bed-01", Vec2::new(1.5, 0.5), 180.0).unwrap());
        let m = render_object_masks(&s, PanoSize::new(512, 256), &lib).unwrap();
        assert!(m.count() > 100);
        assert_eq!(components(&m), 1);

        let mut outside = square_room(3.0, 1.0);
        outside.objects.push(SceneObject::from_library(&lib, "tv-01", Vec2::new(5.0, 0.0), 0.0).unwrap());
        assert_eq!(render_object_masks(&outside, SIZE, &lib).unwrap().count(), 0);
    }

    #[test]
    fn nearer_object_occludes_farther_one() {
        let lib = ModelLibrary::default();
        let mut s = square_room(3.5, 1.0);
        s.objects.push(SceneObject::from_library(&lib, "bed-01", Vec2::new(2.8, 0.0), 180.0).unwrap());
        s.objects.push(SceneObject::from_library(&lib, "chair-01", Vec2::new(1.2, 0.1), 180.0).unwrap());
        let size = PanoSize::new(512, 256);
        let ids = render_object_ids(&s, size, &lib).unwrap();
        let alone = |k: usize| {
            let one = SceneParameters { objects: vec![s.objects[k].clone()], ..s.clone() };
            render_object_masks(&one, size, &lib).unwrap()
        };
        let (bed, chair) = (alone(0), alone(1));
        let overlap = bed.bits.iter().zip(&chair.bits).filter(|(a, b)| **a && **b).count();
        assert!(overlap > 50, "{overlap}");
        for i in 0..size.len() {
            let expected = if chair.bits[i] {
                Some(1)
            } else if bed.bits[i] {
                Some(0)
            } else {
                None
            };
            assert_eq!(ids[i], expected, "pixel {i}");
        }
    }

    #[test]
    fn model_views_are_deterministic_and_filled() {
        let lib = ModelLibrary::default();
        for m in &lib.models {
            let a = render_model_view(&lib, &m.id, 27.0, 15.0, 48).unwrap();
            let b = render_model_view(&lib, &m.id, 27.0, 15.0, 48).unwrap();
            assert_eq!(a, b);
            assert!(a.silhouette.iter().any(|&s| s));
            for (i, v) in a.image.data.iter().enumerate() {
                if *v > 0.0 {
                    assert!(a.silhouette[i]);
                }
            }
        }
        assert!(matches!(render_model_view(&lib, "sofa-9", 0.0, 0.0, 48), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn symmetric_models_mirror_with_yaw() {
        let lib = ModelLibrary::default();
        for id in ["bed-01", "chair-01", "tv-01"] {
            let a = render_model_view(&lib, id, 36.0, 20.0, 48).unwrap();
            let b = render_model_view(&lib, id, -36.0, 20.0, 48).unwrap();
            for y in 0..48 {
                for x in 0..48 {
                    assert_eq!(a.silhouette[y * 48 + x], b.silhouette[y * 48 + 47 - x], "{id} ({x},{y})");
                }
            }
        }
    }
}
