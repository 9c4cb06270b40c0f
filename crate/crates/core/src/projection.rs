//! Equirectangular panorama and pinhole view geometry.
//!
//! Panorama column grows linearly with azimuth (column 0 is azimuth 0°) and
//! row grows linearly as elevation falls from +90° at the top edge. Pixel
//! centres sit at half-integer coordinates. Perspective views use the same
//! handedness so that view columns also grow with azimuth.

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, Vec3};
use crate::scene::CameraModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl SphericalDirection {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        SphericalDirection { azimuth_deg: wrap_deg(azimuth_deg), elevation_deg }
    }

    pub fn to_vector(self) -> Vec3 {
        let (sa, ca) = self.azimuth_deg.to_radians().sin_cos();
        let (se, ce) = self.elevation_deg.to_radians().sin_cos();
        Vec3::new(ce * ca, ce * sa, se)
    }

    pub fn from_vector(v: Vec3) -> Self {
        let h = v.x.hypot(v.y);
        SphericalDirection::new(v.y.atan2(v.x).to_degrees(), v.z.atan2(h).to_degrees())
    }

    /// Great-circle angle between two directions, in degrees.
    pub fn angle_to(self, other: SphericalDirection) -> f64 {
        let (a, b) = (self.to_vector(), other.to_vector());
        // atan2 form stays accurate for tiny angles
        a.cross(b).norm().atan2(a.dot(b)).to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanoSize {
    pub width: usize,
    pub height: usize,
}

impl PanoSize {
    pub const fn new(width: usize, height: usize) -> Self {
        PanoSize { width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Direction through the centre of pixel `(col, row)`.
    pub fn pixel_center_direction(&self, col: usize, row: usize) -> SphericalDirection {
        pano_pixel_to_direction((col as f64 + 0.5, row as f64 + 0.5), *self)
    }

    pub fn column_azimuth(&self, col: usize) -> f64 {
        (col as f64 + 0.5) * 360.0 / self.width as f64
    }

    pub fn row_elevation(&self, row: usize) -> f64 {
        90.0 - (row as f64 + 0.5) * 180.0 / self.height as f64
    }
}

/// Continuous panorama coordinates `(u, v)` of a direction.
pub fn direction_to_pano_pixel(dir: SphericalDirection, size: PanoSize) -> (f64, f64) {
    let u = wrap_deg(dir.azimuth_deg) / 360.0 * size.width as f64;
    let v = (90.0 - dir.elevation_deg) / 180.0 * size.height as f64;
    (u, v)
}

pub fn pano_pixel_to_direction(px: (f64, f64), size: PanoSize) -> SphericalDirection {
    SphericalDirection::new(px.0 / size.width as f64 * 360.0, 90.0 - px.1 / size.height as f64 * 180.0)
}

/// Nearest pixel index for a direction.
pub fn pano_pixel_index(dir: SphericalDirection, size: PanoSize) -> (usize, usize) {
    let (u, v) = direction_to_pano_pixel(dir, size);
    let col = (u.floor() as i64).rem_euclid(size.width as i64) as usize;
    let row = (v.floor() as i64).clamp(0, size.height as i64 - 1) as usize;
    (col, row)
}

/// Pinhole view with zero roll and the principal point at the image centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveView {
    pub yaw_center_deg: f64,
    /// Horizontal field of view.
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl PerspectiveView {
    pub fn focal(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.fov_deg.to_radians()).tan()
    }

    fn axes(&self) -> (Vec3, Vec3, Vec3) {
        let (s, c) = self.yaw_center_deg.to_radians().sin_cos();
        let forward = Vec3::new(c, s, 0.0);
        // towards increasing azimuth
        let left = Vec3::new(-s, c, 0.0);
        (forward, left, Vec3::new(0.0, 0.0, 1.0))
    }

    pub fn pixel_to_direction(&self, px: (f64, f64)) -> SphericalDirection {
        let (f, l, up) = self.axes();
        let focal = self.focal();
        let x = (px.0 - 0.5 * self.width as f64) / focal;
        let y = (px.1 - 0.5 * self.height as f64) / focal;
        SphericalDirection::from_vector(f + l * x - up * y)
    }

    pub fn direction_to_pixel(&self, dir: SphericalDirection) -> Result<(f64, f64)> {
        let (f, l, up) = self.axes();
        let v = dir.to_vector();
        let depth = v.dot(f);
        if depth <= 1e-12 {
            return Err(Error::OutOfFrustum);
        }
        let focal = self.focal();
        let u = 0.5 * self.width as f64 + focal * v.dot(l) / depth;
        let w = 0.5 * self.height as f64 - focal * v.dot(up) / depth;
        if u < 0.0 || u > self.width as f64 || w < 0.0 || w > self.height as f64 {
            return Err(Error::OutOfFrustum);
        }
        Ok((u, w))
    }
}

/// Vertical field of view covered by the views produced by [`pano_to_views`].
pub const VIEW_VERTICAL_FOV_DEG: f64 = 120.0;

/// Split a panorama into `k` views spaced `fov - overlap` degrees apart,
/// starting at azimuth 0°.
pub fn pano_to_views(
    pano_width: usize,
    _pano_height: usize,
    k: usize,
    fov_deg: f64,
    overlap_deg: f64,
) -> Result<Vec<PerspectiveView>> {
    if !(fov_deg > 0.0 && fov_deg < 180.0) {
        return Err(Error::Config(format!("field of view {fov_deg}° must lie in (0, 180)")));
    }
    let step = fov_deg - overlap_deg;
    if k == 0 || (k as f64 * step - 360.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{k} views of {fov_deg}° with {overlap_deg}° overlap do not tile 360°")));
    }
    let width = ((pano_width as f64 * fov_deg / 360.0).round() as usize).max(16);
    let half_v = (0.5 * VIEW_VERTICAL_FOV_DEG).to_radians().tan();
    let half_h = (0.5 * fov_deg).to_radians().tan();
    let height = ((width as f64 * half_v / half_h).round() as usize).max(16);
    Ok((0..k).map(|i| PerspectiveView { yaw_center_deg: i as f64 * step, fov_deg, width, height }).collect())
}

/// Intersection of the camera ray with the floor plane z = 0.
pub fn backproject_floor_pixel(dir: SphericalDirection, camera: &CameraModel) -> Result<Vec3> {
    if dir.elevation_deg >= 0.0 {
        return Err(Error::NoFloorIntersection { elevation_deg: dir.elevation_deg });
    }
    let e = -dir.elevation_deg.to_radians();
    let dist = if dir.elevation_deg <= -90.0 { 0.0 } else { camera.height * e.cos() / e.sin() };
    let (s, c) = dir.azimuth_deg.to_radians().sin_cos();
    Ok(Vec3::new(dist * c, dist * s, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn six_views_with_thirty_degree_overlap() {
        let views = pano_to_views(2048, 1024, 6, 90.0, 30.0).unwrap();
        let yaws: Vec<f64> = views.iter().map(|v| v.yaw_center_deg).collect();
        assert_eq!(yaws, vec![0.0, 60.0, 120.0, 180.0, 240.0, 300.0]);
        let four = pano_to_views(512, 256, 4, 90.0, 0.0).unwrap();
        assert_eq!(four.iter().map(|v| v.yaw_center_deg).collect::<Vec<_>>(), vec![0.0, 90.0, 180.0, 270.0]);
        assert!(matches!(pano_to_views(2048, 1024, 6, 90.0, 20.0), Err(Error::Config(_))));
    }

    #[test]
    fn optical_axis_and_pano_anchor() {
        let view = PerspectiveView { yaw_center_deg: 60.0, fov_deg: 90.0, width: 128, height: 224 };
        let d = view.pixel_to_direction((64.0, 112.0));
        assert!((d.azimuth_deg - 60.0).abs() < 1e-9 && d.elevation_deg.abs() < 1e-9);
        let size = PanoSize::new(2048, 1024);
        assert_eq!(pano_pixel_to_direction((0.0, 512.0), size).azimuth_deg, 0.0);
        assert_eq!(pano_pixel_index(SphericalDirection::new(359.99, 0.0), size).0, 2047);
        // azimuth periodicity
        assert_eq!(
            pano_pixel_index(SphericalDirection { azimuth_deg: 370.0, elevation_deg: 10.0 }, size),
            pano_pixel_index(SphericalDirection::new(10.0, 10.0), size)
        );
    }

    #[test]
    fn round_trip_stays_below_micro_degree() {
        let view = PerspectiveView { yaw_center_deg: 240.0, fov_deg: 90.0, width: 128, height: 224 };
        let size = PanoSize::new(2048, 1024);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            let px = (rng.random_range(0.0..128.0), rng.random_range(0.0..224.0));
            let dir = view.pixel_to_direction(px);
            let back = pano_pixel_to_direction(direction_to_pano_pixel(dir, size), size);
            worst = worst.max(dir.angle_to(back));
            let px2 = view.direction_to_pixel(back).unwrap();
            assert!((px2.0 - px.0).abs() < 1e-6 && (px2.1 - px.1).abs() < 1e-6);
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn behind_the_view_is_rejected() {
        let view = PerspectiveView { yaw_center_deg: 0.0, fov_deg: 90.0, width: 64, height: 64 };
        assert!(matches!(view.direction_to_pixel(SphericalDirection::new(180.0, 0.0)), Err(Error::OutOfFrustum)));
    }

    #[test]
    fn floor_backprojection() {
        let cam = CameraModel { height: 1.70 };
        let p = backproject_floor_pixel(SphericalDirection::new(0.0, -45.0), &cam).unwrap();
        assert!((p.x - 1.70).abs() < 1e-12 && p.y.abs() < 1e-12 && p.z == 0.0);
        let nadir = backproject_floor_pixel(SphericalDirection::new(0.0, -90.0), &cam).unwrap();
        assert_eq!((nadir.x, nadir.y), (0.0, 0.0));
        assert!(backproject_floor_pixel(SphericalDirection::new(0.0, 0.0), &cam).is_err());
        let mut last = f64::INFINITY;
        for k in 1..90 {
            let d = backproject_floor_pixel(SphericalDirection::new(33.0, -(k as f64)), &cam).unwrap().xy().norm();
            assert!(d < last);
            last = d;
        }
    }
}
