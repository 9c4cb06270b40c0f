//! Planar geometry on the floor plane: points, segments, Manhattan polygons
//! and oriented rectangles with exact convex intersection.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `deg` degrees counter-clockwise from +x.
    pub fn from_angle_deg(deg: f64) -> Self {
        let r = deg.to_radians();
        Vec2::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotate by +90°.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated_deg(self, deg: f64) -> Vec2 {
        let (s, c) = deg.to_radians().sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Angle in degrees in [0, 360).
    pub fn angle_deg(self) -> f64 {
        wrap_deg(self.y.atan2(self.x).to_degrees())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Wrap an angle into [0, 360).
pub fn wrap_deg(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Minimal circular difference between two angles, in [0, 180].
pub fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Shoelace signed area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the boundary of a closed polygon.
pub fn distance_to_boundary(p: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// True when no two non-adjacent edges touch and no edge is degenerate.
pub fn is_simple_polygon(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if poly[i] == poly[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// True when every edge is parallel to the x or y axis and consecutive
/// edges are perpendicular.
pub fn is_manhattan_polygon(poly: &[Vec2], tol: f64) -> bool {
    let n = poly.len();
    if n < 4 || n % 2 != 0 {
        return false;
    }
    let horizontal = |i: usize| {
        let d = poly[(i + 1) % n] - poly[i];
        if d.y.abs() <= tol {
            Some(true)
        } else if d.x.abs() <= tol {
            Some(false)
        } else {
            None
        }
    };
    (0..n).all(|i| match (horizontal(i), horizontal((i + 1) % n)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    })
}

/// Rectangle on the floor plane, `depth` along the facing axis and `width`
/// across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Vec2,
    pub width: f64,
    pub depth: f64,
    pub yaw_deg: f64,
}

impl OrientedRect {
    pub fn new(center: Vec2, width: f64, depth: f64, yaw_deg: f64) -> Self {
        OrientedRect { center, width, depth, yaw_deg }
    }

    pub fn area(&self) -> f64 {
        self.width * self.depth
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Vec2; 4] {
        let f = Vec2::from_angle_deg(self.yaw_deg) * (self.depth * 0.5);
        let s = Vec2::from_angle_deg(self.yaw_deg + 90.0) * (self.width * 0.5);
        let c = self.center;
        [c - f - s, c + f - s, c + f + s, c - f + s]
    }
}

/// Clip `subject` against a convex counter-clockwise `clip` polygon.
pub fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let edge = b - a;
        let side = |p: Vec2| edge.cross(p - a);
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(prev + (cur - prev) * (sp / (sp - sc)));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(prev + (cur - prev) * (sp / (sp - sc)));
            }
        }
    }
    output
}

/// Exact area of the intersection of two oriented rectangles.
pub fn footprint_intersection_area(a: &OrientedRect, b: &OrientedRect) -> f64 {
    let reach = 0.5 * (a.width.hypot(a.depth) + b.width.hypot(b.depth));
    if a.center.distance(b.center) > reach {
        return 0.0;
    }
    let clipped = clip_convex(&a.corners(), &b.corners());
    if clipped.len() < 3 {
        return 0.0;
    }
    signed_area(&clipped).abs().min(a.area()).min(b.area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(x: f64, y: f64, yaw: f64) -> OrientedRect {
        OrientedRect::new(Vec2::new(x, y), 1.0, 1.0, yaw)
    }

    #[test]
    fn identical_squares_overlap_fully() {
        assert!((footprint_intersection_area(&unit(0.0, 0.0, 0.0), &unit(0.0, 0.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_squares() {
        assert_eq!(footprint_intersection_area(&unit(0.0, 0.0, 0.0), &unit(2.0, 0.0, 0.0)), 0.0);
    }

    /// Monte-Carlo estimate of the overlap of an axis-aligned and a 45°-rotated
    /// unit square; rejection sampling over the axis-aligned square.
    fn monte_carlo_rotated_overlap(samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let half_diag = std::f64::consts::FRAC_1_SQRT_2;
        let mut hits = 0usize;
        for _ in 0..samples {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y: f64 = rng.random_range(-0.5..0.5);
            // a square rotated by 45° is the L1 ball of radius 1/√2
            if x.abs() + y.abs() <= half_diag {
                hits += 1;
            }
        }
        hits as f64 / samples as f64
    }

    #[test]
    fn rotated_square_overlap_matches_monte_carlo() {
        let oracle = monte_carlo_rotated_overlap(10_000_000);
        let exact = footprint_intersection_area(&unit(0.0, 0.0, 0.0), &unit(0.0, 0.0, 45.0));
        assert!((oracle - 0.828_427).abs() < 1e-3, "oracle {oracle}");
        assert!((exact - oracle).abs() < 1e-3, "exact {exact} oracle {oracle}");
        assert!((exact - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn circular_difference_wraps() {
        assert!((circular_diff_deg(1.0, 359.0) - 2.0).abs() < 1e-12);
        assert!((circular_diff_deg(0.0, 180.0) - 180.0).abs() < 1e-12);
        assert_eq!(wrap_deg(-0.0), 0.0);
        assert!((wrap_deg(-90.0) - 270.0).abs() < 1e-12);
    }

    #[test]
    fn simple_and_manhattan_checks() {
        let square = [Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(4.0, 4.0), Vec2::new(0.0, 4.0)];
        assert!(is_simple_polygon(&square));
        assert!(is_manhattan_polygon(&square, 1e-9));
        let bowtie = [Vec2::new(0.0, 0.0), Vec2::new(4.0, 4.0), Vec2::new(4.0, 0.0), Vec2::new(0.0, 4.0)];
        assert!(!is_simple_polygon(&bowtie));
        assert!(signed_area(&square) > 0.0);
        assert!(point_in_polygon(Vec2::new(1.0, 1.0), &square));
        assert!(!point_in_polygon(Vec2::new(5.0, 1.0), &square));
    }

    fn rect_strategy() -> impl Strategy<Value = OrientedRect> {
        (-2.0..2.0f64, -2.0..2.0f64, 0.1..2.5f64, 0.1..2.5f64, 0.0..360.0f64)
            .prop_map(|(x, y, w, d, yaw)| OrientedRect::new(Vec2::new(x, y), w, d, yaw))
    }

    proptest! {
        #[test]
        fn intersection_is_symmetric_and_bounded(a in rect_strategy(), b in rect_strategy()) {
            let ab = footprint_intersection_area(&a, &b);
            let ba = footprint_intersection_area(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ab >= 0.0);
            prop_assert!(ab <= a.area().min(b.area()) + 1e-12);
            prop_assert!((footprint_intersection_area(&a, &a) - a.area()).abs() < 1e-9);
        }
    }
}
