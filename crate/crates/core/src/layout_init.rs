//! Initial layout from the observed orientation panorama, plus oracle
//! object detections.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    is_manhattan_polygon, is_simple_polygon, point_segment_distance, signed_area, wrap_deg, Vec2, Vec3,
};
use crate::models::ModelLibrary;
use crate::projection::{backproject_floor_pixel, pano_pixel_index, pano_to_views, PanoSize, PerspectiveView};
use crate::render::{ray_segment, render_object_ids, Mask, OrientationPanorama, LABEL_HORIZONTAL, LABEL_MASKED};
use crate::scene::{
    walls_from_polygon, CameraModel, ObjectClass, SceneObject, SceneParameters, Wall, WallAxis, REFERENCE_WALL_HEIGHT,
};

/// Orientation labels resampled into a perspective view.
#[derive(Debug, Clone)]
pub struct ViewLabels {
    pub view: PerspectiveView,
    pub labels: Vec<u8>,
    /// Source panorama pixel for every view pixel.
    pub pano_pixel: Vec<(usize, usize)>,
}

pub fn sample_view(pano: &OrientationPanorama, view: PerspectiveView) -> ViewLabels {
    let n = view.width * view.height;
    let mut labels = Vec::with_capacity(n);
    let mut pano_pixel = Vec::with_capacity(n);
    for y in 0..view.height {
        for x in 0..view.width {
            let dir = view.pixel_to_direction((x as f64 + 0.5, y as f64 + 0.5));
            let (c, r) = pano_pixel_index(dir, pano.size);
            labels.push(pano.get(c, r));
            pano_pixel.push((c, r));
        }
    }
    ViewLabels { view, labels, pano_pixel }
}

#[derive(Debug, Clone)]
pub struct ViewCloud {
    pub view: PerspectiveView,
    /// Floor-contact points at unit camera height.
    pub points: Vec<Vec3>,
    pub pano_pixel: Vec<(usize, usize)>,
}

/// Best split of a column into non-floor above and floor below `b`.
fn floor_step(column: impl Iterator<Item = u8> + Clone, start: usize, end: usize) -> usize {
    // cost(b) = floor pixels above b + non-floor pixels from b on
    let mut cost: i64 = column.clone().filter(|&l| l != LABEL_MASKED && l != LABEL_HORIZONTAL).count() as i64;
    let mut best = (cost, start);
    for (i, l) in column.enumerate() {
        match l {
            LABEL_HORIZONTAL => cost += 1,
            LABEL_MASKED => {}
            _ => cost -= 1,
        }
        if cost < best.0 {
            best = (cost, start + i + 1);
        }
    }
    debug_assert!(best.1 <= end);
    best.1
}

/// Back-projects the wall/floor boundary of every view column.
pub fn extract_floor_boundary(view: &ViewLabels) -> Result<ViewCloud> {
    let (w, h) = (view.view.width, view.view.height);
    let horizon = h.div_ceil(2);
    let unit = CameraModel { height: 1.0 };
    let mut points = Vec::new();
    let mut pano_pixel = Vec::new();
    for x in 0..w {
        let column = (horizon..h).map(|y| view.labels[y * w + x]);
        let b = floor_step(column, horizon, h);
        // a boundary at the horizon has no floor intersection
        if b >= h || b <= horizon {
            continue;
        }
        let dir = view.view.pixel_to_direction((x as f64 + 0.5, b as f64));
        if let Ok(p) = backproject_floor_pixel(dir, &unit) {
            points.push(p);
            pano_pixel.push(view.pano_pixel[b * w + x]);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(ViewCloud { view: view.view, points, pano_pixel })
}

/// The same panorama column seen in two views.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Correspondence {
    pub view_a: usize,
    pub point_a: usize,
    pub view_b: usize,
    pub point_b: usize,
}

/// Pairs boundary points of different views that stem from one panorama column.
pub fn view_correspondences(clouds: &[ViewCloud]) -> Vec<Correspondence> {
    let columns: Vec<HashMap<usize, usize>> = clouds
        .iter()
        .map(|c| {
            let mut m = HashMap::new();
            for (i, px) in c.pano_pixel.iter().enumerate() {
                m.entry(px.0).or_insert(i);
            }
            m
        })
        .collect();
    let mut out = Vec::new();
    for a in 0..clouds.len() {
        for b in a + 1..clouds.len() {
            let mut shared: Vec<_> =
                columns[a].iter().filter_map(|(col, &ia)| columns[b].get(col).map(|&ib| (*col, ia, ib))).collect();
            shared.sort_unstable();
            out.extend(shared.into_iter().map(|(_, ia, ib)| Correspondence {
                view_a: a,
                point_a: ia,
                view_b: b,
                point_b: ib,
            }));
        }
    }
    out
}

pub const MIN_CORRESPONDENCES: usize = 10;

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-15 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Per-view scale factors with the first view fixed at 1.
pub fn align_view_clouds(clouds: &[ViewCloud], correspondences: &[Correspondence]) -> Result<Vec<f64>> {
    let k = clouds.len();
    if k == 0 {
        return Err(Error::UnderConstrained("no views".into()));
    }
    // pairwise sufficient statistics: S_aa, S_ab, S_bb
    let mut stats: BTreeMap<(usize, usize), (f64, f64, f64, usize)> = BTreeMap::new();
    for c in correspondences {
        let pa = clouds[c.view_a].points[c.point_a];
        let pb = clouds[c.view_b].points[c.point_b];
        let e = stats.entry((c.view_a, c.view_b)).or_default();
        e.0 += pa.dot(pa);
        e.1 += pa.dot(pb);
        e.2 += pb.dot(pb);
        e.3 += 1;
    }
    stats.retain(|_, s| s.3 >= MIN_CORRESPONDENCES);

    // propagate closed-form ratios outward from view 0
    let mut scale = vec![f64::NAN; k];
    scale[0] = 1.0;
    let mut frontier = vec![0];
    while let Some(a) = frontier.pop() {
        for (&(i, j), s) in stats.iter().filter(|((i, j), _)| *i == a || *j == a) {
            if i == a && scale[j].is_nan() {
                scale[j] = scale[a] * s.1 / s.2;
                frontier.push(j);
            } else if j == a && scale[i].is_nan() {
                scale[i] = scale[a] * s.1 / s.0;
                frontier.push(i);
            }
        }
    }
    if let Some(v) = scale.iter().position(|s| s.is_nan()) {
        return Err(Error::UnderConstrained(format!(
            "view {v} shares fewer than {MIN_CORRESPONDENCES} correspondences with the others"
        )));
    }
    if k == 1 {
        return Ok(scale);
    }

    // joint least squares over s_1..s_{k-1}
    let n = k - 1;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (&(i, j), s) in &stats {
        // residual s_i p_i - s_j p_j
        let terms = [(i, j, s.0, s.1), (j, i, s.2, s.1)];
        for (u, v, suu, suv) in terms {
            if u == 0 {
                continue;
            }
            a[u - 1][u - 1] += suu;
            if v == 0 {
                b[u - 1] += suv;
            } else {
                a[u - 1][v - 1] -= suv;
            }
        }
    }
    let refined = solve_dense(a, b).ok_or_else(|| Error::UnderConstrained("singular alignment system".into()))?;
    scale[1..].copy_from_slice(&refined);
    Ok(scale)
}

/// Scaled floor points of all views in the camera frame, de-duplicated per panorama column.
pub fn merge_clouds(clouds: &[ViewCloud], scales: &[f64], camera_height: f64) -> Vec<Vec2> {
    let mut by_column: HashMap<usize, (Vec2, usize)> = HashMap::new();
    for (c, s) in clouds.iter().zip(scales) {
        for (p, px) in c.points.iter().zip(&c.pano_pixel) {
            let e = by_column.entry(px.0).or_insert((Vec2::ZERO, 0));
            e.0 = e.0 + p.xy() * (s * camera_height);
            e.1 += 1;
        }
    }
    let mut cols: Vec<_> = by_column.into_iter().collect();
    cols.sort_unstable_by_key(|(c, _)| *c);
    cols.into_iter().map(|(_, (sum, n))| sum * (1.0 / n as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WallFitConfig {
    /// Inlier distance for the greedy line search, metres.
    pub inlier_tau: f64,
    pub max_icp_iterations: usize,
    /// Parallel neighbouring lines closer than this are merged.
    pub merge_distance: f64,
    pub min_run: usize,
    pub normal_window: usize,
    /// Azimuth gap that leaves the outline open.
    pub max_gap_deg: f64,
}

impl Default for WallFitConfig {
    fn default() -> Self {
        WallFitConfig {
            inlier_tau: 0.03,
            max_icp_iterations: 50,
            merge_distance: 0.15,
            min_run: 4,
            normal_window: 4,
            max_gap_deg: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Line {
    axis: WallAxis,
    offset: f64,
}

fn coord(axis: WallAxis, p: Vec2) -> f64 {
    match axis {
        WallAxis::X => p.x,
        WallAxis::Y => p.y,
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Snapped normal axis of each point from a local principal direction.
fn snapped_axes(pts: &[Vec2], closed: bool, half: usize) -> Vec<WallAxis> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let idx: Vec<usize> = (-(half as i64)..=half as i64)
                .filter_map(|o| {
                    let j = i as i64 + o;
                    if closed {
                        Some(j.rem_euclid(n as i64) as usize)
                    } else {
                        (0..n as i64).contains(&j).then_some(j as usize)
                    }
                })
                .collect();
            let m = idx.iter().fold(Vec2::ZERO, |a, &j| a + pts[j]) * (1.0 / idx.len() as f64);
            let (mut sxx, mut syy) = (0.0, 0.0);
            for &j in &idx {
                let d = pts[j] - m;
                sxx += d.x * d.x;
                syy += d.y * d.y;
            }
            // a wall running along x has its normal along y
            if sxx >= syy {
                WallAxis::Y
            } else {
                WallAxis::X
            }
        })
        .collect()
}

fn smooth_axes(axes: &[WallAxis], closed: bool) -> Vec<WallAxis> {
    let n = axes.len();
    (0..n)
        .map(|i| {
            let mut x = 0;
            let mut total = 0;
            for o in -2i64..=2 {
                let j = i as i64 + o;
                let j = if closed {
                    j.rem_euclid(n as i64)
                } else if (0..n as i64).contains(&j) {
                    j
                } else {
                    continue;
                };
                total += 1;
                if axes[j as usize] == WallAxis::X {
                    x += 1;
                }
            }
            if 2 * x > total {
                WallAxis::X
            } else if 2 * x < total {
                WallAxis::Y
            } else {
                axes[i]
            }
        })
        .collect()
}

/// Maximal runs `(start, len, axis)` of equal labels in sequence order.
fn runs(axes: &[WallAxis], closed: bool) -> Vec<(usize, usize, WallAxis)> {
    let n = axes.len();
    let mut out: Vec<(usize, usize, WallAxis)> = Vec::new();
    for (i, &a) in axes.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.2 == a => r.1 += 1,
            _ => out.push((i, 1, a)),
        }
    }
    if closed && out.len() > 1 && out[0].2 == out[out.len() - 1].2 {
        let last = out.pop().expect("non-empty");
        out[0] = (last.0, last.1 + out[0].1, last.2);
    }
    if closed && out.len() == 1 {
        out[0].1 = n;
    }
    out
}

fn intersect(a: Line, b: Line) -> Vec2 {
    match (a.axis, b.axis) {
        (WallAxis::X, WallAxis::Y) => Vec2::new(a.offset, b.offset),
        (WallAxis::Y, WallAxis::X) => Vec2::new(b.offset, a.offset),
        _ => unreachable!("consecutive lines alternate axes"),
    }
}

fn project(line: Line, p: Vec2) -> Vec2 {
    match line.axis {
        WallAxis::X => Vec2::new(line.offset, p.y),
        WallAxis::Y => Vec2::new(p.x, line.offset),
    }
}

/// Outline vertices: closed polygons have one vertex per line, open chains one more.
fn outline(lines: &[Line], closed: bool, first: Vec2, last: Vec2) -> Vec<Vec2> {
    let n = lines.len();
    if closed {
        (0..n).map(|i| intersect(lines[(i + n - 1) % n], lines[i])).collect()
    } else {
        let mut v = vec![project(lines[0], first)];
        v.extend((1..n).map(|i| intersect(lines[i - 1], lines[i])));
        v.push(project(lines[n - 1], last));
        v
    }
}

/// Fits Manhattan walls to floor-contact points seen from the origin.
///
/// Points may come in any order. When they cover the full circle the result
/// is a closed counter-clockwise polygon; otherwise an open chain.
pub fn fit_walls(points: &[Vec2], cfg: &WallFitConfig, height: f64) -> Result<Vec<Wall>> {
    if points.len() < 2 {
        return Err(Error::DegenerateLayout(format!("{} points", points.len())));
    }
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.angle_deg().total_cmp(&b.angle_deg()));
    let n = pts.len();
    // open the sequence at the widest azimuth gap
    let (gap_at, gap) = (0..n)
        .map(|i| (i, wrap_deg(pts[(i + 1) % n].angle_deg() - pts[i].angle_deg())))
        .map(|(i, g)| {
            (
                i,
                if n == 1 {
                    360.0
                } else if g == 0.0 && i == n - 1 {
                    360.0
                } else {
                    g
                },
            )
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 2");
    let closed = gap <= cfg.max_gap_deg;
    if !closed {
        pts.rotate_left((gap_at + 1) % n);
    }

    let axes = smooth_axes(&snapped_axes(&pts, closed, cfg.normal_window), closed);
    let mut candidates: Vec<_> = runs(&axes, closed).into_iter().filter(|r| r.1 >= cfg.min_run).collect();
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    // greedy: largest run first, claim inliers of each accepted line
    let mut claimed = vec![false; n];
    let mut accepted: Vec<(usize, usize, Line)> = Vec::new();
    for (start, len, axis) in candidates {
        let members: Vec<usize> = (start..start + len).map(|i| i % n).filter(|&i| !claimed[i]).collect();
        if members.len() < cfg.min_run {
            continue;
        }
        let offset = median(&mut members.iter().map(|&i| coord(axis, pts[i])).collect::<Vec<_>>());
        for i in 0..n {
            if axes[i] == axis && (coord(axis, pts[i]) - offset).abs() < cfg.inlier_tau {
                claimed[i] = true;
            }
        }
        for &i in &members {
            claimed[i] = true;
        }
        accepted.push((start, len, Line { axis, offset }));
    }
    accepted.sort_by_key(|a| a.0);

    // merge neighbours on the same axis, bridge distinct ones with a connector
    let mut lines: Vec<(Line, usize, usize)> = Vec::new();
    for (start, len, line) in accepted {
        if let Some(prev) = lines.last_mut() {
            if prev.0.axis == line.axis {
                if (prev.0.offset - line.offset).abs() < cfg.merge_distance {
                    let w = (prev.2 - prev.1 + 1) as f64;
                    prev.0.offset = (prev.0.offset * w + line.offset * len as f64) / (w + len as f64);
                    prev.2 = start + len - 1;
                    continue;
                }
                let near_end = if prev.0.offset.abs() < line.offset.abs() { pts[prev.2 % n] } else { pts[start % n] };
                let other = match line.axis {
                    WallAxis::X => WallAxis::Y,
                    WallAxis::Y => WallAxis::X,
                };
                lines.push((Line { axis: other, offset: coord(other, near_end) }, start, start));
            }
        }
        lines.push((line, start, start + len - 1));
    }
    if closed && lines.len() > 1 && lines[0].0.axis == lines[lines.len() - 1].0.axis {
        let (first, last) = (lines[0].0, lines[lines.len() - 1].0);
        if (first.offset - last.offset).abs() < cfg.merge_distance {
            lines.pop();
        } else {
            let other = match first.axis {
                WallAxis::X => WallAxis::Y,
                WallAxis::Y => WallAxis::X,
            };
            let near = if last.offset.abs() < first.offset.abs() {
                pts[lines[lines.len() - 1].2 % n]
            } else {
                pts[lines[0].1 % n]
            };
            lines.push((Line { axis: other, offset: coord(other, near) }, 0, 0));
        }
    }
    let mut lines: Vec<Line> = lines.into_iter().map(|l| l.0).collect();
    let min_lines = if closed { 4 } else { 2 };
    if lines.len() < min_lines {
        return Err(Error::DegenerateLayout(format!("only {} wall line(s) found", lines.len())));
    }

    // ICP: nearest-edge assignment, per-line refit, until stable
    let (first, last) = (pts[0], pts[n - 1]);
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..cfg.max_icp_iterations {
        let verts = outline(&lines, closed, first, last);
        let edge = |j: usize| if closed { (verts[j], verts[(j + 1) % verts.len()]) } else { (verts[j], verts[j + 1]) };
        let next: Vec<usize> = pts
            .iter()
            .map(|&p| {
                (0..lines.len())
                    .map(|j| {
                        let (a, b) = edge(j);
                        (j, point_segment_distance(p, a, b))
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("lines exist")
                    .0
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        for (j, line) in lines.iter_mut().enumerate() {
            let c: Vec<f64> =
                pts.iter().zip(&assignment).filter(|(_, &a)| a == j).map(|(p, _)| coord(line.axis, *p)).collect();
            if c.len() >= 2 {
                line.offset = c.iter().sum::<f64>() / c.len() as f64;
            }
        }
    }

    // rotate closed outlines so the first line's ordering does not depend on azimuth 0
    let verts = outline(&lines, closed, first, last);
    if closed {
        if !is_simple_polygon(&verts) || !is_manhattan_polygon(&verts, 1e-6) || signed_area(&verts) <= 0.0 {
            return Err(Error::DegenerateLayout(
                "fitted outline is not a simple counter-clockwise Manhattan polygon".into(),
            ));
        }
        Ok(walls_from_polygon(&verts, height))
    } else {
        Ok(verts.windows(2).map(|w| Wall::new(w[0], w[1], height)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct LayoutEstimate {
    pub walls: Vec<Wall>,
    pub clouds: Vec<ViewCloud>,
    pub scales: Vec<f64>,
    /// Merged metric floor-contact points.
    pub points: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    pub count: usize,
    pub fov_deg: f64,
    pub overlap_deg: f64,
}

impl Default for ViewConfig {
    fn default() -> Self {
        ViewConfig { count: 6, fov_deg: 90.0, overlap_deg: 30.0 }
    }
}

/// Views → floor clouds → scale alignment → wall fit, at unit scale (λ = 1).
pub fn estimate_layout(
    pano: &OrientationPanorama,
    camera: &CameraModel,
    views: &ViewConfig,
    fit: &WallFitConfig,
) -> Result<LayoutEstimate> {
    let views = pano_to_views(pano.size.width, pano.size.height, views.count, views.fov_deg, views.overlap_deg)?;
    let clouds =
        views.into_iter().map(|v| extract_floor_boundary(&sample_view(pano, v))).collect::<Result<Vec<_>>>()?;
    let scales = align_view_clouds(&clouds, &view_correspondences(&clouds))?;
    let points = merge_clouds(&clouds, &scales, camera.height);
    let walls = fit_walls(&points, fit, REFERENCE_WALL_HEIGHT)?;
    Ok(LayoutEstimate { walls, clouds, scales, points })
}

/// Axis-aligned panorama box in continuous pixel coordinates. `x0 > x1`
/// means the box wraps around the azimuth seam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub class: ObjectClass,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub score: f64,
    pub bearing_deg: f64,
}

impl Detection {
    pub fn new(class: ObjectClass, (x0, y0, x1, y1): (f64, f64, f64, f64), score: f64, size: PanoSize) -> Self {
        let w = size.width as f64;
        let span = (x1 - x0).rem_euclid(w);
        let center = (x0 + 0.5 * span).rem_euclid(w);
        Detection { class, x0, y0, x1, y1, score, bearing_deg: center / w * 360.0 }
    }

    pub fn width_px(&self, size: PanoSize) -> f64 {
        (self.x1 - self.x0).rem_euclid(size.width as f64)
    }

    pub fn contains(&self, col: usize, row: usize, size: PanoSize) -> bool {
        let (u, v) = (col as f64 + 0.5, row as f64 + 0.5);
        if v < self.y0 || v > self.y1 {
            return false;
        }
        (u - self.x0).rem_euclid(size.width as f64) <= self.width_px(size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionNoise {
    pub jitter_px: f64,
    pub miss_rate: f64,
}

impl Default for DetectionNoise {
    fn default() -> Self {
        DetectionNoise { jitter_px: 4.0, miss_rate: 0.0 }
    }
}

/// Circular column interval `[start, end)` covering all occupied columns.
fn column_cover(cols: &[bool]) -> Option<(usize, usize)> {
    let w = cols.len();
    let occupied: Vec<usize> = (0..w).filter(|&c| cols[c]).collect();
    if occupied.is_empty() {
        return None;
    }
    // the widest empty gap is left outside the box
    let (i, _) = (0..occupied.len())
        .map(|i| (i, (occupied[(i + 1) % occupied.len()] + w - occupied[i] - 1) % w))
        .max_by_key(|&(i, g)| (g, std::cmp::Reverse(i)))
        .expect("non-empty");
    let start = occupied[(i + 1) % occupied.len()];
    let end = occupied[i] + 1;
    Some((start, end))
}

/// Exact bounding boxes of every visible object's silhouette, with its index.
pub fn silhouette_boxes(
    scene: &SceneParameters,
    size: PanoSize,
    library: &ModelLibrary,
) -> Result<Vec<(usize, (f64, f64, f64, f64))>> {
    let ids = render_object_ids(scene, size, library)?;
    let mut out = Vec::new();
    for k in 0..scene.objects.len() {
        let mut cols = vec![false; size.width];
        let (mut r0, mut r1) = (usize::MAX, 0);
        for (idx, id) in ids.iter().enumerate() {
            if *id == Some(k as u16) {
                cols[idx % size.width] = true;
                r0 = r0.min(idx / size.width);
                r1 = r1.max(idx / size.width);
            }
        }
        if let Some((c0, c1)) = column_cover(&cols) {
            let x1 = if c1 == size.width { size.width as f64 } else { c1 as f64 };
            out.push((k, (c0 as f64, r0 as f64, x1, (r1 + 1) as f64)));
        }
    }
    Ok(out)
}

/// Oracle detections: silhouette bounds with Gaussian edge jitter and random misses.
pub fn simulate_detections(
    scene: &SceneParameters,
    size: PanoSize,
    library: &ModelLibrary,
    noise: &DetectionNoise,
    seed: u64,
) -> Result<Vec<Detection>> {
    Ok(simulate_indexed_detections(scene, size, library, noise, seed)?.into_iter().map(|(_, d)| d).collect())
}

/// [`simulate_detections`] paired with the index of the object each box came from.
pub fn simulate_indexed_detections(
    scene: &SceneParameters,
    size: PanoSize,
    library: &ModelLibrary,
    noise: &DetectionNoise,
    seed: u64,
) -> Result<Vec<(usize, Detection)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.jitter_px.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let (w, h) = (size.width as f64, size.height as f64);
    let mut out = Vec::new();
    for (k, (x0, y0, x1, y1)) in silhouette_boxes(scene, size, library)? {
        let jitter: [f64; 4] = std::array::from_fn(|_| normal.sample(&mut rng));
        if rng.random_bool(noise.miss_rate.clamp(0.0, 1.0)) {
            continue;
        }
        let span = (x1 - x0).rem_euclid(w);
        let full = span == 0.0 && x1 > x0;
        let (bx0, bx1) = if full {
            (0.0, w)
        } else {
            let a = x0 + jitter[0];
            let b = (x0 + span + jitter[2]).max(a + 1.0);
            (a.rem_euclid(w), if b - a >= w { (a + w - 1.0).rem_euclid(w) } else { b.rem_euclid(w) })
        };
        let by0 = (y0 + jitter[1]).clamp(0.0, h - 1.0);
        let by1 = (y1 + jitter[3]).clamp(by0 + 1.0, h);
        out.push((k, Detection::new(scene.objects[k].class, (bx0, by0, bx1, by1), 1.0, size)));
    }
    Ok(out)
}

/// Union of detection boxes, the observed-side object mask.
pub fn rasterize_detections(detections: &[Detection], size: PanoSize) -> Mask {
    let mut mask = Mask::empty(size);
    for row in 0..size.height {
        for col in 0..size.width {
            mask.bits[row * size.width + col] = detections.iter().any(|d| d.contains(col, row, size));
        }
    }
    mask
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionFile {
    pub class: ObjectClass,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub score: f64,
}

pub fn save_detections(dets: &[Detection], path: &Path) -> Result<()> {
    let file: Vec<DetectionFile> = dets
        .iter()
        .map(|d| DetectionFile { class: d.class, x0: d.x0, y0: d.y0, x1: d.x1, y1: d.y1, score: d.score })
        .collect();
    let mut text = serde_json::to_string_pretty(&file).expect("detections serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_detections(path: &Path, size: PanoSize) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: Vec<DetectionFile> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    Ok(file.into_iter().map(|d| Detection::new(d.class, (d.x0, d.y0, d.x1, d.y1), d.score, size)).collect())
}

/// Fraction of the wall hit distance at which objects start out.
pub const INITIAL_DISTANCE_FRACTION: f64 = 0.6;

/// Distance from the origin to the first wall along an azimuth.
pub fn ray_wall_distance(azimuth_deg: f64, walls: &[Wall]) -> Option<f64> {
    let dir = Vec2::from_angle_deg(azimuth_deg);
    walls.iter().filter_map(|w| ray_segment(dir, w.start, w.end)).min_by(f64::total_cmp)
}

/// Initial hypothesis: fitted walls, every detection placed along its bearing
/// and facing the camera.
pub fn initial_hypothesis(
    walls: &[Wall],
    detections: &[Detection],
    camera: CameraModel,
    library: &ModelLibrary,
) -> Result<SceneParameters> {
    let mut objects = Vec::with_capacity(detections.len());
    for d in detections {
        let hit = ray_wall_distance(d.bearing_deg, walls)
            .ok_or_else(|| Error::DegenerateLayout(format!("bearing {:.1}° leaves the room", d.bearing_deg)))?;
        let pos = Vec2::from_angle_deg(d.bearing_deg) * (INITIAL_DISTANCE_FRACTION * hit);
        let model = library.for_class(d.class)?;
        objects.push(SceneObject::from_library(library, &model.id, pos, wrap_deg(d.bearing_deg + 180.0))?);
    }
    Ok(SceneParameters { camera, lambda: 1.0, walls: walls.to_vec(), objects })
}
