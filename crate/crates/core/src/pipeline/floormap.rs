//! Top-down SVG floor map of a scene.

use std::fmt::Write as _;

use crate::geometry::Vec2;
use crate::scene::{ObjectClass, SceneParameters};

/// SVG units per metre.
pub const PX_PER_M: f64 = 100.0;
const MARGIN: f64 = 40.0;

fn color(class: ObjectClass) -> &'static str {
    match class {
        ObjectClass::Bed => "#4e79a7",
        ObjectClass::Chair => "#f28e2b",
        ObjectClass::Tv => "#e15759",
        ObjectClass::Plant => "#59a14f",
    }
}

/// Walls as one polygon, objects as rotated rectangles with a facing arrow
/// (none for plants), a 1 m scale bar and the camera as a circle.
pub fn floormap_svg(scene: &SceneParameters) -> String {
    let mut pts: Vec<Vec2> = scene.polygon();
    pts.push(Vec2::ZERO);
    for o in &scene.objects {
        pts.extend(o.footprint().corners());
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let map = |p: Vec2| (MARGIN + (p.x - lo.x) * PX_PER_M, MARGIN + (hi.y - p.y) * PX_PER_M);
    let width = 2.0 * MARGIN + (hi.x - lo.x) * PX_PER_M;
    let height = 3.0 * MARGIN + (hi.y - lo.y) * PX_PER_M;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ =
        writeln!(s, r#"  <rect class="background" x="0" y="0" width="{width:.1}" height="{height:.1}" fill="white"/>"#);
    let poly: Vec<String> = scene
        .polygon()
        .into_iter()
        .map(|p| {
            let (x, y) = map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        s,
        r##"  <polygon class="walls" points="{}" fill="#f4f1ea" stroke="black" stroke-width="3"/>"##,
        poly.join(" ")
    );
    for o in &scene.objects {
        let (cx, cy) = map(o.position);
        let (along, across) = (o.depth * PX_PER_M, o.width * PX_PER_M);
        let _ = writeln!(
            s,
            r#"  <rect class="object {}" x="{:.2}" y="{:.2}" width="{along:.2}" height="{across:.2}" transform="rotate({:.3} {cx:.2} {cy:.2})" fill="{}" fill-opacity="0.6" stroke="black"/>"#,
            o.class,
            cx - 0.5 * along,
            cy - 0.5 * across,
            -o.yaw_deg,
            color(o.class)
        );
        if o.class.has_orientation() {
            let n = o.normal();
            let tip = o.position + n * (0.5 * o.depth + 0.25);
            let back = tip - n * 0.15;
            let side = n.perp() * 0.08;
            let (a, b, l, r, t) = (map(o.position), map(back), map(back + side), map(back - side), map(tip));
            let _ = writeln!(
                s,
                r#"  <path class="arrow" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" stroke="black" stroke-width="2" fill="black"/>"#,
                a.0, a.1, b.0, b.1, l.0, l.1, t.0, t.1, r.0, r.1
            );
        }
    }
    let (cx, cy) = map(Vec2::ZERO);
    let _ = writeln!(s, r#"  <circle class="camera" cx="{cx:.2}" cy="{cy:.2}" r="6" fill="black"/>"#);
    let y = height - MARGIN;
    let _ = writeln!(
        s,
        r#"  <line class="scale-bar" x1="{MARGIN:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="4"/>"#,
        MARGIN + PX_PER_M
    );
    let _ =
        writeln!(s, r#"  <text x="{MARGIN:.2}" y="{:.2}" font-family="sans-serif" font-size="14">1 m</text>"#, y - 8.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelLibrary;
    use crate::scene::{walls_from_polygon, CameraModel, SceneObject};

    fn square_with_bed() -> SceneParameters {
        let poly = [Vec2::new(-2.0, -2.0), Vec2::new(2.0, -2.0), Vec2::new(2.0, 2.0), Vec2::new(-2.0, 2.0)];
        let bed = SceneObject::from_library(&ModelLibrary::default(), "bed-01", Vec2::new(1.0, 1.0), 180.0).unwrap();
        SceneParameters {
            camera: CameraModel::default(),
            lambda: 1.0,
            walls: walls_from_polygon(&poly, 2.5),
            objects: vec![bed],
        }
    }

    #[test]
    fn element_counts_and_determinism() {
        let scene = square_with_bed();
        let svg = floormap_svg(&scene);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches(r#"<rect class="object"#).count(), 1);
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 1);
        assert_eq!(svg.matches(r#"class="camera""#).count(), 1);
        assert_eq!(svg, floormap_svg(&scene));
    }

    #[test]
    fn scale_bar_matches_wall_lengths() {
        let svg = floormap_svg(&square_with_bed());
        let attr = |tag: &str, name: &str| -> f64 {
            let at = svg.find(tag).unwrap();
            let rest = &svg[at..];
            let key = format!(" {name}=\"");
            let i = rest.find(&key).unwrap() + key.len();
            rest[i..].split('"').next().unwrap().parse().unwrap()
        };
        let bar = attr(r#"class="scale-bar""#, "x2") - attr(r#"class="scale-bar""#, "x1");
        assert!((bar - PX_PER_M).abs() < 1e-9);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let xy: Vec<(f64, f64)> = points
            .split(' ')
            .map(|p| {
                let mut it = p.split(',').map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        // 4 m walls
        let side = (xy[1].0 - xy[0].0).hypot(xy[1].1 - xy[0].1);
        assert!((side / bar - 4.0).abs() < 1e-3);
    }
}
