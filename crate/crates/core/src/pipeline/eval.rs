//! Error metrics of estimated scenes against ground truth.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::dataset::{write_text, Manifest, SCENE_FILE};
use super::estimate::{FINAL_FILE, INIT_FILE};
use crate::error::Result;
use crate::geometry::circular_diff_deg;
use crate::models::ModelLibrary;
use crate::scene::{ObjectClass, SceneParameters};

/// Largest centroid distance at which an estimate may claim a ground-truth object.
pub const MATCH_GATE: f64 = 1.0;

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";

/// One-to-one class-constrained matching, nearest pairs first.
/// Returns `(truth index, estimate index)` pairs.
pub fn match_objects(truth: &SceneParameters, estimate: &SceneParameters, gate: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, t) in truth.objects.iter().enumerate() {
        for (j, e) in estimate.objects.iter().enumerate() {
            let d = t.position.distance(e.position);
            if t.class == e.class && d <= gate {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_t, mut used_e) = (vec![false; truth.objects.len()], vec![false; estimate.objects.len()]);
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_t[i] && !used_e[j] {
            used_t[i] = true;
            used_e[j] = true;
            out.push((i, j));
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectError {
    pub position_cm: f64,
    /// `None` for classes without orientation.
    pub orientation_deg: Option<f64>,
}

fn object_error(truth: &SceneParameters, ti: usize, est: &SceneParameters, ei: usize) -> ObjectError {
    let (t, e) = (&truth.objects[ti], &est.objects[ei]);
    ObjectError {
        position_cm: 100.0 * t.position.distance(e.position),
        orientation_deg: t.class.has_orientation().then(|| circular_diff_deg(t.yaw_deg, e.yaw_deg)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRow {
    pub room: String,
    pub class: ObjectClass,
    pub truth_index: usize,
    pub init: Option<ObjectError>,
    pub result: Option<ObjectError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomErrors {
    pub room: String,
    pub objects: Vec<ObjectRow>,
    pub wall_height_init_cm: f64,
    pub wall_height_final_cm: f64,
}

/// Per-object errors for one room. The final hypothesis is matched against
/// the truth; an initial hypothesis with the same object list reuses that
/// correspondence, any other is matched on its own.
pub fn evaluate_room(
    room: &str,
    truth: &SceneParameters,
    init: &SceneParameters,
    result: &SceneParameters,
) -> RoomErrors {
    let final_pairs = match_objects(truth, result, MATCH_GATE);
    let same_objects = init.objects.len() == result.objects.len()
        && init.objects.iter().zip(&result.objects).all(|(a, b)| a.class == b.class && a.model_id == b.model_id);
    let init_pairs = if same_objects { final_pairs.clone() } else { match_objects(truth, init, MATCH_GATE) };
    let lookup = |pairs: &[(usize, usize)], i: usize| pairs.iter().find(|p| p.0 == i).map(|p| p.1);
    let objects = truth
        .objects
        .iter()
        .enumerate()
        .map(|(i, t)| ObjectRow {
            room: room.to_string(),
            class: t.class,
            truth_index: i,
            init: lookup(&init_pairs, i).map(|j| object_error(truth, i, init, j)),
            result: lookup(&final_pairs, i).map(|j| object_error(truth, i, result, j)),
        })
        .collect();
    let h = truth.scaled_wall_height();
    RoomErrors {
        room: room.to_string(),
        objects,
        wall_height_init_cm: 100.0 * (init.scaled_wall_height() - h).abs(),
        wall_height_final_cm: 100.0 * (result.scaled_wall_height() - h).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stat { mean, std: var.sqrt(), count: values.len() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub class: ObjectClass,
    pub position_init: Option<Stat>,
    pub position_final: Option<Stat>,
    pub orientation_init: Option<Stat>,
    pub orientation_final: Option<Stat>,
    pub misses_init: usize,
    pub misses_final: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rooms: Vec<RoomErrors>,
    pub classes: Vec<ClassSummary>,
    pub wall_height_init: Option<Stat>,
    pub wall_height_final: Option<Stat>,
    /// Rooms without results, with the reason.
    pub failed: Vec<(String, String)>,
}

impl ErrorReport {
    pub fn from_rooms(rooms: Vec<RoomErrors>, failed: Vec<(String, String)>) -> Self {
        let mut by_class: BTreeMap<ObjectClass, Vec<&ObjectRow>> = BTreeMap::new();
        for r in &rooms {
            for o in &r.objects {
                by_class.entry(o.class).or_default().push(o);
            }
        }
        let classes = by_class
            .into_iter()
            .map(|(class, rows)| {
                let pos = |f: fn(&ObjectRow) -> Option<ObjectError>| {
                    Stat::of(&rows.iter().filter_map(|r| f(r)).map(|e| e.position_cm).collect::<Vec<_>>())
                };
                let ori = |f: fn(&ObjectRow) -> Option<ObjectError>| {
                    Stat::of(&rows.iter().filter_map(|r| f(r)).filter_map(|e| e.orientation_deg).collect::<Vec<_>>())
                };
                ClassSummary {
                    class,
                    position_init: pos(|r| r.init),
                    position_final: pos(|r| r.result),
                    orientation_init: ori(|r| r.init),
                    orientation_final: ori(|r| r.result),
                    misses_init: rows.iter().filter(|r| r.init.is_none()).count(),
                    misses_final: rows.iter().filter(|r| r.result.is_none()).count(),
                }
            })
            .collect();
        let wall_height_init = Stat::of(&rooms.iter().map(|r| r.wall_height_init_cm).collect::<Vec<_>>());
        let wall_height_final = Stat::of(&rooms.iter().map(|r| r.wall_height_final_cm).collect::<Vec<_>>());
        ErrorReport { rooms, classes, wall_height_init, wall_height_final, failed }
    }

    pub fn class(&self, class: ObjectClass) -> Option<&ClassSummary> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// Mean position error over every matched object.
    pub fn mean_position(&self, final_stage: bool) -> Option<f64> {
        let v: Vec<f64> = self
            .rooms
            .iter()
            .flat_map(|r| &r.objects)
            .filter_map(|o| if final_stage { o.result } else { o.init })
            .map(|e| e.position_cm)
            .collect();
        Stat::of(&v).map(|s| s.mean)
    }

    /// Per-object rows followed by per-class summary rows.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        let mut out = String::from(
            "room,class,object,position_init_cm,position_final_cm,orientation_init_deg,orientation_final_deg\n",
        );
        for r in &self.rooms {
            for o in &r.objects {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.room,
                    o.class,
                    o.truth_index,
                    o.init.map_or("miss".into(), |e| format!("{:.3}", e.position_cm)),
                    o.result.map_or("miss".into(), |e| format!("{:.3}", e.position_cm)),
                    cell(o.init.and_then(|e| e.orientation_deg)),
                    cell(o.result.and_then(|e| e.orientation_deg)),
                );
            }
            let _ = writeln!(
                out,
                "{},wall_height,-,{:.3},{:.3},-,-",
                r.room, r.wall_height_init_cm, r.wall_height_final_cm
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let pm = |s: Option<Stat>| s.map_or("-".to_string(), |s| format!("{:.1} ± {:.1}", s.mean, s.std));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>16} {:>16} {:>16} {:>16} {:>7}",
            "class", "pos init (cm)", "pos final (cm)", "ori init (deg)", "ori final (deg)", "misses"
        );
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:<8} {:>16} {:>16} {:>16} {:>16} {:>7}",
                c.class.name(),
                pm(c.position_init),
                pm(c.position_final),
                pm(c.orientation_init),
                pm(c.orientation_final),
                c.misses_final
            );
        }
        let _ = writeln!(out, "{:<8} {:>16} {:>16}", "height", pm(self.wall_height_init), pm(self.wall_height_final));
        let _ = writeln!(out, "rooms evaluated: {}, failed: {}", self.rooms.len(), self.failed.len());
        for (id, why) in &self.failed {
            let _ = writeln!(out, "  {id}: {why}");
        }
        out
    }
}

/// Compare every room's `init.json` and `final.json` under `results` with the dataset truth.
pub fn evaluate_dataset(dataset: &Path, results: &Path, models: &ModelLibrary) -> Result<ErrorReport> {
    let manifest = Manifest::load(dataset)?;
    let mut rooms = Vec::new();
    let mut failed = Vec::new();
    for room in &manifest.rooms {
        let truth = SceneParameters::load(&dataset.join(&room.id).join(SCENE_FILE), models)?;
        let dir = results.join(&room.id);
        let loaded = SceneParameters::load(&dir.join(INIT_FILE), models)
            .and_then(|i| SceneParameters::load(&dir.join(FINAL_FILE), models).map(|f| (i, f)));
        match loaded {
            Ok((init, result)) => rooms.push(evaluate_room(&room.id, &truth, &init, &result)),
            Err(e) => failed.push((room.id.clone(), e.to_string())),
        }
    }
    Ok(ErrorReport::from_rooms(rooms, failed))
}

pub fn save_report(report: &ErrorReport, out: &Path) -> Result<()> {
    write_text(&out.join(REPORT_CSV), &report.to_csv())?;
    write_text(&out.join(REPORT_TXT), &report.to_table())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_room, template_by_name, GeneratorConfig};
    use crate::geometry::Vec2;

    fn scene() -> SceneParameters {
        generate_room(&template_by_name("wide").unwrap(), 4, &GeneratorConfig::default(), &ModelLibrary::default())
            .unwrap()
    }

    #[test]
    fn truth_against_itself_is_zero() {
        let s = scene();
        let r = evaluate_room("r", &s, &s, &s);
        assert_eq!(r.wall_height_final_cm, 0.0);
        for o in &r.objects {
            assert_eq!(o.result.unwrap().position_cm, 0.0);
            assert_eq!(o.init.unwrap().position_cm, 0.0);
            assert_eq!(o.class.has_orientation(), o.result.unwrap().orientation_deg.is_some());
            assert!(o.result.unwrap().orientation_deg.is_none_or(|d| d == 0.0));
        }
        let report = ErrorReport::from_rooms(vec![r], vec![]);
        assert!(report.classes.iter().all(|c| c.position_final.unwrap().mean == 0.0 && c.misses_final == 0));
    }

    #[test]
    fn circular_orientation_and_plant_dash() {
        let mut s = scene();
        let mut e = s.clone();
        let chair = s.objects.iter().position(|o| o.class.has_orientation()).unwrap();
        s.objects[chair].yaw_deg = 359.0;
        e.objects[chair].yaw_deg = 1.0;
        let r = evaluate_room("r", &s, &e, &e);
        assert!((r.objects[chair].result.unwrap().orientation_deg.unwrap() - 2.0).abs() < 1e-9);
        let report = ErrorReport::from_rooms(vec![r], vec![]);
        let table = report.to_table();
        let plant_line = table.lines().find(|l| l.starts_with("plant")).unwrap();
        assert_eq!(plant_line.split_whitespace().filter(|w| *w == "-").count(), 2, "{plant_line}");
        assert!(report.class(ObjectClass::Plant).unwrap().orientation_final.is_none());
    }

    #[test]
    fn gating_and_one_to_one_matching() {
        let s = scene();
        let mut e = s.clone();
        e.objects[0].position = e.objects[0].position + Vec2::new(1.5, 0.0);
        let pairs = match_objects(&s, &e, MATCH_GATE);
        assert!(pairs.iter().all(|p| p.0 != 0));
        let r = evaluate_room("r", &s, &e, &e);
        assert!(r.objects[0].result.is_none());
        let report = ErrorReport::from_rooms(vec![r], vec![]);
        assert_eq!(report.class(s.objects[0].class).unwrap().misses_final, 1);
        assert!(report.to_csv().contains("miss"));
    }
}
