use std::path::Path;
use std::process::Command;

use pano_layout::config::RunConfig;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::{generate_dataset, load_room, Manifest, SCENE_FILE};
use pano_layout::pipeline::estimate::{estimate_dataset, Estimator, FINAL_FILE, INIT_FILE, STATUS_FILE, TRACE_FILE};
use pano_layout::pipeline::eval::{evaluate_room, REPORT_CSV};
use pano_layout::scene::SceneParameters;

fn small_config(rooms: usize, samples: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.dataset.rooms = rooms;
    cfg.dataset.width = 512;
    cfg.dataset.height = 256;
    cfg.sampler.total_override = Some(samples);
    cfg
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn generation_is_byte_identical() {
    let cfg = small_config(2, 0);
    let models = ModelLibrary::default();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let m = generate_dataset(&cfg, a.path(), &models).unwrap();
    generate_dataset(&cfg, b.path(), &models).unwrap();
    assert_eq!(m.rooms.len(), 2);
    for room in &m.rooms {
        for file in [SCENE_FILE, "observed.png", "detections.json"] {
            assert_eq!(read(&a.path().join(&room.id).join(file)), read(&b.path().join(&room.id).join(file)), "{file}");
        }
    }
    assert_eq!(Manifest::load(a.path()).unwrap(), m);
}

#[test]
fn single_room_manifest() {
    let cfg = small_config(1, 0);
    let dir = tempfile::tempdir().unwrap();
    let m = generate_dataset(&cfg, dir.path(), &ModelLibrary::default()).unwrap();
    assert_eq!(m.rooms.len(), 1);
    assert_eq!(m.rooms[0].id, "room_000");
}

#[test]
fn disabled_sampling_keeps_the_initial_hypothesis() {
    let cfg = small_config(1, 0);
    let dir = tempfile::tempdir().unwrap();
    let (data, results) = (dir.path().join("data"), dir.path().join("results"));
    let models = ModelLibrary::default();
    generate_dataset(&cfg, &data, &models).unwrap();
    let est = Estimator::new(cfg, models).unwrap();
    let status = estimate_dataset(&data, &results, &est).unwrap();
    assert!(status[0].ok, "{:?}", status[0].error);
    assert_eq!(status[0].init_log_posterior, status[0].final_log_posterior);
    let room = results.join("room_000");
    assert_eq!(read(&room.join(INIT_FILE)), read(&room.join(FINAL_FILE)));
    assert!(!room.join(TRACE_FILE).exists());
    assert!(results.join(STATUS_FILE).exists());
}

#[test]
fn sampling_never_scores_below_the_initial_hypothesis() {
    let cfg = small_config(2, 50);
    let dir = tempfile::tempdir().unwrap();
    let (data, results) = (dir.path().join("data"), dir.path().join("results"));
    let models = ModelLibrary::default();
    generate_dataset(&cfg, &data, &models).unwrap();
    let est = Estimator::new(cfg, models).unwrap();
    for s in estimate_dataset(&data, &results, &est).unwrap() {
        assert!(s.ok, "{:?}", s.error);
        assert!(s.final_log_posterior.unwrap() >= s.init_log_posterior.unwrap());
        let trace = std::fs::read_to_string(results.join(&s.id).join(TRACE_FILE)).unwrap();
        assert_eq!(trace.lines().count(), 51);
        assert!(trace.starts_with("epoch,index,seed,lambda,"));
    }
}

#[test]
fn truth_against_truth_is_error_free() {
    let cfg = small_config(2, 0);
    let dir = tempfile::tempdir().unwrap();
    let models = ModelLibrary::default();
    let m = generate_dataset(&cfg, dir.path(), &models).unwrap();
    for room in &m.rooms {
        let (truth, _) = load_room(&dir.path().join(&room.id), &models).unwrap();
        let e = evaluate_room(&room.id, &truth, &truth, &truth);
        assert_eq!((e.wall_height_init_cm, e.wall_height_final_cm), (0.0, 0.0));
        for o in &e.objects {
            let r = o.result.unwrap();
            assert_eq!(r.position_cm, 0.0);
            assert_eq!(r.orientation_deg.is_some(), o.class.has_orientation());
            assert_eq!(r.orientation_deg.unwrap_or(0.0), 0.0);
        }
    }
}

#[test]
fn failing_room_is_reported_and_skipped() {
    let cfg = small_config(2, 0);
    let dir = tempfile::tempdir().unwrap();
    let (data, results) = (dir.path().join("data"), dir.path().join("results"));
    let models = ModelLibrary::default();
    generate_dataset(&cfg, &data, &models).unwrap();
    std::fs::remove_file(data.join("room_001").join("observed.png")).unwrap();
    let est = Estimator::new(cfg, models).unwrap();
    let status = estimate_dataset(&data, &results, &est).unwrap();
    assert!(status[0].ok);
    assert!(!status[1].ok);
    assert!(status[1].error.as_deref().unwrap().contains("observed.png"));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_panolayout")).args(args).output().expect("binary runs")
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    std::fs::write(p("config.json"), small_config(1, 20).to_json()).unwrap();

    let out = cli(&["--config", &p("config.json"), "--seed", "9", "--rooms", "2", "--out", &p("data"), "generate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::load(&dir.path().join("data")).unwrap();
    assert_eq!((manifest.master_seed, manifest.rooms.len()), (9, 2));

    let out = cli(&["--jobs", "1", "--out", &p("results"), "estimate", &p("data")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = cli(&["--out", &p("report"), "eval", &p("data"), &p("results")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report").join(REPORT_CSV).exists());

    let scene = dir.path().join("data/room_000").join(SCENE_FILE);
    let out = cli(&["--out", &p("map.svg"), "floormap", scene.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(p("map.svg")).unwrap().starts_with("<svg"));
    let out = cli(&["--out", &p("render"), "render", scene.to_str().unwrap(), "--width", "256", "--height", "128"]);
    assert!(out.status.success());
    let labels = image::open(dir.path().join("render/labels.png")).unwrap();
    assert_eq!((labels.width(), labels.height()), (256, 128));
    let models = ModelLibrary::default();
    SceneParameters::load(&scene, &models).unwrap();
}

#[test]
fn command_line_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"dataset": {"templates": ["hexagon"]}}"#).unwrap();
    let out = cli(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "generate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hexagon"));
    let missing = dir.path().join("nowhere.json");
    let out = cli(&["--out", dir.path().to_str().unwrap(), "floormap", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.json"));
}
