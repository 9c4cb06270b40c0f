//! Run the sampling-based MAP search on one room and report how far the
//! objects and the wall height move towards the truth.
//!
//! cargo run --release --example map_sampler -- [room index] [samples]

use pano_layout::config::RunConfig;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::{derive_seed, synthesize_room, Manifest};
use pano_layout::pipeline::estimate::Estimator;
use pano_layout::pipeline::eval::evaluate_room;

fn main() -> pano_layout::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let index: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut cfg = RunConfig::default();
    cfg.sampler.total_override = Some(args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3000));
    let est = Estimator::new(cfg.clone(), ModelLibrary::default())?;
    let entry = &Manifest::plan(&cfg)?.rooms[index];
    let (truth, obs) = synthesize_room(entry, &cfg, &est.models)?;

    let started = std::time::Instant::now();
    let r = est.estimate(&obs, derive_seed(entry.seed, 3))?;
    let samples = r.map.as_ref().map_or(0, |m| m.trace.len());
    println!("{}: {samples} samples in {:.1?}", entry.id, started.elapsed());
    println!("log posterior {:.4} -> {:.4}", r.init_score.log_posterior, r.result_score.log_posterior);

    let errors = evaluate_room(&entry.id, &truth, &r.init, &r.result);
    println!("wall height error {:.1} cm -> {:.1} cm", errors.wall_height_init_cm, errors.wall_height_final_cm);
    for row in &errors.objects {
        let fmt = |e: Option<&pano_layout::pipeline::eval::ObjectError>| match e {
            Some(e) => format!(
                "{:6.1} cm {}",
                e.position_cm,
                e.orientation_deg.map_or("      -".into(), |o| format!("{o:5.1}°"))
            ),
            None => "missed".into(),
        };
        println!("  {:<6} {} -> {}", row.class.name(), fmt(row.init.as_ref()), fmt(row.result.as_ref()));
    }
    Ok(())
}
