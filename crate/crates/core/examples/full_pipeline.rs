//! Generate a small dataset, estimate every room and print the error table,
//! all inside a temporary directory.
//!
//! cargo run --release --example full_pipeline -- [rooms] [samples]

use pano_layout::config::RunConfig;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::generate_dataset;
use pano_layout::pipeline::estimate::{estimate_dataset, Estimator};
use pano_layout::pipeline::eval::{evaluate_dataset, save_report};

fn main() -> pano_layout::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mut cfg = RunConfig::default();
    cfg.dataset.rooms = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    cfg.sampler.total_override = Some(args.get(2).and_then(|s| s.parse().ok()).unwrap_or(600));
    let root = std::env::temp_dir().join("pano_pipeline");
    let (data, results) = (root.join("dataset"), root.join("results"));

    let models = ModelLibrary::default();
    let manifest = generate_dataset(&cfg, &data, &models)?;
    println!("generated {} rooms in {}", manifest.rooms.len(), data.display());

    let est = Estimator::new(cfg, models)?;
    for s in estimate_dataset(&data, &results, &est)? {
        match s.error {
            None => println!(
                "  {} log P {:.3} -> {:.3}",
                s.id,
                s.init_log_posterior.unwrap_or(f64::NAN),
                s.final_log_posterior.unwrap_or(f64::NAN)
            ),
            Some(e) => println!("  {} failed: {e}", s.id),
        }
    }
    let report = evaluate_dataset(&data, &results, &est.models)?;
    save_report(&report, &results)?;
    print!("{}", report.to_table());
    Ok(())
}
