//! Score the ground truth, the initial hypothesis and a few λ values with the
//! posterior and print each energy term.

use pano_layout::config::RunConfig;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::{synthesize_room, Manifest};
use pano_layout::pipeline::estimate::Estimator;
use pano_layout::posterior::Evaluator;

fn main() -> pano_layout::Result<()> {
    let cfg = RunConfig::default();
    let est = Estimator::new(cfg.clone(), ModelLibrary::default())?;
    let entry = &Manifest::plan(&cfg)?.rooms[0];
    let (truth, obs) = synthesize_room(entry, &cfg, &est.models)?;
    let (_, init) = est.initialize(&obs)?;
    let bundle = obs.bundle()?;
    let evaluator = Evaluator::new(&bundle, &init.walls, &est.models, &est.pose.library, cfg.posterior)?;

    println!(
        "{:<18} {:>8} {:>9} {:>9} {:>9} {:>9} {:>10}",
        "hypothesis", "lambda", "e_s", "e_o", "e_ow", "e_oo", "log P"
    );
    let row = |name: &str, h: &pano_layout::scene::SceneParameters| -> pano_layout::Result<()> {
        let b = evaluator.evaluate(h)?;
        println!(
            "{name:<18} {:8.3} {:9.4} {:9.4} {:9.4} {:9.4} {:10.4}",
            h.lambda, b.e_s, b.e_o, b.e_ow, b.e_oo, b.log_posterior
        );
        Ok(())
    };
    row("truth", &truth)?;
    row("initial", &init)?;
    let oracle = pano_layout::scene::SceneParameters { walls: init.walls.clone(), ..truth.clone() };
    row("truth objects", &oracle)?;
    for lambda in [0.9, 1.0, truth.lambda, 1.2] {
        row(&format!("initial, λ {lambda:.3}"), &init.with_lambda(lambda))?;
    }
    Ok(())
}
