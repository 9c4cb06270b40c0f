//! Recover the wall outline of a room from a noisy orientation panorama and
//! compare it with the ground truth.

use pano_layout::generate::{generate_room, template_by_name, GeneratorConfig};
use pano_layout::geometry::distance_to_boundary;
use pano_layout::layout_init::{estimate_layout, ViewConfig, WallFitConfig};
use pano_layout::models::ModelLibrary;
use pano_layout::projection::PanoSize;
use pano_layout::render::{apply_label_noise, render_orientation_pano};

fn main() -> pano_layout::Result<()> {
    let models = ModelLibrary::default();
    for (i, name) in ["rect", "wide", "l_shape", "t_shape"].iter().enumerate() {
        let truth = generate_room(&template_by_name(name)?, 40 + i as u64, &GeneratorConfig::default(), &models)?;
        let pano = apply_label_noise(&render_orientation_pano(&truth, PanoSize::new(1024, 512)), 0.05, i as u64);
        let layout = estimate_layout(&pano, &truth.camera, &ViewConfig::default(), &WallFitConfig::default())?;
        let poly = truth.polygon();
        let worst = layout
            .walls
            .iter()
            .flat_map(|w| [w.start, w.end])
            .map(|c| distance_to_boundary(c, &poly))
            .fold(0.0, f64::max);
        println!(
            "{name:<8} {} walls (truth {}), {} floor points, view scales {:?}, worst corner offset {:.1} cm",
            layout.walls.len(),
            truth.walls.len(),
            layout.points.len(),
            layout.scales.iter().map(|s| (s * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            100.0 * worst
        );
    }
    Ok(())
}
