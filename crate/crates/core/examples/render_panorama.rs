//! Render the orientation panorama of a generated room, add label noise and
//! write the label map and the object mask as PNG files.
//!
//! cargo run --example render_panorama -- [out_dir]

use std::path::PathBuf;

use pano_layout::generate::{generate_room, template_by_name, GeneratorConfig};
use pano_layout::models::ModelLibrary;
use pano_layout::projection::PanoSize;
use pano_layout::render::{
    apply_label_noise, render_object_masks, render_orientation_pano, LABEL_HORIZONTAL, LABEL_WALL_X, LABEL_WALL_Y,
};

fn main() -> pano_layout::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("pano_render"));
    std::fs::create_dir_all(&out).map_err(|e| pano_layout::Error::io(&out, e))?;
    let models = ModelLibrary::default();
    let scene = generate_room(&template_by_name("rect")?, 3, &GeneratorConfig::default(), &models)?;
    let size = PanoSize::new(1024, 512);

    let clean = render_orientation_pano(&scene, size);
    let noisy = apply_label_noise(&clean, 0.05, 11);
    let mask = render_object_masks(&scene, size, &models)?;
    for (label, name) in [(LABEL_WALL_X, "wall x"), (LABEL_WALL_Y, "wall y"), (LABEL_HORIZONTAL, "floor/ceiling")] {
        println!(
            "{name:<14} {:5.1}% clean {:5.1}% noisy",
            100.0 * clean.fraction(label),
            100.0 * noisy.fraction(label)
        );
    }
    println!("object pixels: {}", mask.count());

    clean.save_png(&out.join("clean.png"))?;
    noisy.save_png(&out.join("noisy.png"))?;
    mask.save_png(&out.join("objects.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
