//! Write a top-down SVG floor map of a generated room.
//!
//! cargo run --example floor_map -- [out.svg]

use pano_layout::generate::{generate_room, template_by_name, GeneratorConfig};
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::floormap::floormap_svg;

fn main() -> pano_layout::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("floormap.svg"));
    let models = ModelLibrary::default();
    let scene = generate_room(&template_by_name("t_shape")?, 5, &GeneratorConfig::default(), &models)?;
    let svg = floormap_svg(&scene);
    std::fs::write(&out, &svg).map_err(|e| pano_layout::Error::io(&out, e))?;
    println!("{} objects, {} bytes -> {}", scene.objects.len(), svg.len(), out.display());
    Ok(())
}
