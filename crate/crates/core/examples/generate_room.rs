//! Generate a ground-truth room and print its walls and objects.
//!
//! cargo run --example generate_room -- [template] [seed]

use pano_layout::generate::{generate_room, template_by_name, GeneratorConfig};
use pano_layout::models::ModelLibrary;

fn main() -> pano_layout::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map(String::as_str).unwrap_or("l_shape");
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let models = ModelLibrary::default();
    let scene = generate_room(&template_by_name(name)?, seed, &GeneratorConfig::default(), &models)?;

    println!("{name} room, seed {seed}: lambda {:.3}, wall height {:.3} m", scene.lambda, scene.scaled_wall_height());
    for w in &scene.walls {
        println!("  wall ({:6.2}, {:6.2}) -> ({:6.2}, {:6.2})  {:?}", w.start.x, w.start.y, w.end.x, w.end.y, w.axis());
    }
    for o in &scene.objects {
        println!("  {:<6} at ({:5.2}, {:5.2}) yaw {:6.1}", o.class.name(), o.position.x, o.position.y, o.yaw_deg);
    }
    println!("{}", scene.to_json());
    Ok(())
}
