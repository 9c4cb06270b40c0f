//! Split a panorama into perspective views and back-project a few floor
//! pixels with the known camera height.

use pano_layout::projection::{backproject_floor_pixel, pano_to_views, SphericalDirection};
use pano_layout::scene::CameraModel;

fn main() -> pano_layout::Result<()> {
    let views = pano_to_views(1024, 512, 6, 90.0, 30.0)?;
    for v in &views {
        let centre = v.pixel_to_direction((0.5 * v.width as f64, 0.5 * v.height as f64));
        println!(
            "view yaw {:5.1}  {}x{}  focal {:.1}  centre az {:.1}",
            v.yaw_center_deg,
            v.width,
            v.height,
            v.focal(),
            centre.azimuth_deg
        );
    }
    let camera = CameraModel { height: 1.70 };
    for el in [-10.0, -30.0, -45.0, -60.0, -89.0] {
        let p = backproject_floor_pixel(SphericalDirection::new(30.0, el), &camera)?;
        println!("elevation {el:6.1} -> floor point ({:.3}, {:.3}) at {:.3} m", p.x, p.y, p.xy().norm());
    }
    Ok(())
}
