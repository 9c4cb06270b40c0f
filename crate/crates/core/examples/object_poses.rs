//! Estimate the pose of every oriented object in a room from its crop with
//! the pose CRF, and compare with the true relative yaw.

use pano_layout::config::RunConfig;
use pano_layout::geometry::circular_diff_deg;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::{synthesize_room, Manifest};
use pano_layout::pose::library::PoseLibrary;
use pano_layout::pose::{estimate_object_poses, relative_pose, PoseContext};

fn main() -> pano_layout::Result<()> {
    let cfg = RunConfig::default();
    let models = ModelLibrary::default();
    let library = PoseLibrary::build(&models, cfg.crf.image_size)?;
    let ctx = PoseContext::build(&models, library, cfg.crf.pose, cfg.crf.auxiliary_seed)?;
    let manifest = Manifest::plan(&cfg)?;

    for entry in manifest.rooms.iter().take(3) {
        let (truth, obs) = synthesize_room(entry, &cfg, &models)?;
        let bundle = obs.bundle()?;
        let oriented: Vec<usize> = (0..bundle.crops.len()).filter(|&i| bundle.crops[i].is_some()).collect();
        let classes: Vec<_> = oriented.iter().map(|&i| obs.detections[i].class).collect();
        let crops: Vec<_> = oriented.iter().filter_map(|&i| bundle.crops[i].clone()).collect();
        let est = estimate_object_poses(&classes, &crops, &ctx)?;
        for (class, run) in &est.runs {
            let bound = run.lower_bounds.last().copied().unwrap_or(f64::NAN);
            println!("{} {}: CRF energy {:.4}, lower bound {:.4}", entry.id, class.name(), run.energy, bound);
        }
        for (slot, &i) in oriented.iter().enumerate() {
            let Some(pose) = est.poses[slot] else { continue };
            let bearing = obs.detections[i].bearing_deg;
            let Some(t) = truth.objects.iter().filter(|o| o.class == classes[slot]).min_by(|a, b| {
                circular_diff_deg(a.position.angle_deg(), bearing)
                    .total_cmp(&circular_diff_deg(b.position.angle_deg(), bearing))
            }) else {
                continue;
            };
            let (yaw, pitch) = relative_pose(t, models.get(&t.model_id)?, truth.camera.height);
            println!(
                "  {:<6} estimated yaw {:6.1} pitch {:4.1} | true yaw {:6.1} pitch {:4.1} | error {:4.1}",
                classes[slot].name(),
                pose.yaw_deg,
                pose.pitch_deg,
                yaw,
                pitch,
                circular_diff_deg(pose.yaw_deg, yaw)
            );
        }
    }
    Ok(())
}
