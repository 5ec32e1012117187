//! Relabels one frame under different ego speeds and steering angles.
//!
//! cargo run --example ego_sweep

use dangerzone::analysis::sweep_ego_state;
use dangerzone::classification::{label_frame, Category, Distribution, SceneObject};
use dangerzone::geometry::{CameraModel, EgoState, Pose2, ZoneParams};
use dangerzone::simulation::Snapshot;

fn car(id: &str, x: f64, y: f64) -> SceneObject {
    SceneObject {
        id: id.into(),
        center: [x, y, 0.75],
        dims: [4.5, 1.9, 1.5],
        yaw: 0.0,
        category: Category::Vehicle,
        distribution: Distribution::Id,
        kind: "car".into(),
    }
}

fn main() -> dangerzone::Result<()> {
    let params = ZoneParams::default();
    let snapshot = Snapshot {
        index: 0,
        timestamp: 0.0,
        scenario: 0,
        ego: EgoState::new(5.0, 0.0, Pose2::default(), 2.7)?,
        fov: std::f64::consts::FRAC_PI_2,
        camera: CameraModel::default(),
        objects: vec![car("near", 0.0, 5.0), car("ahead-15m", 0.0, 15.0), car("right", 5.5, 12.0), car("left", -5.5, 12.0)],
    };
    let frame = label_frame(&snapshot, &params)?;

    let speeds = [0.0, 1.4, 4.0, 6.6, 10.0];
    let steers: Vec<f64> = [-26.0, 0.0, 26.0].iter().map(|d: &f64| d.to_radians()).collect();
    let m = sweep_ego_state(&frame, &speeds, &steers, &params)?;
    print!("{m}");
    for (si, s) in speeds.iter().enumerate() {
        for (ti, t) in steers.iter().enumerate() {
            println!("{s:>4.1} m/s {:>6.1} deg -> harmful: {:?}", t.to_degrees(), m.harmful_ids(si, ti));
        }
    }
    Ok(())
}
