//! Builds the danger zone for a few ego states and projects it into the
//! front camera.
//!
//! cargo run --example danger_zone

use dangerzone::geometry::{build_danger_zone, project_zone_to_image, CameraModel, EgoState, ZoneParams};

fn main() -> dangerzone::Result<()> {
    let params = ZoneParams::default();
    let camera = CameraModel::default();
    for (speed, steer_deg) in [(0.0, 0.0), (5.0, 0.0), (10.0, 0.0), (8.0, 20.0), (8.0, -20.0)] {
        let ego = EgoState::at_origin(speed, f64::to_radians(steer_deg))?;
        let zone = build_danger_zone(&ego, &params)?;
        println!("speed {speed:>4.1} m/s, steer {steer_deg:>5.1} deg: depth {:.1} m, area {:.1} m²", zone.depth, zone.area());
        for v in &zone.vertices {
            print!("  ({:>6.2}, {:>6.2})", v.x, v.y);
        }
        println!();
        let image = project_zone_to_image(&zone, &camera)?;
        for v in &image.vertices {
            print!("  [{:>7.1}, {:>6.1}]", v.x, v.y);
        }
        println!(" px");
    }
    Ok(())
}
