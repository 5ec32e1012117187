//! Labels a hand-built scene and shows why each object got its label.
//!
//! cargo run --example classify_scene

use dangerzone::classification::{classify_object, in_front_fov, zone_overlap, Category, Distribution, SceneObject};
use dangerzone::geometry::{build_danger_zone, zone_to_world, EgoState, Pose2, ZoneParams};

fn object(id: &str, x: f64, y: f64, dims: [f64; 3], category: Category, distribution: Distribution, kind: &str) -> SceneObject {
    SceneObject {
        id: id.into(),
        center: [x, y, dims[2] / 2.0],
        dims,
        yaw: 0.0,
        category,
        distribution,
        kind: kind.into(),
    }
}

fn main() -> dangerzone::Result<()> {
    let params = ZoneParams::default();
    // Ego 20 m north of the origin, heading north at 6 m/s: zone depth 16 m.
    let ego = EgoState::new(6.0, 0.0, Pose2::new(0.0, 20.0, 0.0), 2.7)?;
    let zone = zone_to_world(&build_danger_zone(&ego, &params)?, &ego.pose);

    let scene = [
        object("car-ahead", 0.5, 30.0, [4.5, 1.9, 1.5], Category::Vehicle, Distribution::Id, "car"),
        object("walker-kerb", 2.2, 26.0, [0.6, 0.6, 1.7], Category::Pedestrian, Distribution::Id, "walker"),
        object("barrel", -1.0, 24.0, [0.6, 0.6, 0.9], Category::Static, Distribution::Ood, "barrel"),
        object("parked-van", 5.0, 28.0, [5.0, 2.0, 2.2], Category::Vehicle, Distribution::Id, "van"),
        object("far-bench", 0.0, 50.0, [1.8, 0.6, 0.8], Category::Static, Distribution::Id, "bench"),
        object("behind", 0.0, 12.0, [4.5, 1.9, 1.5], Category::Vehicle, Distribution::Id, "car"),
    ];

    println!("{:<12} {:>6} {:>7} {:>9}  label", "object", "in fov", "overlap", "fraction");
    for obj in &scene {
        let visible = in_front_fov(obj, &ego, std::f64::consts::FRAC_PI_2);
        let ov = zone_overlap(obj, &zone)?;
        let label = classify_object(obj, &zone, &params)?;
        let shown = if visible { label.to_string() } else { "(not annotated)".into() };
        println!("{:<12} {:>6} {:>6.2}m² {:>9.2}  {shown}", obj.id, visible, ov.area, ov.ratio);
    }
    Ok(())
}
