//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dangerzone::classification::{label_frame, Category, Distribution, SceneObject};
use dangerzone::geometry::{CameraModel, EgoState, Pose2, ZoneParams};
use dangerzone::polygon::{Point2, Polygon2D};
use dangerzone::simulation::{concat_scenarios, generate_scenario, Frame, ScenarioSpec, Snapshot};

pub fn car(id: &str, x: f64, y: f64) -> SceneObject {
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

/// Ego at the origin heading north with the given state.
pub fn scripted_frame(speed: f64, steer: f64, objects: Vec<SceneObject>) -> Frame {
    let snap = Snapshot {
        index: 0,
        timestamp: 0.0,
        scenario: 0,
        ego: EgoState::new(speed, steer, Pose2::default(), 2.7).unwrap(),
        fov: std::f64::consts::FRAC_PI_2,
        camera: CameraModel::default(),
        objects,
    };
    label_frame(&snap, &ZoneParams::default()).unwrap()
}

/// A narrow road with objects scattered along it, driven end to end.
pub fn corridor_spec(seed: u64, duration: f64, length: f64) -> ScenarioSpec {
    ScenarioSpec::from_toml_str(&format!(
        r#"
seed = {seed}
duration = {duration}
map_extent = [10.0, {length}]
[ego]
start = {{ x = 0.0, y = {start}, yaw = 0.0 }}
initial_speed = 6.0
[[ego_script]]
time = 0.0
target_speed = 7.0
steering_angle = 0.0
[[census]]
category = "vehicle"
count = 10
[[census]]
category = "pedestrian"
count = 10
[[census]]
category = "static"
count = 6
[[census]]
category = "static"
distribution = "OOD"
count = 12
"#,
        start = 2.0 - length / 2.0
    ))
    .unwrap()
}

pub fn corridor_frames(seeds: &[u64], duration: f64, length: f64) -> Vec<Frame> {
    let streams = seeds
        .iter()
        .map(|&s| generate_scenario(&corridor_spec(s, duration, length), &ZoneParams::default()).unwrap())
        .collect();
    concat_scenarios(streams)
}

/// Convex polygon from sorted random angles on an ellipse.
pub fn random_convex(rng: &mut ChaCha8Rng, center: [f64; 2], scale: f64) -> Polygon2D {
    let n = rng.gen_range(3..=9);
    let (a, b) = (rng.gen_range(0.5..1.0) * scale, rng.gen_range(0.5..1.0) * scale);
    let tilt: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let vertices = angles
        .iter()
        .map(|t| {
            let (x, y) = (a * t.cos(), b * t.sin());
            Point2::new(
                center[0] + x * tilt.cos() - y * tilt.sin(),
                center[1] + x * tilt.sin() + y * tilt.cos(),
            )
        })
        .collect();
    Polygon2D::new(vertices)
}

fn inside_ccw(poly: &[Point2], p: Point2) -> bool {
    (0..poly.len()).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

/// Uniform sampling over `p`'s bounding box. Returns the estimated area of
/// `p ∩ q` and the fraction of samples that landed in it.
pub fn monte_carlo_overlap(p: &Polygon2D, q: &Polygon2D, samples: usize, seed: u64) -> (f64, f64) {
    let (lo, hi) = bbox(&p.vertices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let s = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if inside_ccw(&p.vertices, s) && inside_ccw(&q.vertices, s) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    (frac * (hi.x - lo.x) * (hi.y - lo.y), frac)
}

fn bbox(v: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in v {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

/// Interpolated AP by scanning every ranked prefix for every recall level.
pub fn brute_force_ap(hits: &[bool], gt_count: usize, levels: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..levels {
        let level = i as f64 / (levels - 1) as f64;
        let mut best: f64 = 0.0;
        for k in 1..=hits.len() {
            let tp = hits[..k].iter().filter(|h| **h).count();
            if tp as f64 / gt_count as f64 >= level {
                best = best.max(tp as f64 / k as f64);
            }
        }
        total += best;
    }
    total / levels as f64
}

/// A lane-wide strip just longer than the zone, so objects ahead of the ego
/// are about as often harmful as harmless.
pub fn hazard_lane_frames(seeds: &[u64]) -> Vec<Frame> {
    let streams = seeds
        .iter()
        .map(|&seed| {
            let spec = ScenarioSpec::from_toml_str(&format!(
                r#"
seed = {seed}
duration = 3.0
map_extent = [5.0, 50.0]
[ego]
start = {{ x = 0.0, y = -24.0, yaw = 0.0 }}
initial_speed = 7.0
[[ego_script]]
time = 0.0
target_speed = 7.0
steering_angle = 0.0
[[census]]
category = "vehicle"
count = 3
[[census]]
category = "pedestrian"
count = 4
[[census]]
category = "static"
count = 2
[[census]]
category = "static"
distribution = "OOD"
count = 6
"#
            ))
            .unwrap();
            generate_scenario(&spec, &ZoneParams::default()).unwrap()
        })
        .collect();
    concat_scenarios(streams)
}
