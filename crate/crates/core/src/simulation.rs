//! Seeded scene generator: bicycle-model ego motion, census-driven object
//! spawning with in/out-of-distribution kinds, and fixed-period sampling.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::classification::{in_front_fov, label_frame, Category, Distribution, HarmLabel, SceneObject};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, EgoState, Pose2, Rigid3, ZoneParams, DEFAULT_MAX_STEER};
use crate::polygon::{overlap_area, Point2};

/// Unlabeled scene state at one sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: u64,
    pub timestamp: f64,
    pub scenario: u64,
    pub ego: EgoState,
    pub fov: f64,
    pub camera: CameraModel,
    pub objects: Vec<SceneObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledObject {
    pub object: SceneObject,
    pub label: HarmLabel,
}

/// A labeled sample: ego state, sensor geometry and the in-FOV objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: u64,
    pub timestamp: f64,
    /// Seed of the scenario this frame was sampled from.
    pub scenario: u64,
    pub ego: EgoState,
    pub fov: f64,
    pub ego_to_world: Rigid3,
    pub camera: CameraModel,
    pub objects: Vec<LabeledObject>,
}

/// One bicycle-model step about the ego reference point.
///
/// Heading (clockwise) changes by `speed / wheelbase * tan(steer) * dt`, the
/// position advances along the old heading, and the speed moves toward
/// `target_speed` by at most `max_accel * dt`.
pub fn kinematic_step(ego: &EgoState, dt: f64, target_speed: f64, steer: f64, max_accel: f64) -> EgoState {
    debug_assert!(dt > 0.0);
    let heading = ego.pose.heading();
    let travel = ego.speed * dt;
    let pose = Pose2 {
        x: ego.pose.x + travel * heading.x,
        y: ego.pose.y + travel * heading.y,
        yaw: ego.pose.yaw + ego.speed / ego.wheelbase * steer.tan() * dt,
    };
    let max_dv = max_accel * dt;
    let speed = (ego.speed + (target_speed - ego.speed).clamp(-max_dv, max_dv)).max(0.0);
    EgoState {
        speed,
        steering_angle: steer,
        pose,
        wheelbase: ego.wheelbase,
    }
}

const OOD_ROSTER: [&str; 11] = [
    "barrel",
    "mailbox",
    "construction cone",
    "container",
    "cloth container",
    "advertisement",
    "hay bale",
    "shopping bag",
    "map table",
    "cardboard box",
    "newspaper box",
];

/// Kinds that only ever appear as out-of-distribution objects.
pub fn ood_roster() -> &'static [&'static str] {
    &OOD_ROSTER
}

const VEHICLE_KINDS: [&str; 4] = ["car", "van", "truck", "motorcycle"];
const PEDESTRIAN_KINDS: [&str; 1] = ["walker"];
const STATIC_ID_KINDS: [&str; 4] = ["bench", "trash can", "planter", "traffic barrier"];

/// Nominal (length, width, height) in metres.
fn nominal_dims(kind: &str, category: Category) -> [f64; 3] {
    match kind {
        "car" => [4.5, 1.9, 1.5],
        "van" => [5.2, 2.0, 2.2],
        "truck" => [7.5, 2.5, 3.2],
        "motorcycle" => [2.2, 0.8, 1.4],
        "walker" => [0.6, 0.6, 1.75],
        "bench" => [0.6, 1.8, 0.9],
        "trash can" => [0.6, 0.6, 1.0],
        "planter" => [1.2, 1.2, 0.8],
        "traffic barrier" => [0.5, 2.0, 1.0],
        "barrel" => [0.6, 0.6, 0.9],
        "mailbox" => [0.5, 0.5, 1.2],
        "construction cone" => [0.4, 0.4, 0.7],
        "container" => [6.0, 2.4, 2.6],
        "cloth container" => [1.2, 1.5, 1.8],
        "advertisement" => [0.4, 2.0, 2.5],
        "hay bale" => [1.5, 1.5, 1.2],
        "shopping bag" => [0.3, 0.4, 0.4],
        "map table" => [0.6, 1.2, 1.0],
        "cardboard box" => [0.6, 0.5, 0.5],
        "newspaper box" => [0.5, 0.6, 1.1],
        _ => match category {
            Category::Vehicle => [4.5, 1.9, 1.5],
            Category::Pedestrian => [0.6, 0.6, 1.75],
            Category::Static => [1.0, 1.0, 1.0],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusEntry {
    pub category: Category,
    #[serde(default = "default_distribution")]
    pub distribution: Distribution,
    /// Drawn per object from the category's kinds (or the OOD roster) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub count: usize,
}

fn default_distribution() -> Distribution {
    Distribution::Id
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoWaypoint {
    /// s from scenario start; the command holds until the next waypoint.
    pub time: f64,
    pub target_speed: f64,
    /// rad, positive turns right
    pub steering_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EgoConfig {
    pub start: Pose2,
    pub initial_speed: f64,
    pub wheelbase: f64,
    /// m/s²
    pub max_accel: f64,
    /// rad
    pub max_steer: f64,
}

impl Default for EgoConfig {
    fn default() -> Self {
        Self {
            start: Pose2::default(),
            initial_speed: 0.0,
            wheelbase: 2.7,
            max_accel: 3.0,
            max_steer: DEFAULT_MAX_STEER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    /// px
    pub focal: f64,
    pub image_width: u32,
    pub image_height: u32,
    /// Lens position in the ego frame, m.
    pub mount: [f64; 3],
    /// rad, positive tilts down
    pub pitch: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            focal: 800.0,
            image_width: 1600,
            image_height: 900,
            mount: [0.0, -1.5, 1.6],
            pitch: 0.0,
        }
    }
}

impl CameraConfig {
    pub fn build(&self) -> Result<CameraModel> {
        CameraModel::forward_facing(self.focal, self.image_width, self.image_height, self.mount, self.pitch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    /// s
    pub duration: f64,
    #[serde(default = "default_sample_period")]
    pub sample_period: f64,
    /// (east-west, north-south) size in metres of the spawn area, centred on the origin.
    #[serde(default = "default_map_extent")]
    pub map_extent: [f64; 2],
    /// Field of view used for the annotation filter; the camera's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_deg: Option<f64>,
    #[serde(default)]
    pub weather_tag: String,
    #[serde(default)]
    pub ego: EgoConfig,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub zone: Option<ZoneParams>,
    #[serde(default)]
    pub ego_script: Vec<EgoWaypoint>,
    #[serde(default)]
    pub census: Vec<CensusEntry>,
}

fn default_sample_period() -> f64 {
    0.3
}

fn default_map_extent() -> [f64; 2] {
    [200.0, 200.0]
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::Config(format!("sample_period must be > 0, got {}", self.sample_period)));
        }
        if !(self.map_extent[0] > 0.0 && self.map_extent[1] > 0.0) {
            return Err(Error::Config("map_extent must be positive".into()));
        }
        if let Some(fov) = self.fov_deg {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(Error::Config(format!("fov_deg must lie in (0, 180), got {fov}")));
            }
        }
        if !(self.ego.wheelbase > 0.0 && self.ego.max_accel > 0.0 && self.ego.initial_speed >= 0.0) {
            return Err(Error::Config("ego wheelbase and max_accel must be > 0, initial_speed >= 0".into()));
        }
        let mut last = f64::NEG_INFINITY;
        for wp in &self.ego_script {
            if !(wp.time >= 0.0) || wp.time < last {
                return Err(Error::Config("ego_script times must be >= 0 and non-decreasing".into()));
            }
            if !(wp.target_speed >= 0.0) {
                return Err(Error::Config("ego_script target_speed must be >= 0".into()));
            }
            if wp.steering_angle.abs() > self.ego.max_steer {
                return Err(Error::Config(format!(
                    "ego_script steering_angle {} exceeds max_steer {}",
                    wp.steering_angle, self.ego.max_steer
                )));
            }
            last = wp.time;
        }
        for entry in &self.census {
            if entry.distribution == Distribution::Ood {
                if entry.category != Category::Static {
                    return Err(Error::Config(format!(
                        "census: OOD entries must be static objects, got {}",
                        entry.category
                    )));
                }
                if let Some(kind) = &entry.kind {
                    if !OOD_ROSTER.contains(&kind.as_str()) {
                        return Err(Error::Config(format!("census: {kind:?} is not an OOD roster kind")));
                    }
                }
            }
        }
        self.camera.build().map_err(|e| Error::Config(format!("camera: {e}")))?;
        if let Some(z) = &self.zone {
            z.validate().map_err(|e| Error::Config(format!("zone: {e}")))?;
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration / self.sample_period + 1e-9).floor() as usize
    }

    /// Command active at time `t`: the last waypoint at or before `t`,
    /// falling back to (initial speed, straight) before the first.
    fn command_at(&self, t: f64) -> (f64, f64) {
        self.ego_script
            .iter()
            .take_while(|wp| wp.time <= t + 1e-12)
            .last()
            .map_or((self.ego.initial_speed, 0.0), |wp| (wp.target_speed, wp.steering_angle))
    }

    /// Total objects requested per distribution.
    pub fn census_totals(&self) -> BTreeMap<Distribution, usize> {
        let mut out = BTreeMap::new();
        for e in &self.census {
            *out.entry(e.distribution).or_default() += e.count;
        }
        out
    }

    /// Same scenario with every OOD census entry removed.
    pub fn without_ood(&self) -> Self {
        Self {
            census: self
                .census
                .iter()
                .filter(|e| e.distribution == Distribution::Id)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Motion {
    Parked,
    /// constant speed (m/s) and clockwise yaw rate (rad/s)
    Drive { speed: f64, yaw_rate: f64 },
    Walk,
}

struct Actor {
    object: SceneObject,
    motion: Motion,
}

impl Actor {
    fn advance(&mut self, dt: f64, rng: &mut ChaCha8Rng, turn_noise: &Normal<f64>) {
        let (speed, yaw_rate) = match self.motion {
            Motion::Parked => return,
            Motion::Drive { speed, yaw_rate } => (speed, yaw_rate),
            Motion::Walk => {
                self.object.yaw += turn_noise.sample(rng);
                (rng.gen_range(0.0..=1.5), 0.0)
            }
        };
        let pose = Pose2::new(self.object.center[0], self.object.center[1], self.object.yaw);
        let h = pose.heading();
        self.object.center[0] += speed * dt * h.x;
        self.object.center[1] += speed * dt * h.y;
        self.object.yaw += yaw_rate * dt;
    }
}

const SPAWN_RETRIES: usize = 100;
/// Spawn keep-out radius around the ego start, m.
const EGO_CLEARANCE: f64 = 6.0;
const MAX_SUBSTEP: f64 = 0.05;

fn spawn_actors(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Actor>> {
    let mut actors: Vec<Actor> = Vec::new();
    let [ex, ey] = spec.map_extent;
    let start = Point2::new(spec.ego.start.x, spec.ego.start.y);
    let mut serial = 0usize;
    for entry in &spec.census {
        for _ in 0..entry.count {
            let kind = match &entry.kind {
                Some(k) => k.clone(),
                None => {
                    let pool: &[&str] = match (entry.distribution, entry.category) {
                        (Distribution::Ood, _) => &OOD_ROSTER,
                        (_, Category::Vehicle) => &VEHICLE_KINDS,
                        (_, Category::Pedestrian) => &PEDESTRIAN_KINDS,
                        (_, Category::Static) => &STATIC_ID_KINDS,
                    };
                    pool.choose(rng).expect("non-empty kind pool").to_string()
                }
            };
            let nominal = nominal_dims(&kind, entry.category);
            let dims = nominal.map(|d| d * rng.gen_range(0.9..1.1));
            let motion = match entry.category {
                Category::Vehicle if rng.gen_bool(0.5) => Motion::Drive {
                    speed: rng.gen_range(2.0..10.0),
                    yaw_rate: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-0.15..0.15) },
                },
                Category::Pedestrian => Motion::Walk,
                _ => Motion::Parked,
            };
            let id = format!("s{}-o{serial}", spec.seed);
            serial += 1;

            let mut placed = None;
            for _ in 0..SPAWN_RETRIES {
                let candidate = SceneObject {
                    id: id.clone(),
                    center: [
                        rng.gen_range(-ex / 2.0..ex / 2.0),
                        rng.gen_range(-ey / 2.0..ey / 2.0),
                        dims[2] / 2.0,
                    ],
                    dims,
                    yaw: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                    category: entry.category,
                    distribution: entry.distribution,
                    kind: kind.clone(),
                };
                if collides(&candidate, &actors, start)? {
                    continue;
                }
                placed = Some(candidate);
                break;
            }
            let Some(object) = placed else {
                return Err(Error::Generation {
                    seed: spec.seed,
                    reason: format!(
                        "could not place object {id} ({kind}) after {SPAWN_RETRIES} retries; census too dense for map_extent"
                    ),
                });
            };
            actors.push(Actor { object, motion });
        }
    }
    Ok(actors)
}

fn collides(candidate: &SceneObject, placed: &[Actor], ego_start: Point2) -> Result<bool> {
    let c = candidate.ground_center();
    if c.distance(ego_start) < EGO_CLEARANCE + candidate.half_diagonal() {
        return Ok(true);
    }
    let fp = crate::classification::footprint(candidate);
    for other in placed {
        let o = &other.object;
        if c.distance(o.ground_center()) > candidate.half_diagonal() + o.half_diagonal() {
            continue;
        }
        if overlap_area(&fp, &crate::classification::footprint(o))? > 0.0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Runs the scenario and returns its labeled frames, indexed from 0.
///
/// The frame stream is a pure function of `spec` and `zone_params`.
pub fn generate_scenario(spec: &ScenarioSpec, zone_params: &ZoneParams) -> Result<Vec<Frame>> {
    spec.validate()?;
    zone_params.validate()?;
    let camera = spec.camera.build()?;
    let fov = spec.fov_deg.map_or(camera.horizontal_fov(), f64::to_radians);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut actors = spawn_actors(spec, &mut rng)?;
    let turn_noise = Normal::new(0.0, 0.3).expect("valid sigma");

    let substeps = (spec.sample_period / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let dt = spec.sample_period / substeps as f64;
    let mut ego = EgoState {
        speed: spec.ego.initial_speed,
        steering_angle: spec.command_at(0.0).1,
        pose: spec.ego.start,
        wheelbase: spec.ego.wheelbase,
    };

    let n = spec.frame_count();
    let mut frames = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * spec.sample_period;
        let snapshot = Snapshot {
            index: k as u64,
            timestamp: t,
            scenario: spec.seed,
            ego,
            fov,
            camera,
            objects: actors
                .iter()
                .filter(|a| in_front_fov(&a.object, &ego, fov))
                .map(|a| a.object.clone())
                .collect(),
        };
        frames.push(label_frame(&snapshot, zone_params)?);

        for sub in 0..substeps {
            let (target, steer) = spec.command_at(t + sub as f64 * dt);
            ego = kinematic_step(&ego, dt, target, steer, spec.ego.max_accel);
            for actor in &mut actors {
                actor.advance(dt, &mut rng, &turn_noise);
            }
        }
    }
    validate_frames(&frames, spec.sample_period)?;
    Ok(frames)
}

/// Checks the per-scenario frame invariants: timestamps advance by exactly
/// one period, objects sit inside the field of view, transforms agree with
/// the ego pose.
pub fn validate_frames(frames: &[Frame], sample_period: f64) -> Result<()> {
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.scenario == b.scenario {
            let dt = b.timestamp - a.timestamp;
            if (dt - sample_period).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "frames {} -> {}: timestamp step {dt} differs from sample period {sample_period}",
                    a.index, b.index
                )));
            }
        }
        if b.index <= a.index {
            return Err(Error::invalid(format!("frame indices not increasing at {}", b.index)));
        }
    }
    for f in frames {
        f.ego.validate(DEFAULT_MAX_STEER)?;
        if f.ego_to_world != f.ego.pose.to_rigid() {
            return Err(Error::invalid(format!("frame {}: ego_to_world disagrees with pose", f.index)));
        }
        for o in &f.objects {
            o.object.validate()?;
            if !in_front_fov(&o.object, &f.ego, f.fov) {
                return Err(Error::invalid(format!("frame {}: object {} outside fov", f.index, o.object.id)));
            }
        }
    }
    Ok(())
}

/// Concatenates per-scenario streams and renumbers frames consecutively.
pub fn concat_scenarios(streams: Vec<Vec<Frame>>) -> Vec<Frame> {
    let mut out: Vec<Frame> = streams.into_iter().flatten().collect();
    for (i, f) in out.iter_mut().enumerate() {
        f.index = i as u64;
    }
    out
}
