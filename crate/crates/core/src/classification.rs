//! Harmful/harmless labeling from footprint overlap with the danger zone.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_danger_zone, zone_to_world, EgoState, ZoneParams};
use crate::polygon::{overlap_area, Point2, Polygon2D};
use crate::simulation::{Frame, LabeledObject, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Vehicle,
    Pedestrian,
    Static,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Vehicle, Category::Pedestrian, Category::Static];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Vehicle => "vehicle",
            Category::Pedestrian => "pedestrian",
            Category::Static => "static",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Distribution {
    #[serde(rename = "ID", alias = "id")]
    Id,
    #[serde(rename = "OOD", alias = "ood")]
    Ood,
}

impl Distribution {
    pub const ALL: [Distribution; 2] = [Distribution::Id, Distribution::Ood];
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Id => "ID",
            Distribution::Ood => "OOD",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmLabel {
    Harmful,
    Harmless,
}

impl HarmLabel {
    pub const ALL: [HarmLabel; 2] = [HarmLabel::Harmful, HarmLabel::Harmless];

    pub fn flipped(self) -> Self {
        match self {
            HarmLabel::Harmful => HarmLabel::Harmless,
            HarmLabel::Harmless => HarmLabel::Harmful,
        }
    }
}

impl fmt::Display for HarmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HarmLabel::Harmful => "harmful",
            HarmLabel::Harmless => "harmless",
        })
    }
}

/// A 3D box in the world frame. `dims` is (length, width, height); the
/// length runs along the object's own forward axis, which `yaw` turns
/// clockwise from world north like an ego heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub center: [f64; 3],
    pub dims: [f64; 3],
    pub yaw: f64,
    pub category: Category,
    pub distribution: Distribution,
    pub kind: String,
}

impl SceneObject {
    pub fn validate(&self) -> Result<()> {
        if !self.dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
            return Err(Error::invalid(format!("box dims must be > 0, got {:?}", self.dims)).for_object(&self.id));
        }
        if !self.center.iter().chain([&self.yaw]).all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite box pose").for_object(&self.id));
        }
        if self.distribution == Distribution::Ood && self.category != Category::Static {
            return Err(Error::invalid("OOD objects must be static").for_object(&self.id));
        }
        Ok(())
    }

    pub fn ground_center(&self) -> Point2 {
        Point2::new(self.center[0], self.center[1])
    }

    /// Half of the footprint diagonal.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.dims[0].hypot(self.dims[1])
    }
}

/// Ground-plane rectangle under the box, counter-clockwise.
pub fn footprint(obj: &SceneObject) -> Polygon2D {
    let hl = obj.dims[0] / 2.0;
    let hw = obj.dims[1] / 2.0;
    let (s, c) = obj.yaw.sin_cos();
    let [cx, cy, _] = obj.center;
    let corners = [[-hw, -hl], [hw, -hl], [hw, hl], [-hw, hl]];
    Polygon2D::new(
        corners
            .iter()
            .map(|&[x, y]| Point2::new(c * x + s * y + cx, -s * x + c * y + cy))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    /// m²
    pub area: f64,
    /// overlap area / footprint area
    pub ratio: f64,
}

pub fn zone_overlap(obj: &SceneObject, zone_world: &Polygon2D) -> Result<Overlap> {
    let fp = footprint(obj);
    let fp_area = fp.area();
    if !(fp_area > 0.0) {
        return Err(Error::invalid("degenerate footprint").for_object(&obj.id));
    }
    let area = overlap_area(&fp, zone_world).map_err(|e| e.for_object(&obj.id))?;
    Ok(Overlap {
        area,
        ratio: area / fp_area,
    })
}

/// Harmful when the footprint shares non-zero area with the zone and that
/// overlap reaches either the area threshold or the ratio threshold.
pub fn classify_object(obj: &SceneObject, zone_world: &Polygon2D, params: &ZoneParams) -> Result<HarmLabel> {
    let ov = zone_overlap(obj, zone_world)?;
    let harmful = ov.area > 0.0
        && (ov.area >= params.overlap_area_threshold || ov.ratio >= params.overlap_ratio_threshold);
    Ok(if harmful {
        HarmLabel::Harmful
    } else {
        HarmLabel::Harmless
    })
}

/// Object centre lies ahead of the ego and within ±fov/2 of its forward axis.
pub fn in_front_fov(obj: &SceneObject, ego: &EgoState, fov: f64) -> bool {
    let local = ego.pose.to_local(obj.ground_center());
    if local.y <= 0.0 {
        return false;
    }
    local.x.atan2(local.y).abs() <= fov / 2.0
}

/// Builds the zone from the snapshot's ego state, drops objects outside the
/// field of view, and labels the rest.
pub fn label_frame(snapshot: &Snapshot, params: &ZoneParams) -> Result<Frame> {
    if !(snapshot.fov > 0.0 && snapshot.fov < std::f64::consts::PI) {
        return Err(Error::invalid(format!("fov must lie in (0, pi), got {}", snapshot.fov)));
    }
    let zone = build_danger_zone(&snapshot.ego, params)?;
    let zone_world = zone_to_world(&zone, &snapshot.ego.pose);
    let mut objects = Vec::new();
    for obj in &snapshot.objects {
        if !in_front_fov(obj, &snapshot.ego, snapshot.fov) {
            continue;
        }
        obj.validate()?;
        let label = classify_object(obj, &zone_world, params)?;
        objects.push(LabeledObject {
            object: obj.clone(),
            label,
        });
    }
    Ok(Frame {
        index: snapshot.index,
        timestamp: snapshot.timestamp,
        scenario: snapshot.scenario,
        ego: snapshot.ego,
        fov: snapshot.fov,
        ego_to_world: snapshot.ego.pose.to_rigid(),
        camera: snapshot.camera,
        objects,
    })
}

/// Re-labels the objects already in `frame` under a substituted ego state.
pub fn relabel(frame: &Frame, ego: &EgoState, params: &ZoneParams) -> Result<Vec<HarmLabel>> {
    let zone = build_danger_zone(ego, params)?;
    let zone_world = zone_to_world(&zone, &ego.pose);
    frame
        .objects
        .iter()
        .map(|o| classify_object(&o.object, &zone_world, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraModel, Pose2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    pub(crate) fn object(id: &str, x: f64, y: f64, dims: [f64; 3], yaw: f64) -> SceneObject {
        SceneObject {
            id: id.into(),
            center: [x, y, dims[2] / 2.0],
            dims,
            yaw,
            category: Category::Vehicle,
            distribution: Distribution::Id,
            kind: "car".into(),
        }
    }

    fn snapshot(ego: EgoState, objects: Vec<SceneObject>) -> Snapshot {
        Snapshot {
            index: 0,
            timestamp: 0.0,
            scenario: 0,
            ego,
            fov: FRAC_PI_2,
            camera: CameraModel::default(),
            objects,
        }
    }

    const CAR: [f64; 3] = [4.5, 1.9, 1.5];

    fn zone_world(speed: f64, theta: f64) -> Polygon2D {
        let ego = EgoState::at_origin(speed, theta).unwrap();
        zone_to_world(&build_danger_zone(&ego, &ZoneParams::default()).unwrap(), &ego.pose)
    }

    #[test]
    fn footprint_axis_aligned() {
        let fp = footprint(&object("a", 0.0, 0.0, [2.0, 1.0, 1.0], 0.0));
        assert_eq!(fp, Polygon2D::from_coords(&[[-0.5, -1.0], [0.5, -1.0], [0.5, 1.0], [-0.5, 1.0]]));
    }

    #[test]
    fn footprint_half_turn_same_set() {
        let a = footprint(&object("a", 0.0, 0.0, [2.0, 1.0, 1.0], 0.0));
        let b = footprint(&object("a", 0.0, 0.0, [2.0, 1.0, 1.0], PI));
        for v in &a.vertices {
            assert!(b.vertices.iter().any(|w| (v.x - w.x).abs() < 1e-12 && (v.y - w.y).abs() < 1e-12));
        }
    }

    #[test]
    fn footprint_quarter_diagonal() {
        let fp = footprint(&object("a", 0.0, 0.0, [2.0, 1.0, 1.0], FRAC_PI_4));
        // Corner (-0.5, -1) turned 45° clockwise: (x c + y s, -x s + y c).
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = Point2::new((-0.5 - 1.0) * r, (0.5 - 1.0) * r);
        assert!((fp.vertices[0].x - want.x).abs() < 1e-12);
        assert!((fp.vertices[0].y - want.y).abs() < 1e-12);
        assert!((fp.area() - 2.0).abs() < 1e-12);
        fp.validate_convex().unwrap();
    }

    #[test]
    fn inside_object_is_harmful() {
        let z = zone_world(5.0, 0.0);
        let car = object("car", 0.0, 8.0, CAR, 0.0);
        let ov = zone_overlap(&car, &z).unwrap();
        assert!((ov.ratio - 1.0).abs() < 1e-12);
        assert_eq!(classify_object(&car, &z, &ZoneParams::default()).unwrap(), HarmLabel::Harmful);
    }

    #[test]
    fn disjoint_object_is_harmless() {
        let z = zone_world(5.0, 0.0);
        let car = object("car", 10.0, 8.0, CAR, 0.0);
        assert_eq!(classify_object(&car, &z, &ZoneParams::default()).unwrap(), HarmLabel::Harmless);
    }

    #[test]
    fn boundary_contact_is_harmless_even_with_zero_thresholds() {
        let z = zone_world(5.0, 0.0);
        // Box spanning x in [1.75, 2.75]: touches the right zone edge only.
        let b = object("b", 2.25, 6.0, [2.0, 1.0, 1.0], 0.0);
        let zero = ZoneParams {
            overlap_area_threshold: 0.0,
            overlap_ratio_threshold: 0.0,
            ..ZoneParams::default()
        };
        assert_eq!(classify_object(&b, &z, &zero).unwrap(), HarmLabel::Harmless);
    }

    #[test]
    fn forty_percent_inside_is_harmful() {
        let z = zone_world(5.0, 0.0);
        // 2 m x 2 m box over x in [0.95, 2.95]: 0.8 m of its width lies
        // inside the x <= 1.75 zone edge, so 40% and 1.6 m².
        let b = object("b", 1.95, 6.0, [2.0, 2.0, 1.0], 0.0);
        let ov = zone_overlap(&b, &z).unwrap();
        assert!((ov.ratio - 0.4).abs() < 1e-12);
        assert!((ov.area - 1.6).abs() < 1e-12);
        let params = ZoneParams {
            overlap_area_threshold: 0.5,
            overlap_ratio_threshold: 0.3,
            ..ZoneParams::default()
        };
        assert_eq!(classify_object(&b, &z, &params).unwrap(), HarmLabel::Harmful);
        // Either threshold alone is enough.
        let strict_area = ZoneParams { overlap_area_threshold: 10.0, ..params };
        assert_eq!(classify_object(&b, &z, &strict_area).unwrap(), HarmLabel::Harmful);
        let strict_ratio = ZoneParams { overlap_ratio_threshold: 0.9, ..params };
        assert_eq!(classify_object(&b, &z, &strict_ratio).unwrap(), HarmLabel::Harmful);
        let both = ZoneParams { overlap_area_threshold: 10.0, overlap_ratio_threshold: 0.9, ..params };
        assert_eq!(classify_object(&b, &z, &both).unwrap(), HarmLabel::Harmless);
    }

    #[test]
    fn fov_bearings() {
        let ego = EgoState::at_origin(0.0, 0.0).unwrap();
        let fov = FRAC_PI_2;
        let at = |deg: f64| {
            let b = deg.to_radians();
            object("o", 10.0 * b.sin(), 10.0 * b.cos(), CAR, 0.0)
        };
        assert!(in_front_fov(&at(0.0), &ego, fov));
        assert!(!in_front_fov(&at(180.0), &ego, fov));
        assert!(in_front_fov(&at(44.0), &ego, fov));
        assert!(!in_front_fov(&at(46.0), &ego, fov));
        assert!(in_front_fov(&at(-44.0), &ego, fov));
        assert!(!in_front_fov(&at(-46.0), &ego, fov));
    }

    #[test]
    fn fov_follows_ego_heading() {
        let ego = EgoState::new(0.0, 0.0, Pose2::new(5.0, 5.0, FRAC_PI_2), 2.7).unwrap();
        assert!(in_front_fov(&object("o", 20.0, 5.0, CAR, 0.0), &ego, FRAC_PI_2));
        assert!(!in_front_fov(&object("o", 5.0, 20.0, CAR, 0.0), &ego, FRAC_PI_2));
    }

    #[test]
    fn empty_frame_has_no_labels() {
        let f = label_frame(&snapshot(EgoState::at_origin(3.0, 0.0).unwrap(), vec![]), &ZoneParams::default()).unwrap();
        assert!(f.objects.is_empty());
    }

    #[test]
    fn straight_ahead_car_depends_on_speed() {
        let car = object("car", 0.0, 8.0, CAR, 0.0);
        let fast = label_frame(&snapshot(EgoState::at_origin(5.0, 0.0).unwrap(), vec![car.clone()]), &ZoneParams::default()).unwrap();
        assert_eq!(fast.objects[0].label, HarmLabel::Harmful);
        // Zone depth 4 m; the car's rear edge is at 5.75 m.
        let stopped = label_frame(&snapshot(EgoState::at_origin(0.0, 0.0).unwrap(), vec![car]), &ZoneParams::default()).unwrap();
        assert_eq!(stopped.objects[0].label, HarmLabel::Harmless);
    }

    #[test]
    fn out_of_fov_objects_are_dropped() {
        let objs = vec![object("front", 0.0, 8.0, CAR, 0.0), object("behind", 0.0, -8.0, CAR, 0.0)];
        let f = label_frame(&snapshot(EgoState::at_origin(5.0, 0.0).unwrap(), objs), &ZoneParams::default()).unwrap();
        assert_eq!(f.objects.len(), 1);
        assert_eq!(f.objects[0].object.id, "front");
    }

    #[test]
    fn bad_object_error_names_it() {
        let mut bad = object("broken", 0.0, 8.0, CAR, 0.0);
        bad.dims[1] = 0.0;
        let err = label_frame(&snapshot(EgoState::at_origin(5.0, 0.0).unwrap(), vec![bad]), &ZoneParams::default()).unwrap_err();
        assert!(matches!(err, Error::Object { ref id, .. } if id == "broken"), "{err}");
    }

    #[test]
    fn labels_ignore_object_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let ego = EgoState::at_origin(rng.gen_range(0.0..12.0), rng.gen_range(-0.6..0.6)).unwrap();
            let objs: Vec<SceneObject> = (0..12)
                .map(|i| {
                    let mut o = object(&format!("o{i}"), rng.gen_range(-15.0..15.0), rng.gen_range(1.0..30.0), [rng.gen_range(0.4..5.0), rng.gen_range(0.4..2.5), 1.0], rng.gen_range(-PI..PI));
                    o.category = Category::Static;
                    o
                })
                .collect();
            let swapped: Vec<SceneObject> = objs
                .iter()
                .map(|o| SceneObject { distribution: Distribution::Ood, kind: "barrel".into(), ..o.clone() })
                .collect();
            let a = label_frame(&snapshot(ego, objs), &ZoneParams::default()).unwrap();
            let b = label_frame(&snapshot(ego, swapped), &ZoneParams::default()).unwrap();
            let la: Vec<_> = a.objects.iter().map(|o| o.label).collect();
            let lb: Vec<_> = b.objects.iter().map(|o| o.label).collect();
            assert_eq!(la, lb);
        }
    }

    #[test]
    fn zero_thresholds_flag_any_overlap() {
        let z = zone_world(5.0, 0.0);
        let zero = ZoneParams { overlap_area_threshold: 0.0, overlap_ratio_threshold: 0.0, ..ZoneParams::default() };
        // 1 cm sliver inside the zone.
        let sliver = object("s", 1.75 + 0.49, 6.0, [2.0, 1.0, 1.0], 0.0);
        assert!(zone_overlap(&sliver, &z).unwrap().area > 0.0);
        assert_eq!(classify_object(&sliver, &z, &zero).unwrap(), HarmLabel::Harmful);
        assert_eq!(classify_object(&sliver, &z, &ZoneParams::default()).unwrap(), HarmLabel::Harmless);
        // ratio 0: area threshold alone decides.
        let area_only = ZoneParams { overlap_area_threshold: 0.5, overlap_ratio_threshold: 0.0, ..ZoneParams::default() };
        let half_in = object("h", 1.75, 6.0, [2.0, 1.0, 1.0], 0.0);
        assert_eq!(classify_object(&half_in, &z, &area_only).unwrap(), HarmLabel::Harmful);
    }

    #[test]
    fn common_rigid_motion_keeps_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = ZoneParams::default();
        for _ in 0..300 {
            let speed = rng.gen_range(0.0..12.0);
            let theta = rng.gen_range(-0.6..0.6);
            let obj = object("o", rng.gen_range(-8.0..8.0), rng.gen_range(0.0..30.0), [rng.gen_range(0.4..5.0), rng.gen_range(0.4..2.5), 1.0], rng.gen_range(-PI..PI));
            let base_ego = EgoState::at_origin(speed, theta).unwrap();
            let zone = build_danger_zone(&base_ego, &params).unwrap();
            let base_ov = zone_overlap(&obj, &zone_to_world(&zone, &base_ego.pose)).unwrap();

            let motion = Pose2::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0), rng.gen_range(-PI..PI));
            let moved_center = motion.to_world(obj.ground_center());
            let moved = SceneObject {
                center: [moved_center.x, moved_center.y, obj.center[2]],
                yaw: obj.yaw + motion.yaw,
                ..obj.clone()
            };
            let moved_ov = zone_overlap(&moved, &zone_to_world(&zone, &motion)).unwrap();
            assert!((base_ov.area - moved_ov.area).abs() < 1e-9);
            // Labels can only disagree when the overlap sits on a threshold.
            let near_threshold = (base_ov.area - params.overlap_area_threshold).abs() < 1e-9
                || (base_ov.ratio - params.overlap_ratio_threshold).abs() < 1e-9;
            if !near_threshold {
                assert_eq!(
                    classify_object(&obj, &zone_to_world(&zone, &base_ego.pose), &params).unwrap(),
                    classify_object(&moved, &zone_to_world(&zone, &motion), &params).unwrap()
                );
            }
        }
    }
}
