//! Danger-zone construction and the frames it lives in.
//!
//! Frame conventions used throughout the crate:
//!
//! * ego frame: origin at the centre of the front bumper on the ground,
//!   `x` lateral (right), `y` forward, `z` up.
//! * world frame: `x` east, `y` north, `z` up. A [`Pose2`] yaw is a compass
//!   heading, clockwise from world `+y`, so `yaw = 0` faces north and
//!   `yaw = π/2` faces east.
//! * camera frame: `x` right, `y` down, `z` along the optical axis.
//!
//! Positive steering angles turn right, i.e. clockwise seen from above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{Point2, Polygon2D};

/// 35 degrees.
pub const DEFAULT_MAX_STEER: f64 = 0.6109;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub const fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    /// Unit vector of the ego forward axis in world coordinates.
    pub fn heading(&self) -> Point2 {
        Point2::new(self.yaw.sin(), self.yaw.cos())
    }

    pub fn to_world(&self, p: Point2) -> Point2 {
        let (s, c) = self.yaw.sin_cos();
        Point2::new(c * p.x + s * p.y + self.x, -s * p.x + c * p.y + self.y)
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        let (s, c) = self.yaw.sin_cos();
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        Point2::new(c * dx - s * dy, s * dx + c * dy)
    }

    pub fn to_rigid(&self) -> Rigid3 {
        let (s, c) = self.yaw.sin_cos();
        Rigid3 {
            rotation: [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
            translation: [self.x, self.y, 0.0],
        }
    }
}

/// Rotation followed by translation: `p' = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rigid3 {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl Rigid3 {
    pub const IDENTITY: Rigid3 = Rigid3 {
        rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        translation: [0.0; 3],
    };

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    pub fn inverse(&self) -> Rigid3 {
        let r = &self.rotation;
        let mut rt = [[0.0; 3]; 3];
        for (i, row) in rt.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = r[j][i];
            }
        }
        let t = self.translation;
        let mut nt = [0.0; 3];
        for (i, v) in nt.iter_mut().enumerate() {
            *v = -(rt[i][0] * t[0] + rt[i][1] * t[1] + rt[i][2] * t[2]);
        }
        Rigid3 {
            rotation: rt,
            translation: nt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    /// m/s
    pub speed: f64,
    /// rad, positive turns right
    pub steering_angle: f64,
    pub pose: Pose2,
    /// m
    pub wheelbase: f64,
}

impl EgoState {
    pub fn new(speed: f64, steering_angle: f64, pose: Pose2, wheelbase: f64) -> Result<Self> {
        let ego = Self {
            speed,
            steering_angle,
            pose,
            wheelbase,
        };
        ego.validate(DEFAULT_MAX_STEER)?;
        Ok(ego)
    }

    /// Ego at the world origin facing north with a 2.7 m wheelbase.
    pub fn at_origin(speed: f64, steering_angle: f64) -> Result<Self> {
        Self::new(speed, steering_angle, Pose2::default(), 2.7)
    }

    pub fn validate(&self, max_steer: f64) -> Result<()> {
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::invalid(format!("speed must be >= 0, got {}", self.speed)));
        }
        if !(self.steering_angle.abs() <= max_steer + 1e-12) {
            return Err(Error::invalid(format!(
                "|steering angle| {} exceeds limit {}",
                self.steering_angle, max_steer
            )));
        }
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return Err(Error::invalid(format!(
                "wheelbase must be > 0, got {}",
                self.wheelbase
            )));
        }
        if ![self.pose.x, self.pose.y, self.pose.yaw].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("ego pose is not finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoneParams {
    /// Zone depth at standstill, m.
    pub min_safe_distance: f64,
    /// Seconds of travel added to the depth per m/s of speed.
    pub speed_gain: f64,
    /// Lateral extent of the zone, m.
    pub width: f64,
    /// Overlap area (m²) at or above which an object is harmful.
    pub overlap_area_threshold: f64,
    /// Overlap/footprint area ratio at or above which an object is harmful.
    pub overlap_ratio_threshold: f64,
}

impl Default for ZoneParams {
    fn default() -> Self {
        Self {
            min_safe_distance: 4.0,
            speed_gain: 2.0,
            width: 3.5,
            overlap_area_threshold: 0.5,
            overlap_ratio_threshold: 0.3,
        }
    }
}

impl ZoneParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("min_safe_distance", self.min_safe_distance),
            ("speed_gain", self.speed_gain),
            ("width", self.width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.overlap_area_threshold >= 0.0 && self.overlap_area_threshold.is_finite()) {
            return Err(Error::invalid("overlap_area_threshold must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.overlap_ratio_threshold) {
            return Err(Error::invalid("overlap_ratio_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Zone depth grows linearly with speed: `speed * speed_gain + min_safe_distance`.
pub fn zone_depth(speed: f64, params: &ZoneParams) -> Result<f64> {
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(Error::invalid(format!("speed must be >= 0, got {speed}")));
    }
    Ok(speed * params.speed_gain + params.min_safe_distance)
}

/// Rotation about the z axis, counter-clockwise for positive `theta`.
pub fn rotate_about_z(v: [f64; 3], theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DangerZone {
    /// Ego-frame ground points, CCW: near-left, near-right, far-right, far-left.
    pub vertices: [Point2; 4],
    pub depth: f64,
    pub width: f64,
    pub theta: f64,
}

impl DangerZone {
    pub fn polygon(&self) -> Polygon2D {
        Polygon2D::new(self.vertices.to_vec())
    }

    pub fn area(&self) -> f64 {
        self.polygon().area()
    }

    /// Ground-plane points with z = 0.
    pub fn vertices_3d(&self) -> [[f64; 3]; 4] {
        self.vertices.map(|p| [p.x, p.y, 0.0])
    }
}

/// Rectangle of length `zone_depth(speed)` and width `params.width` starting
/// at the front bumper, swung about the bumper origin by the steering angle.
pub fn build_danger_zone(ego: &EgoState, params: &ZoneParams) -> Result<DangerZone> {
    ego.validate(DEFAULT_MAX_STEER)?;
    params.validate()?;
    let depth = zone_depth(ego.speed, params)?;
    let half = params.width / 2.0;
    let straight = [
        [-half, 0.0, 0.0],
        [half, 0.0, 0.0],
        [half, depth, 0.0],
        [-half, depth, 0.0],
    ];
    // Right turns are clockwise in the x-right/y-forward/z-up frame.
    let vertices = straight.map(|v| {
        let r = rotate_about_z(v, -ego.steering_angle);
        Point2::new(r[0], r[1])
    });
    Ok(DangerZone {
        vertices,
        depth,
        width: params.width,
        theta: ego.steering_angle,
    })
}

pub fn zone_to_world(zone: &DangerZone, pose: &Pose2) -> Polygon2D {
    Polygon2D::new(zone.vertices.iter().map(|&p| pose.to_world(p)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub ego_to_camera: Rigid3,
}

impl CameraModel {
    /// Level or downward-pitched camera mounted at `mount` (ego frame) looking
    /// along the ego forward axis, principal point at the image centre.
    pub fn forward_facing(
        focal: f64,
        image_width: u32,
        image_height: u32,
        mount: [f64; 3],
        pitch: f64,
    ) -> Result<Self> {
        let (s, c) = pitch.sin_cos();
        let rotation = [[1.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]];
        let mut translation = [0.0; 3];
        for i in 0..3 {
            translation[i] = -(rotation[i][0] * mount[0]
                + rotation[i][1] * mount[1]
                + rotation[i][2] * mount[2]);
        }
        let cam = Self {
            fx: focal,
            fy: focal,
            cx: image_width as f64 / 2.0,
            cy: image_height as f64 / 2.0,
            image_width,
            image_height,
            ego_to_camera: Rigid3 {
                rotation,
                translation,
            },
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid("focal lengths must be > 0"));
        }
        if !(self.cx >= 0.0
            && self.cx <= self.image_width as f64
            && self.cy >= 0.0
            && self.cy <= self.image_height as f64)
        {
            return Err(Error::invalid("principal point must lie inside the image"));
        }
        let fov = self.horizontal_fov();
        if !(fov > 0.0 && fov < std::f64::consts::PI) {
            return Err(Error::invalid("horizontal field of view must lie in (0, pi)"));
        }
        Ok(())
    }

    pub fn horizontal_fov(&self) -> f64 {
        let w = self.image_width as f64;
        (self.cx / self.fx).atan() + ((w - self.cx) / self.fx).atan()
    }

    /// Pinhole projection of an ego-frame point. Returns the camera-frame
    /// depth alongside the pixel so callers can report the offending point.
    pub fn project(&self, p_ego: [f64; 3]) -> std::result::Result<Point2, f64> {
        let pc = self.ego_to_camera.apply(p_ego);
        if pc[2] <= 1e-9 {
            return Err(pc[2]);
        }
        Ok(Point2::new(
            self.fx * pc[0] / pc[2] + self.cx,
            self.fy * pc[1] / pc[2] + self.cy,
        ))
    }
}

impl Default for CameraModel {
    /// 1600x900 image, 800 px focal length (90° horizontal FOV), mounted
    /// 1.5 m behind the bumper at 1.6 m height.
    fn default() -> Self {
        Self::forward_facing(800.0, 1600, 900, [0.0, -1.5, 1.6], 0.0)
            .expect("default camera is valid")
    }
}

/// Pixel polygon of the zone's four ground vertices.
pub fn project_zone_to_image(zone: &DangerZone, cam: &CameraModel) -> Result<Polygon2D> {
    let mut pixels = Vec::with_capacity(4);
    for (vertex, p) in zone.vertices_3d().into_iter().enumerate() {
        match cam.project(p) {
            Ok(px) => pixels.push(px),
            Err(depth) => return Err(Error::BehindCamera { vertex, depth }),
        }
    }
    Ok(Polygon2D::new(pixels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn deg(d: f64) -> f64 {
        d * PI / 180.0
    }

    fn close(a: Point2, b: Point2, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    #[test]
    fn depth_values() {
        let p = ZoneParams::default();
        assert_eq!(zone_depth(0.0, &p).unwrap(), 4.0);
        assert_eq!(zone_depth(5.0, &p).unwrap(), 14.0);
        assert!((zone_depth(8.35, &p).unwrap() - 20.7).abs() < 1e-12);
        assert!(zone_depth(-0.1, &p).is_err());
    }

    #[test]
    fn depth_is_affine_with_gain_slope() {
        let p = ZoneParams {
            speed_gain: 2.0,
            ..ZoneParams::default()
        };
        let d = |s| zone_depth(s, &p).unwrap();
        assert_eq!(d(2.0) - d(1.0), 2.0);
        assert_eq!(d(7.0) - d(3.0), 8.0);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotate_about_z([1.0, 0.0, 0.0], 0.0), [1.0, 0.0, 0.0]);
        let q = rotate_about_z([1.0, 0.0, 0.0], FRAC_PI_2);
        assert!(q[0].abs() < 1e-15 && (q[1] - 1.0).abs() < 1e-15 && q[2] == 0.0);
        let r = rotate_about_z([1.0, 0.0, 0.0], deg(26.4));
        assert!((r[0] - 0.895_711_76).abs() < 1e-6, "{r:?}");
        assert!((r[1] - 0.444_635_18).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn standstill_zone_is_lane_box() {
        let ego = EgoState::at_origin(0.0, 0.0).unwrap();
        let z = build_danger_zone(&ego, &ZoneParams::default()).unwrap();
        let want = [[-1.75, 0.0], [1.75, 0.0], [1.75, 4.0], [-1.75, 4.0]];
        for (v, w) in z.vertices.iter().zip(want) {
            assert_eq!(*v, Point2::from(w));
        }
        let z5 = build_danger_zone(&EgoState::at_origin(5.0, 0.0).unwrap(), &ZoneParams::default())
            .unwrap();
        assert_eq!(z5.vertices[2], Point2::new(1.75, 14.0));
        assert_eq!(z5.depth, 14.0);
    }

    #[test]
    fn steered_zone_swings_right() {
        let theta = deg(26.4);
        let ego = EgoState::at_origin(8.35, theta).unwrap();
        let z = build_danger_zone(&ego, &ZoneParams::default()).unwrap();
        // Far-left corner (-1.75, 20.7) rotated clockwise by 26.4°, by hand.
        let (s, c) = theta.sin_cos();
        let want = Point2::new(-1.75 * c + 20.7 * s, 1.75 * s + 20.7 * c);
        assert!(close(z.vertices[3], want, 1e-12));
        assert!(want.x > 7.0, "far edge must sit to the right of the lane");
        assert!((z.area() - 20.7 * 3.5).abs() < 1e-9);
    }

    #[test]
    fn world_transform_examples() {
        let z = build_danger_zone(&EgoState::at_origin(0.0, 0.0).unwrap(), &ZoneParams::default())
            .unwrap();
        assert_eq!(zone_to_world(&z, &Pose2::default()), z.polygon());
        let shifted = zone_to_world(&z, &Pose2::new(10.0, 0.0, 0.0));
        for (a, b) in shifted.vertices.iter().zip(&z.vertices) {
            assert_eq!(a.x, b.x + 10.0);
            assert_eq!(a.y, b.y);
        }
        // Facing east from (3,4): forward 4 m goes to +x, right 1.75 m to -y.
        let turned = zone_to_world(&z, &Pose2::new(3.0, 4.0, FRAC_PI_2));
        assert!(close(turned.vertices[2], Point2::new(7.0, 2.25), 1e-12));
        assert!((turned.area() - z.area()).abs() < 1e-12);
    }

    #[test]
    fn rigid_inverse_round_trips() {
        let cam = CameraModel::default();
        let inv = cam.ego_to_camera.inverse();
        let p = [1.0, 2.0, 3.0];
        let back = inv.apply(cam.ego_to_camera.apply(p));
        for i in 0..3 {
            assert!((back[i] - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn default_camera_fov_is_ninety_degrees() {
        assert!((CameraModel::default().horizontal_fov() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn straight_zone_projects_to_symmetric_trapezoid() {
        let cam = CameraModel::forward_facing(1000.0, 1600, 900, [0.0, -1.5, 1.6], 0.0).unwrap();
        let z = build_danger_zone(&EgoState::at_origin(5.0, 0.0).unwrap(), &ZoneParams::default())
            .unwrap();
        let img = project_zone_to_image(&z, &cam).unwrap();
        let v = &img.vertices;
        // Far-left ground point (-1.75, 14, 0) sits 15.5 m in front of and
        // 1.6 m below the lens: u = 800 - 1000*1.75/15.5, v = 450 + 1000*1.6/15.5.
        assert!(close(v[3], Point2::new(687.096_774_193_548_4, 553.225_806_451_612_9), 1e-9));
        assert!((v[0].x + v[1].x - 1600.0).abs() < 1e-9);
        assert!((v[2].x + v[3].x - 1600.0).abs() < 1e-9);
        let near = v[1].x - v[0].x;
        let far = v[2].x - v[3].x;
        assert!(far < near);
        assert_eq!(v[0].y, v[1].y);
        assert_eq!(v[2].y, v[3].y);
    }

    #[test]
    fn vertex_behind_camera_is_reported() {
        let cam = CameraModel::forward_facing(1000.0, 1600, 900, [0.0, 1.0, 1.6], 0.0).unwrap();
        let z = build_danger_zone(&EgoState::at_origin(5.0, 0.0).unwrap(), &ZoneParams::default())
            .unwrap();
        match project_zone_to_image(&z, &cam) {
            Err(Error::BehindCamera { vertex, .. }) => assert_eq!(vertex, 0),
            other => panic!("expected behind-camera error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_ego_is_rejected() {
        assert!(EgoState::at_origin(-1.0, 0.0).is_err());
        assert!(EgoState::at_origin(1.0, 0.7).is_err());
        assert!(EgoState::new(1.0, 0.0, Pose2::default(), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn rotation_inverse_and_norm(x in -1e3..1e3f64, y in -1e3..1e3f64, z in -1e3..1e3f64, t in -10.0..10.0f64) {
            let v = [x, y, z];
            let r = rotate_about_z(v, t);
            let back = rotate_about_z(r, -t);
            let scale = 1.0 + x.abs().max(y.abs());
            for i in 0..3 {
                prop_assert!((back[i] - v[i]).abs() <= 1e-12 * scale);
            }
            prop_assert_eq!(r[2], z);
            let n0 = (x * x + y * y).sqrt();
            let n1 = (r[0] * r[0] + r[1] * r[1]).sqrt();
            prop_assert!((n0 - n1).abs() <= 1e-12 * scale);
        }

        #[test]
        fn zone_area_and_mirror(speed in 0.0..30.0f64, theta in -0.6..0.6f64) {
            let p = ZoneParams::default();
            let z = build_danger_zone(&EgoState::at_origin(speed, theta).unwrap(), &p).unwrap();
            let want = z.depth * p.width;
            prop_assert!((z.area() - want).abs() <= 1e-9 * want);
            z.polygon().validate_convex().unwrap();
            let m = build_danger_zone(&EgoState::at_origin(speed, -theta).unwrap(), &p).unwrap();
            // Mirroring swaps left and right corners.
            for (a, b) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
                prop_assert!((z.vertices[a].x + m.vertices[b].x).abs() <= 1e-12);
                prop_assert!((z.vertices[a].y - m.vertices[b].y).abs() <= 1e-12);
            }
        }

        #[test]
        fn faster_zone_contains_slower(s1 in 0.0..20.0f64, ds in 0.0..10.0f64, theta in -0.6..0.6f64) {
            let p = ZoneParams::default();
            let small = build_danger_zone(&EgoState::at_origin(s1, theta).unwrap(), &p).unwrap();
            let big = build_danger_zone(&EgoState::at_origin(s1 + ds, theta).unwrap(), &p)
                .unwrap()
                .polygon();
            // Convex containment reduces to containment of the vertices, with
            // a small slack for rounding on the shared edges.
            for v in small.vertices {
                let n = big.vertices.len();
                for i in 0..n {
                    let a = big.vertices[i];
                    let b = big.vertices[(i + 1) % n];
                    let cross = (b.x - a.x) * (v.y - a.y) - (b.y - a.y) * (v.x - a.x);
                    prop_assert!(cross >= -1e-9);
                }
            }
        }
    }
}
