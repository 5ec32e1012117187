//! Static SVG renders of a labeled frame: bird's-eye view and camera view.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classification::{footprint, HarmLabel};
use crate::error::{Error, Result};
use crate::geometry::{build_danger_zone, project_zone_to_image, ZoneParams};
use crate::polygon::Point2;
use crate::simulation::Frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderStyle {
    pub harmful_color: String,
    pub harmless_color: String,
    pub zone_color: String,
    /// Bird's-eye image size, px.
    pub width: u32,
    pub height: u32,
    /// Metres shown left/right of the ego and ahead of the bumper.
    pub lateral_range: f64,
    pub forward_range: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            harmful_color: "red".into(),
            harmless_color: "blue".into(),
            zone_color: "green".into(),
            width: 800,
            height: 800,
            lateral_range: 30.0,
            forward_range: 55.0,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        let c = [&self.harmful_color, &self.harmless_color, &self.zone_color];
        if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
            return Err(Error::invalid("render colors must be distinct"));
        }
        if self.width == 0 || self.height == 0 || !(self.lateral_range > 0.0 && self.forward_range > 0.0) {
            return Err(Error::invalid("render size and ranges must be positive"));
        }
        Ok(())
    }

    fn color(&self, label: HarmLabel) -> &str {
        match label {
            HarmLabel::Harmful => &self.harmful_color,
            HarmLabel::Harmless => &self.harmless_color,
        }
    }
}

fn points_attr(points: impl IntoIterator<Item = Point2>) -> String {
    points
        .into_iter()
        .map(|p| format!("{:.3},{:.3}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Top-down view in the ego frame, forward pointing up the image.
pub fn render_bev(frame: &Frame, params: &ZoneParams, style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let zone = build_danger_zone(&frame.ego, params)?;
    let (w, h) = (style.width as f64, style.height as f64);
    let back = 5.0;
    let span_y = style.forward_range + back;
    let to_px = |p: Point2| {
        Point2::new(
            (p.x + style.lateral_range) / (2.0 * style.lateral_range) * w,
            (style.forward_range - p.y) / span_y * h,
        )
    };

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#, style.width, style.height, style.width, style.height).unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<polygon id="danger-zone" data-ego-points="{}" points="{}" fill="{}" fill-opacity="0.15" stroke="{}" stroke-width="2"/>"#,
        points_attr(zone.vertices),
        points_attr(zone.vertices.iter().map(|&p| to_px(p))),
        style.zone_color,
        style.zone_color
    )
    .unwrap();
    for o in &frame.objects {
        let fp = footprint(&o.object);
        let local = fp.vertices.iter().map(|&p| to_px(frame.ego.pose.to_local(p)));
        writeln!(
            svg,
            r#"<polygon class="object {}" data-id="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            o.label,
            o.object.id,
            points_attr(local),
            style.color(o.label)
        )
        .unwrap();
    }
    let ego_box = [[-0.95, -4.5], [0.95, -4.5], [0.95, 0.0], [-0.95, 0.0]].map(|c| to_px(Point2::from(c)));
    writeln!(svg, r#"<polygon id="ego" points="{}" fill="gray"/>"#, points_attr(ego_box)).unwrap();
    writeln!(
        svg,
        r#"<text x="8" y="20" font-family="monospace" font-size="14">frame {} speed {:.2} m/s steer {:.1} deg</text>"#,
        frame.index,
        frame.ego.speed,
        frame.ego.steering_angle.to_degrees()
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Front camera view: the projected zone trapezoid and a 2D box around each
/// object whose corners all project in front of the lens.
pub fn render_camera(frame: &Frame, params: &ZoneParams, style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let cam = &frame.camera;
    let zone = build_danger_zone(&frame.ego, params)?;
    let trapezoid = project_zone_to_image(&zone, cam)?;

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#, cam.image_width, cam.image_height, cam.image_width, cam.image_height).unwrap();
    writeln!(svg, r##"<rect width="100%" height="100%" fill="#202020"/>"##).unwrap();
    writeln!(
        svg,
        r#"<polygon id="danger-zone" points="{}" fill="{}" fill-opacity="0.2" stroke="{}" stroke-width="3"/>"#,
        points_attr(trapezoid.vertices),
        style.zone_color,
        style.zone_color
    )
    .unwrap();
    for o in &frame.objects {
        let base = footprint(&o.object);
        let height = o.object.dims[2];
        let ground = o.object.center[2] - height / 2.0;
        let mut corners = Vec::with_capacity(8);
        for p in &base.vertices {
            let local = frame.ego.pose.to_local(*p);
            for z in [ground, ground + height] {
                corners.push([local.x, local.y, z]);
            }
        }
        let projected: std::result::Result<Vec<Point2>, f64> = corners.iter().map(|c| cam.project(*c)).collect();
        let Ok(px) = projected else { continue };
        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &px {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        writeln!(
            svg,
            r#"<rect class="object {}" data-id="{}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="{}" stroke-width="2"/>"#,
            o.label,
            o.object.id,
            lo.x,
            lo.y,
            hi.x - lo.x,
            hi.y - lo.y,
            style.color(o.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads back the `points` of the element with `id="danger-zone"`, or its
/// `data-ego-points` when `ego_frame` is set.
pub fn zone_points_from_svg(svg: &str, ego_frame: bool) -> Option<Vec<Point2>> {
    let start = svg.find(r#"id="danger-zone""#)?;
    let tag = &svg[start..start + svg[start..].find("/>")?];
    let attr = if ego_frame { "data-ego-points=\"" } else { " points=\"" };
    let from = tag.find(attr)? + attr.len();
    let body = &tag[from..from + tag[from..].find('"')?];
    body.split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            Some(Point2::new(x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}
