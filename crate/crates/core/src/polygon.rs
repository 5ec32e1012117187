//! Ground-plane polygons: shoelace area and convex clipping.
//!
//! All polygons handled here are counter-clockwise. Convex intersection
//! clips the subject against every half-plane of the clip polygon in turn
//! (Sutherland-Hodgman), which is exact for convex clip regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cross products below this magnitude count as collinear.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2D {
    pub vertices: Vec<Point2>,
}

impl Polygon2D {
    pub fn new(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    pub fn from_coords(coords: &[[f64; 2]]) -> Self {
        Self::new(coords.iter().copied().map(Point2::from).collect())
    }

    /// Shoelace signed area; positive for counter-clockwise winding.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            twice += a.x * b.y - b.x * a.y;
        }
        0.5 * twice
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point2::new(sx / n, sy / n)
    }

    /// Checks that the polygon is a non-degenerate, convex, CCW ring.
    pub fn validate_convex(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::invalid(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        if self.vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::invalid("polygon has a non-finite vertex"));
        }
        if self.signed_area() <= EPS {
            return Err(Error::invalid(
                "polygon is degenerate or not counter-clockwise",
            ));
        }
        let scale = self.bounding_extent().max(1.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            if cross(a, b, c) < -EPS * scale * scale {
                return Err(Error::invalid(format!(
                    "polygon is not convex at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(())
    }

    /// Inclusive point test for a convex CCW polygon.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0)
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    fn bounding_extent(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (hi.x - lo.x).max(hi.y - lo.y)
    }
}

/// Twice the signed area of triangle (a, b, c); positive when c is left of a→b.
#[inline]
fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub fn polygon_area(p: &Polygon2D) -> f64 {
    p.area()
}

/// Keeps the part of `subject` left of the directed line a→b.
fn clip_half_plane(subject: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let n = subject.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let ds = cross(a, b, s);
        let de = cross(a, b, e);
        let s_in = ds >= 0.0;
        let e_in = de >= 0.0;
        if s_in != e_in {
            let t = ds / (ds - de);
            out.push(Point2::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t));
        }
        if e_in {
            out.push(e);
        }
    }
    out
}

/// Intersection of two convex CCW polygons, or `None` when they share no
/// area (disjoint or touching only along an edge or at a vertex).
pub fn convex_intersection(p: &Polygon2D, q: &Polygon2D) -> Result<Option<Polygon2D>> {
    p.validate_convex()?;
    q.validate_convex()?;

    let mut current = p.vertices.clone();
    let m = q.vertices.len();
    for i in 0..m {
        if current.len() < 3 {
            return Ok(None);
        }
        current = clip_half_plane(&current, q.vertices[i], q.vertices[(i + 1) % m]);
    }
    dedup_ring(&mut current);
    if current.len() < 3 {
        return Ok(None);
    }
    let out = Polygon2D::new(current);
    if out.signed_area() <= EPS {
        return Ok(None);
    }
    Ok(Some(out))
}

/// Area of the intersection of two convex polygons (0 when disjoint).
pub fn overlap_area(p: &Polygon2D, q: &Polygon2D) -> Result<f64> {
    Ok(convex_intersection(p, q)?.map_or(0.0, |r| r.area()))
}

fn dedup_ring(points: &mut Vec<Point2>) {
    const TOL: f64 = 1e-12;
    points.dedup_by(|a, b| (a.x - b.x).abs() <= TOL && (a.y - b.y).abs() <= TOL);
    while points.len() > 1 {
        let first = points[0];
        let last = points[points.len() - 1];
        if (first.x - last.x).abs() <= TOL && (first.y - last.y).abs() <= TOL {
            points.pop();
        } else {
            break;
        }
    }
}
