//! Simple-polygon boundary: containment, area and distances.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::layout::Point;

/// Points within this distance of an edge count as inside, m.
pub const EDGE_TOLERANCE: f64 = 1e-9;
const M2_PER_KM2: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Boundary {
    vertices: Vec<Point>,
}

impl Boundary {
    /// Validates a simple polygon (at least three vertices, no
    /// self-intersections, positive area). Closing vertex is implicit.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(invalid("boundary needs at least three vertices"));
        }
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(invalid("boundary has non-finite vertices"));
        }
        let b = Self { vertices };
        let n = b.vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a0, a1) = b.edge(i);
                let (b0, b1) = b.edge(j);
                if segments_intersect(a0, a1, b0, b1) {
                    return Err(invalid(format!("boundary edges {i} and {j} intersect")));
                }
            }
        }
        polygon_area(&b)?;
        Ok(b)
    }

    /// Axis-aligned rectangle with its lower-left corner at the origin.
    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::new(vec![
            Point::new(0.0, 0.0),
            Point::new(width, 0.0),
            Point::new(width, height),
            Point::new(0.0, height),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(|i| self.edge(i))
    }

    /// (min, max) corners of the bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let mut a = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let cross = p.x * q.y - q.x * p.y;
            a += cross;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        Point::new(cx / (3.0 * a), cy / (3.0 * a))
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, self)
    }

    /// Closest point on the boundary polyline.
    pub fn nearest_boundary_point(&self, p: Point) -> Point {
        self.edges()
            .map(|(a, b)| closest_on_segment(p, a, b))
            .min_by(|u, v| p.distance(*u).total_cmp(&p.distance(*v)))
            .expect("boundary has edges")
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| p.distance(closest_on_segment(p, a, b)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance outside the polygon; zero for interior and edge points.
    pub fn outside_distance(&self, p: Point) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            self.distance_to_boundary(p)
        }
    }

    /// `p` itself when inside, otherwise the nearest boundary point.
    pub fn clamp_inside(&self, p: Point) -> Point {
        if self.contains(p) {
            p
        } else {
            self.nearest_boundary_point(p)
        }
    }
}

impl TryFrom<Vec<[f64; 2]>> for Boundary {
    type Error = crate::error::FarmError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[x, y]| Point::new(x, y)).collect())
    }
}

impl From<Boundary> for Vec<[f64; 2]> {
    fn from(b: Boundary) -> Self {
        b.vertices.iter().map(|p| [p.x, p.y]).collect()
    }
}

pub fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a;
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    Point::new(a.x + t * dx, a.y + t * dy)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Even-odd ray casting; points on (or within 1e-9 m of) an edge are inside.
pub fn point_in_polygon(p: Point, boundary: &Boundary) -> bool {
    if boundary.distance_to_boundary(p) <= EDGE_TOLERANCE {
        return true;
    }
    let mut inside = false;
    for (a, b) in boundary.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Enclosed area in km² (shoelace formula).
pub fn polygon_area(boundary: &Boundary) -> Result<f64> {
    let twice: f64 = boundary.edges().map(|(p, q)| p.x * q.y - q.x * p.y).sum();
    let km2 = twice.abs() / 2.0 / M2_PER_KM2;
    if !(km2 >= 1e-12) {
        return Err(invalid("degenerate boundary polygon (zero area)"));
    }
    Ok(km2)
}

/// Fraction of turbines whose distance to the boundary polyline is at most `band` m.
pub fn edge_clustering_metric(positions: &[Point], boundary: &Boundary, band: f64) -> Result<f64> {
    if !(band > 0.0) {
        return Err(invalid("band must be positive"));
    }
    if positions.is_empty() {
        return Ok(0.0);
    }
    let near = positions
        .iter()
        .filter(|&&p| boundary.distance_to_boundary(p) <= band)
        .count();
    Ok(near as f64 / positions.len() as f64)
}
