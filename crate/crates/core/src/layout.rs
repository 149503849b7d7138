use serde::{Deserialize, Serialize};

use crate::error::{FarmError, Result};

/// Planar position in metres (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotates about the origin by `deg` degrees clockwise (compass sense),
    /// so a point's bearing from the origin grows by `deg`.
    pub fn rotated_clockwise(self, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(self.x * c + self.y * s, -self.x * s + self.y * c)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Turbine positions. Positions are pairwise distinct and finite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Layout {
    positions: Vec<Point>,
}

impl Layout {
    pub fn new(positions: Vec<Point>) -> Result<Self> {
        if positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(FarmError::InvalidLayout("non-finite turbine coordinate".into()));
        }
        for i in 0..positions.len() {
            for j in 0..i {
                if positions[i].distance(positions[j]) <= 0.0 {
                    return Err(FarmError::InvalidLayout(format!(
                        "turbines {j} and {i} share position ({}, {})",
                        positions[i].x, positions[i].y
                    )));
                }
            }
        }
        Ok(Self { positions })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn rotated_clockwise(&self, deg: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|p| p.rotated_clockwise(deg)).collect(),
        }
    }

    /// Smallest pairwise distance, infinite for fewer than two turbines.
    pub fn min_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.positions.len() {
            for j in 0..i {
                best = best.min(self.positions[i].distance(self.positions[j]));
            }
        }
        best
    }
}
