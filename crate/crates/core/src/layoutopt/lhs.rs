//! Latin-hypercube turbine placement over a polygon's bounding box.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::Boundary;
use crate::error::{invalid, FarmError, Result};
use crate::layout::{Layout, Point};

const MAX_CELL_TRIES: usize = 100;
/// Minimum separation between initial points, m.
pub const MIN_INITIAL_SEPARATION: f64 = 1.0;

/// Stratified sample plus the bookkeeping needed to check it.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsSample {
    pub layout: Layout,
    /// x-stratum of point i is i; its y-stratum is `y_strata[i]`.
    pub y_strata: Vec<usize>,
    /// False when the point had to be moved onto the polygon boundary.
    pub in_cell: Vec<bool>,
}

pub fn latin_hypercube_layout(n: usize, boundary: &Boundary, seed: u64) -> Result<Layout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(latin_hypercube_sample(n, boundary, &mut rng)?.layout)
}

/// Splits each bounding-box axis into `n` strata, pairs x- and y-strata by a
/// random permutation and draws one point per paired cell. Points outside
/// the polygon are redrawn inside their cell, then snapped to the boundary.
pub fn latin_hypercube_sample<R: Rng + ?Sized>(n: usize, boundary: &Boundary, rng: &mut R) -> Result<LhsSample> {
    if n == 0 {
        return Err(invalid("need at least one turbine"));
    }
    let (lo, hi) = boundary.bounding_box();
    let cell_w = (hi.x - lo.x) / n as f64;
    let cell_h = (hi.y - lo.y) / n as f64;
    let mut y_strata: Vec<usize> = (0..n).collect();
    y_strata.shuffle(rng);

    let mut positions = Vec::with_capacity(n);
    let mut in_cell = Vec::with_capacity(n);
    for (i, &j) in y_strata.iter().enumerate() {
        let mut placed = None;
        let mut last = lo;
        for _ in 0..MAX_CELL_TRIES {
            let p = Point::new(
                lo.x + (i as f64 + rng.random::<f64>()) * cell_w,
                lo.y + (j as f64 + rng.random::<f64>()) * cell_h,
            );
            if boundary.contains(p) {
                placed = Some(p);
                break;
            }
            last = p;
        }
        match placed {
            Some(p) => {
                positions.push(p);
                in_cell.push(true);
            }
            None => {
                positions.push(boundary.nearest_boundary_point(last));
                in_cell.push(false);
            }
        }
    }

    for i in 0..n {
        for k in 0..i {
            if positions[i].distance(positions[k]) < MIN_INITIAL_SEPARATION {
                return Err(FarmError::InitializationFailure(format!(
                    "cannot place {n} turbines at least {MIN_INITIAL_SEPARATION} m apart in the boundary"
                )));
            }
        }
    }
    Ok(LhsSample {
        layout: Layout::new(positions)?,
        y_strata,
        in_cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_in_square() {
        let b = Boundary::rectangle(1000.0, 1000.0).unwrap();
        let l = latin_hypercube_layout(1, &b, 7).unwrap();
        assert_eq!(l.len(), 1);
        assert!(b.contains(l.positions()[0]));
    }

    #[test]
    fn strata_are_distinct() {
        let b = Boundary::rectangle(2000.0, 1000.0).unwrap();
        let l = latin_hypercube_layout(10, &b, 3).unwrap();
        let mut xs: Vec<usize> = l.positions().iter().map(|p| (p.x / 200.0) as usize).collect();
        let mut ys: Vec<usize> = l.positions().iter().map(|p| (p.y / 100.0) as usize).collect();
        xs.sort();
        ys.sort();
        assert_eq!(xs, (0..10).collect::<Vec<_>>());
        assert_eq!(ys, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn zero_turbines_rejected() {
        let b = Boundary::rectangle(10.0, 10.0).unwrap();
        assert!(latin_hypercube_layout(0, &b, 1).is_err());
    }

    #[test]
    fn thin_polygon_fails() {
        let b = Boundary::rectangle(0.5, 0.5).unwrap();
        assert!(matches!(
            latin_hypercube_layout(5, &b, 1),
            Err(FarmError::InitializationFailure(_))
        ));
    }
}
