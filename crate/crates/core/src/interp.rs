//! Shape-preserving piecewise cubic Hermite interpolation (PCHIP).
//!
//! Knot derivatives follow Fritsch–Butland weighted harmonic means, so the
//! interpolant is C¹ and never overshoots monotone data.

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant. `xs` must be strictly increasing and at least
    /// two knots long; callers validate this.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert!(xs.len() >= 2 && xs.len() == ys.len());
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = s[0];
            ds[1] = s[0];
        } else {
            for k in 1..n - 1 {
                if s[k - 1] * s[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    ds[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
                }
            }
            ds[0] = end_slope(h[0], h[1], s[0], s[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
        Self { xs, ys, ds }
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn segment(&self, x: f64) -> usize {
        // index k with xs[k] <= x < xs[k+1], clamped to the last segment
        let k = self.xs.partition_point(|&xk| xk <= x);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }

    /// Value at `x`; constant extrapolation beyond the end knots.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        if x <= lo {
            return self.ys[0];
        }
        if x >= hi {
            return self.ys[self.ys.len() - 1];
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.ds[k] + h01 * self.ys[k + 1] + h11 * h * self.ds[k + 1]
    }

    /// First derivative at `x`; zero outside the knot range.
    pub fn derivative(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        if x < lo || x > hi {
            return 0.0;
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        (dh00 * self.ys[k] + dh01 * self.ys[k + 1]) / h + dh10 * self.ds[k] + dh11 * self.ds[k + 1]
    }
}

// three-point end derivative with the usual shape-preserving limits
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() || s0 == 0.0 {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}
