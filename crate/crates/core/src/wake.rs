//! Engineering wake models (Jensen top-hat, Bastankhah Gaussian), deficit
//! superposition and the upstream-to-downstream effective-speed sweep.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::layout::{Layout, Point};
use crate::turbine::TurbineSpec;

/// Turbines closer than this along the wind are not in each other's wake, m.
pub const UPSTREAM_TOLERANCE: f64 = 1e-9;
/// Upper bound on the Gaussian radical argument ct / (8 (σ/D)²).
pub const MAX_RADICAL_ARGUMENT: f64 = 0.999;
// exp(-40) ~ 4e-18: below f64 resolution of any speed it could change
const GAUSSIAN_TAIL_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WakeModel {
    Jensen,
    #[default]
    Bastankhah,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Superposition {
    /// Root-sum-square of deficit fractions.
    #[default]
    Rss,
}

/// Velocity a deficit fraction is taken relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DeficitBasis {
    /// Scaled by the upstream turbine's own inflow over the free stream.
    #[default]
    Local,
    Freestream,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WakeModelConfig {
    pub model: WakeModel,
    pub k_jensen: f64,
    pub k_star: f64,
    pub superposition: Superposition,
    pub deficit_basis: DeficitBasis,
    /// Lateral wake-spread multiplier (1 = physical model). Values above 1
    /// widen wakes without changing their centreline deficit; the optimizer
    /// uses this as a continuation parameter.
    #[serde(default = "unit_spread")]
    pub wake_spread: f64,
}

fn unit_spread() -> f64 {
    1.0
}

impl Default for WakeModelConfig {
    fn default() -> Self {
        Self {
            model: WakeModel::Bastankhah,
            k_jensen: 0.05,
            k_star: 0.025,
            superposition: Superposition::Rss,
            deficit_basis: DeficitBasis::Local,
            wake_spread: 1.0,
        }
    }
}

impl WakeModelConfig {
    pub fn with_model(model: WakeModel) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_jensen > 0.0 && self.k_jensen.is_finite()) {
            return Err(invalid("k_jensen must be positive"));
        }
        if !(self.k_star > 0.0 && self.k_star.is_finite()) {
            return Err(invalid("k_star must be positive"));
        }
        if !(self.wake_spread >= 1.0 && self.wake_spread.is_finite()) {
            return Err(invalid("wake_spread must be at least 1"));
        }
        Ok(())
    }
}

/// A turbine in the wind-aligned frame: `x` downstream, `y` crosswind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub x: f64,
    pub y: f64,
    pub index: usize,
}

/// Unit vectors of the wind frame for a meteorological from-direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindFrame {
    sin: f64,
    cos: f64,
}

impl WindFrame {
    pub fn new(direction_deg: f64) -> Self {
        let (sin, cos) = direction_deg.to_radians().sin_cos();
        Self { sin, cos }
    }

    /// (downstream, crosswind) coordinates of a plan point.
    #[inline]
    pub fn project(&self, p: Point) -> (f64, f64) {
        // travel direction is the from-direction + 180°
        (-(p.x * self.sin + p.y * self.cos), p.x * self.cos - p.y * self.sin)
    }
}

pub fn rotate_to_wind_frame(layout: &Layout, direction_deg: f64) -> Vec<FramePoint> {
    let frame = WindFrame::new(direction_deg);
    layout
        .positions()
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            let (x, y) = frame.project(p);
            FramePoint { x, y, index }
        })
        .collect()
}

/// Top-hat deficit with linearly expanding radius.
pub fn jensen_deficit(dx: f64, dr: f64, ct: f64, d_rotor: f64, k: f64) -> f64 {
    if dx <= 0.0 || ct <= 0.0 {
        return 0.0;
    }
    let radius = 0.5 * d_rotor + k * dx;
    if dr.abs() > radius {
        return 0.0;
    }
    let ct = ct.min(crate::turbine::MAX_THRUST_COEFFICIENT);
    let expansion = 1.0 + 2.0 * k * dx / d_rotor;
    (1.0 - (1.0 - ct).sqrt()) / (expansion * expansion)
}

/// Self-similar Gaussian deficit at hub height.
pub fn bastankhah_deficit(dx: f64, dr: f64, ct: f64, d_rotor: f64, k_star: f64) -> f64 {
    if dx <= 0.0 || ct <= 0.0 {
        return 0.0;
    }
    let g = GaussianWake::new(ct.min(crate::turbine::MAX_THRUST_COEFFICIENT));
    g.deficit(dx, dr, d_rotor, k_star)
}

/// Per-source Gaussian constants that depend only on the source's Ct.
#[derive(Debug, Clone, Copy)]
struct GaussianWake {
    ct: f64,
    epsilon: f64,
}

impl GaussianWake {
    #[inline]
    fn new(ct: f64) -> Self {
        let root = (1.0 - ct).sqrt();
        let beta = (1.0 + root) / (2.0 * root);
        Self {
            ct,
            epsilon: 0.2 * beta.sqrt(),
        }
    }

    #[inline]
    fn sigma_over_d(&self, dx: f64, d_rotor: f64, k_star: f64) -> f64 {
        k_star * dx / d_rotor + self.epsilon
    }

    #[inline]
    fn deficit(&self, dx: f64, dr: f64, d_rotor: f64, k_star: f64) -> f64 {
        let s = self.sigma_over_d(dx, d_rotor, k_star);
        let a = (self.ct / (8.0 * s * s)).min(MAX_RADICAL_ARGUMENT);
        let sigma = s * d_rotor;
        (1.0 - (1.0 - a).sqrt()) * (-dr * dr / (2.0 * sigma * sigma)).exp()
    }

}

/// Root-sum-square superposition, clamped to a full deficit.
pub fn combine_deficits(deficits: &[f64]) -> f64 {
    deficits.iter().map(|d| d * d).sum::<f64>().sqrt().min(1.0)
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Inactive,
    Jensen {
        peak: f64,
        k: f64,
        half_d: f64,
        /// 2k / D
        expansion_rate: f64,
        spread: f64,
    },
    Gauss {
        epsilon: f64,
        /// k* / D
        growth: f64,
        ct_over_8: f64,
        /// spread · D
        width: f64,
    },
}

/// Wake source frozen at its effective inflow, with the model constants
/// folded in.
#[derive(Debug, Clone, Copy)]
pub struct WakeSource {
    pub x: f64,
    pub y: f64,
    pub ct: f64,
    /// Multiplier applied to the deficit fraction (local basis: u_j / U).
    pub scale: f64,
    kernel: Kernel,
}

impl WakeSource {
    pub fn new(x: f64, y: f64, ct: f64, scale: f64, d_rotor: f64, cfg: &WakeModelConfig) -> Self {
        let ct = ct.min(crate::turbine::MAX_THRUST_COEFFICIENT);
        let kernel = if ct <= 0.0 || scale <= 0.0 {
            Kernel::Inactive
        } else {
            match cfg.model {
                WakeModel::Jensen => Kernel::Jensen {
                    peak: 1.0 - (1.0 - ct).sqrt(),
                    k: cfg.k_jensen,
                    half_d: 0.5 * d_rotor,
                    expansion_rate: 2.0 * cfg.k_jensen / d_rotor,
                    spread: cfg.wake_spread,
                },
                WakeModel::Bastankhah => Kernel::Gauss {
                    epsilon: GaussianWake::new(ct).epsilon,
                    growth: cfg.k_star / d_rotor,
                    ct_over_8: ct / 8.0,
                    width: cfg.wake_spread * d_rotor,
                },
            }
        };
        Self {
            x,
            y,
            ct,
            scale,
            kernel,
        }
    }

    /// Scaled deficit fraction this source imposes at frame point (x, y).
    /// Gaussian tails beyond exp(-40) are treated as zero.
    #[inline]
    pub fn deficit_at(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.x;
        if dx <= UPSTREAM_TOLERANCE {
            return 0.0;
        }
        let dr = y - self.y;
        match self.kernel {
            Kernel::Inactive => 0.0,
            Kernel::Jensen {
                peak,
                k,
                half_d,
                expansion_rate,
                spread,
            } => {
                if dr.abs() > spread * (half_d + k * dx) {
                    return 0.0;
                }
                let e = 1.0 + expansion_rate * dx;
                self.scale * peak / (e * e)
            }
            Kernel::Gauss {
                epsilon,
                growth,
                ct_over_8,
                width,
            } => {
                let s = growth * dx + epsilon;
                let sigma = width * s;
                let two_var = 2.0 * sigma * sigma;
                let dr2 = dr * dr;
                if dr2 > GAUSSIAN_TAIL_CUTOFF * two_var {
                    return 0.0;
                }
                let a = (ct_over_8 / (s * s)).min(MAX_RADICAL_ARGUMENT);
                self.scale * (1.0 - (1.0 - a).sqrt()) * (-dr2 / two_var).exp()
            }
        }
    }
}

/// Sweep state for one inflow, kept in downstream order so a later
/// single-turbine move can be re-evaluated from the first affected turbine.
#[derive(Debug, Default, Clone)]
pub struct SweepScratch {
    /// Frame coordinates by original index.
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Sorted position -> original index.
    order: Vec<usize>,
    /// Original index -> sorted position.
    rank: Vec<usize>,
    /// Effective speeds and wake sources in sorted order.
    sorted_speeds: Vec<f64>,
    sources: Vec<WakeSource>,
}

impl SweepScratch {
    pub fn sorted_speeds(&self) -> &[f64] {
        &self.sorted_speeds
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sorted position of turbine `i`.
    pub fn rank_of(&self, i: usize) -> usize {
        self.rank[i]
    }

    /// Re-runs the sweep with turbine `k` moved to `moved`, reusing every
    /// turbine that is not strictly downstream of both the old and the new
    /// position. Calls `visit(original_index, speed)` for each recomputed
    /// turbine (including `k`) and returns the length of the reused sorted
    /// prefix. That prefix may contain `k`'s old entry, which was skipped.
    #[allow(clippy::too_many_arguments)]
    pub fn resweep_moved(
        &self,
        k: usize,
        moved: Point,
        spec: &TurbineSpec,
        frame: WindFrame,
        free_speed: f64,
        cfg: &WakeModelConfig,
        work: &mut Vec<WakeSource>,
        mut visit: impl FnMut(usize, f64),
    ) -> usize {
        let (xk, yk) = frame.project(moved);
        let threshold = self.xs[k].min(xk) + UPSTREAM_TOLERANCE;
        let prefix = self.order.partition_point(|&i| self.xs[i] <= threshold);
        work.clear();
        work.extend(
            self.sources[..prefix]
                .iter()
                .zip(&self.order[..prefix])
                .filter(|(_, &i)| i != k)
                .map(|(s, _)| *s),
        );
        let d_rotor = spec.rotor_diameter();
        let eval = |x: f64, y: f64, work: &mut Vec<WakeSource>| {
            let speed = if free_speed > 0.0 {
                let mut sum_sq = 0.0;
                for src in work.iter() {
                    let d = src.deficit_at(x, y);
                    sum_sq += d * d;
                }
                free_speed * (1.0 - sum_sq.sqrt().min(1.0))
            } else {
                0.0
            };
            let scale = source_scale(cfg, speed, free_speed);
            work.push(WakeSource::new(x, y, spec.thrust_coefficient_at(speed), scale, d_rotor, cfg));
            speed
        };
        // the moved turbine sorts ahead of the remaining suffix whenever it
        // lies at or before the threshold; otherwise merge it in by x
        let mut k_done = false;
        for &i in &self.order[prefix..] {
            if i == k {
                continue;
            }
            let (x, y) = (self.xs[i], self.ys[i]);
            if !k_done && xk <= x {
                visit(k, eval(xk, yk, work));
                k_done = true;
            }
            visit(i, eval(x, y, work));
        }
        if !k_done {
            visit(k, eval(xk, yk, work));
        }
        prefix
    }
}

#[inline]
fn source_scale(cfg: &WakeModelConfig, speed: f64, free_speed: f64) -> f64 {
    match cfg.deficit_basis {
        DeficitBasis::Local if free_speed > 0.0 => speed / free_speed,
        DeficitBasis::Local => 0.0,
        DeficitBasis::Freestream => 1.0,
    }
}

/// Effective speeds without layout validation; `out` is indexed like
/// `positions`. Leaves the sorted sweep state in `scratch`.
pub fn sweep(
    positions: &[Point],
    spec: &TurbineSpec,
    frame: WindFrame,
    free_speed: f64,
    cfg: &WakeModelConfig,
    scratch: &mut SweepScratch,
    out: &mut Vec<f64>,
) {
    let n = positions.len();
    out.clear();
    out.resize(n, free_speed);
    let SweepScratch {
        xs,
        ys,
        order,
        rank,
        sorted_speeds,
        sources,
    } = scratch;
    sources.clear();
    sorted_speeds.clear();
    xs.clear();
    ys.clear();
    for &p in positions {
        let (x, y) = frame.project(p);
        xs.push(x);
        ys.push(y);
    }
    order.clear();
    order.extend(0..n);
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    rank.clear();
    rank.resize(n, 0);
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }

    let d_rotor = spec.rotor_diameter();
    for &i in order.iter() {
        let (x, y) = (xs[i], ys[i]);
        let speed = if free_speed > 0.0 {
            let mut sum_sq = 0.0;
            for src in sources.iter() {
                let d = src.deficit_at(x, y);
                sum_sq += d * d;
            }
            free_speed * (1.0 - sum_sq.sqrt().min(1.0))
        } else {
            0.0
        };
        out[i] = speed;
        sorted_speeds.push(speed);
        let scale = source_scale(cfg, speed, free_speed);
        sources.push(WakeSource::new(x, y, spec.thrust_coefficient_at(speed), scale, d_rotor, cfg));
    }
}

/// Inflow speed at every turbine for wind from `direction_deg` at
/// `free_speed`, indexed like the layout.
pub fn effective_speeds(
    layout: &Layout,
    spec: &TurbineSpec,
    direction_deg: f64,
    free_speed: f64,
    cfg: &WakeModelConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(free_speed >= 0.0 && free_speed.is_finite()) {
        return Err(invalid(format!("free-stream speed must be non-negative, got {free_speed}")));
    }
    // re-validate: a Layout may have been deserialized without checks
    let layout = Layout::new(layout.positions().to_vec())?;
    let mut out = Vec::new();
    sweep(
        layout.positions(),
        spec,
        WindFrame::new(direction_deg),
        free_speed,
        cfg,
        &mut SweepScratch::default(),
        &mut out,
    );
    Ok(out)
}

/// Wake sources (frame coordinates, frozen Ct and scale) for one inflow.
pub fn wake_sources(
    layout: &Layout,
    spec: &TurbineSpec,
    direction_deg: f64,
    free_speed: f64,
    cfg: &WakeModelConfig,
) -> Result<Vec<WakeSource>> {
    effective_speeds(layout, spec, direction_deg, free_speed, cfg)?;
    let mut scratch = SweepScratch::default();
    let mut out = Vec::new();
    sweep(
        layout.positions(),
        spec,
        WindFrame::new(direction_deg),
        free_speed,
        cfg,
        &mut scratch,
        &mut out,
    );
    Ok(scratch.sources)
}
