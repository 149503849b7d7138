//! Turbine performance data: power and thrust curves, weak-wind smoothing
//! and power-law shear extrapolation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interp::MonotoneCubic;

/// Air density used by the parametric reference curve, kg/m³.
pub const AIR_DENSITY: f64 = 1.225;
/// Upper clamp on the thrust coefficient.
pub const MAX_THRUST_COEFFICIENT: f64 = 0.999;
/// Default half-width of the weak-wind blend, m/s.
pub const DEFAULT_BLEND_WIDTH: f64 = 1.0;
// samples placed inside the blend interval of a smoothed curve
const BLEND_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub speed: f64,
    pub value: f64,
}

impl CurvePoint {
    pub fn new(speed: f64, value: f64) -> Self {
        Self { speed, value }
    }
}

/// On-disk turbine description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbineData {
    #[serde(default)]
    pub name: String,
    pub rotor_diameter_m: f64,
    pub hub_height_m: f64,
    pub rated_power_mw: f64,
    pub cut_in_ms: f64,
    pub cut_out_ms: f64,
    pub power_curve: Vec<[f64; 2]>,
    pub thrust_curve: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing_width_ms: Option<f64>,
}

/// A validated turbine with its smoothed interpolants.
#[derive(Debug, Clone)]
pub struct TurbineSpec {
    data: TurbineData,
    power: MonotoneCubic,
    thrust: MonotoneCubic,
}

impl TurbineSpec {
    pub fn new(data: TurbineData) -> Result<Self> {
        let d = &data;
        if !(d.rotor_diameter_m.is_finite() && d.rotor_diameter_m > 0.0) {
            return Err(invalid("rotor_diameter_m must be positive"));
        }
        if !(d.hub_height_m.is_finite() && d.hub_height_m > 0.0) {
            return Err(invalid("hub_height_m must be positive"));
        }
        if !(d.rated_power_mw.is_finite() && d.rated_power_mw > 0.0) {
            return Err(invalid("rated_power_mw must be positive"));
        }
        if !(d.cut_in_ms >= 0.0 && d.cut_in_ms < d.cut_out_ms && d.cut_out_ms.is_finite()) {
            return Err(invalid("require 0 <= cut_in_ms < cut_out_ms"));
        }
        let width = d.smoothing_width_ms.unwrap_or(DEFAULT_BLEND_WIDTH);
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("smoothing_width_ms must be positive"));
        }
        let power_curve = to_points(&d.power_curve);
        let thrust_curve = to_points(&d.thrust_curve);
        validate_curve("power_curve", &power_curve, d.cut_in_ms, d.cut_out_ms)?;
        validate_curve("thrust_curve", &thrust_curve, d.cut_in_ms, d.cut_out_ms)?;
        if power_curve
            .iter()
            .any(|p| p.value < 0.0 || p.value > d.rated_power_mw * (1.0 + 1e-12))
        {
            return Err(invalid("power_curve values must lie in [0, rated_power_mw]"));
        }
        let tol = 1e-9 * d.rated_power_mw;
        if !power_curve
            .iter()
            .any(|p| p.speed <= d.cut_out_ms && (p.value - d.rated_power_mw).abs() <= tol)
        {
            return Err(invalid("power_curve never reaches rated_power_mw below cut-out"));
        }
        if thrust_curve.iter().any(|p| p.value < 0.0) {
            return Err(invalid("thrust_curve values must be non-negative"));
        }

        let power = interpolant(&smooth_curve(&power_curve, d.cut_in_ms, width)?);
        let thrust = interpolant(&smooth_curve(&thrust_curve, d.cut_in_ms, width)?);
        Ok(Self {
            data,
            power,
            thrust,
        })
    }

    /// Generic 15 MW offshore reference machine with a parametric curve:
    /// P(v) = min(P_rated, ½ρAC_p v³) with C_p = 0.47, and C_t = 0.8 below
    /// rated speed decaying as 0.8·(v_rated/v)³ above it.
    pub fn reference_15mw() -> Self {
        let diameter: f64 = 240.0;
        let rated = 15.0;
        let cp = 0.47;
        let (cut_in, cut_out) = (3.0, 25.0);
        let area = std::f64::consts::PI * diameter * diameter / 4.0;
        let coeff = 0.5 * AIR_DENSITY * area * cp * 1e-6;
        let v_rated = (rated / coeff).cbrt();

        let mut speeds: Vec<f64> = (0..=44).map(|i| cut_in + 0.5 * i as f64).collect();
        speeds.push(v_rated);
        speeds.sort_by(f64::total_cmp);
        speeds.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        let power_curve = speeds
            .iter()
            .map(|&v| [v, (coeff * v * v * v).min(rated)])
            .collect();
        let thrust_curve = speeds
            .iter()
            .map(|&v| {
                let ct = if v <= v_rated { 0.8 } else { 0.8 * (v_rated / v).powi(3) };
                [v, ct]
            })
            .collect();
        Self::new(TurbineData {
            name: "generic-15MW".into(),
            rotor_diameter_m: diameter,
            hub_height_m: 150.0,
            rated_power_mw: rated,
            cut_in_ms: cut_in,
            cut_out_ms: cut_out,
            power_curve,
            thrust_curve,
            smoothing_width_ms: None,
        })
        .expect("reference turbine is valid")
    }

    pub fn data(&self) -> &TurbineData {
        &self.data
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn rotor_diameter(&self) -> f64 {
        self.data.rotor_diameter_m
    }

    pub fn hub_height(&self) -> f64 {
        self.data.hub_height_m
    }

    pub fn rated_power(&self) -> f64 {
        self.data.rated_power_mw
    }

    pub fn cut_in(&self) -> f64 {
        self.data.cut_in_ms
    }

    pub fn cut_out(&self) -> f64 {
        self.data.cut_out_ms
    }

    pub fn blend_width(&self) -> f64 {
        self.data.smoothing_width_ms.unwrap_or(DEFAULT_BLEND_WIDTH)
    }

    pub fn power_curve(&self) -> Vec<CurvePoint> {
        to_points(&self.data.power_curve)
    }

    pub fn thrust_curve(&self) -> Vec<CurvePoint> {
        to_points(&self.data.thrust_curve)
    }

    fn in_operating_range(&self, speed: f64) -> bool {
        speed >= self.data.cut_in_ms && speed <= self.data.cut_out_ms
    }

    /// Electrical power in MW at hub-height `speed`.
    pub fn power_at(&self, speed: f64) -> f64 {
        if !self.in_operating_range(speed) {
            return 0.0;
        }
        self.power.eval(speed).clamp(0.0, self.data.rated_power_mw)
    }

    /// Thrust coefficient at hub-height `speed`; zero for a parked rotor.
    pub fn thrust_coefficient_at(&self, speed: f64) -> f64 {
        if !self.in_operating_range(speed) {
            return 0.0;
        }
        self.thrust.eval(speed).clamp(0.0, MAX_THRUST_COEFFICIENT)
    }
}

fn to_points(raw: &[[f64; 2]]) -> Vec<CurvePoint> {
    raw.iter().map(|&[s, v]| CurvePoint::new(s, v)).collect()
}

fn interpolant(curve: &[CurvePoint]) -> MonotoneCubic {
    MonotoneCubic::new(
        curve.iter().map(|p| p.speed).collect(),
        curve.iter().map(|p| p.value).collect(),
    )
}

fn validate_curve(name: &str, curve: &[CurvePoint], cut_in: f64, cut_out: f64) -> Result<()> {
    if curve.len() < 2 {
        return Err(invalid(format!("{name} needs at least two points")));
    }
    if curve.iter().any(|p| !p.speed.is_finite() || !p.value.is_finite()) {
        return Err(invalid(format!("{name} contains non-finite values")));
    }
    if !curve.windows(2).all(|w| w[1].speed > w[0].speed) {
        return Err(invalid(format!("{name} speeds must be strictly increasing")));
    }
    if curve[0].speed > cut_in || curve[curve.len() - 1].speed < cut_out {
        return Err(invalid(format!("{name} must cover [cut_in, cut_out]")));
    }
    Ok(())
}

/// Speed scaled by the power-law profile (z_target / z_ref)^alpha.
pub fn shear_extrapolate(speed: f64, z_ref: f64, z_target: f64, alpha: f64) -> Result<f64> {
    if !(z_ref > 0.0 && z_target > 0.0) {
        return Err(invalid(format!(
            "heights must be positive (z_ref = {z_ref}, z_target = {z_target})"
        )));
    }
    if !(speed >= 0.0) {
        return Err(invalid(format!("wind speed must be non-negative, got {speed}")));
    }
    if !alpha.is_finite() {
        return Err(invalid("shear exponent must be finite"));
    }
    Ok(speed * (z_target / z_ref).powf(alpha))
}

/// Replaces the weak-wind end of a curve with a C¹ ramp.
///
/// The refined curve is zero up to `cut_in`, follows a cubic Hermite blend
/// from (cut_in, 0, slope 0) to the original curve value and slope at
/// `cut_in + blend_width`, and keeps every original knot at or above
/// `cut_in + blend_width`. Values are zero at `cut_in - blend_width`.
pub fn smooth_curve(curve: &[CurvePoint], cut_in: f64, blend_width: f64) -> Result<Vec<CurvePoint>> {
    if !(blend_width.is_finite() && blend_width > 0.0) {
        return Err(invalid("blend width must be positive"));
    }
    if curve.len() < 2 || !curve.windows(2).all(|w| w[1].speed > w[0].speed) {
        return Err(invalid("curve needs two or more points with increasing speeds"));
    }
    let raw = interpolant(curve);
    let top = cut_in + blend_width;
    let value = raw.eval(top);
    let slope = raw.derivative(top);

    let mut out = Vec::with_capacity(curve.len() + BLEND_SAMPLES + 2);
    out.push(CurvePoint::new(cut_in - blend_width, 0.0));
    out.push(CurvePoint::new(cut_in, 0.0));
    for i in 1..BLEND_SAMPLES {
        let t = i as f64 / BLEND_SAMPLES as f64;
        let (t2, t3) = (t * t, t * t * t);
        let y = value * (3.0 * t2 - 2.0 * t3) + slope * blend_width * (t3 - t2);
        out.push(CurvePoint::new(cut_in + t * blend_width, y.max(0.0)));
    }
    match curve.iter().find(|p| p.speed >= top) {
        Some(p) if p.speed == top => {}
        _ => out.push(CurvePoint::new(top, value)),
    }
    out.extend(curve.iter().filter(|p| p.speed >= top).copied());
    Ok(out)
}
