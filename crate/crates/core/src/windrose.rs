//! Directional wind rose built from hub-height-extrapolated time series.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::turbine::shear_extrapolate;

pub const N_BINS: usize = 36;
pub const BIN_WIDTH_DEG: f64 = 360.0 / N_BINS as f64;

/// One observation. Either the (u, v) components or (speed, direction)
/// must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindSample {
    pub timestamp: String,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub speed: Option<f64>,
    pub direction: Option<f64>,
}

impl WindSample {
    pub fn from_components(timestamp: impl Into<String>, u: f64, v: f64) -> Self {
        Self {
            timestamp: timestamp.into(),
            u: Some(u),
            v: Some(v),
            ..Default::default()
        }
    }

    pub fn from_polar(timestamp: impl Into<String>, speed: f64, direction: f64) -> Self {
        Self {
            timestamp: timestamp.into(),
            speed: Some(speed),
            direction: Some(direction),
            ..Default::default()
        }
    }

    /// Speed (m/s) and meteorological from-direction (degrees).
    pub fn speed_direction(&self) -> Result<(f64, f64)> {
        match (self.speed, self.direction, self.u, self.v) {
            (Some(s), Some(d), _, _) => {
                if !(s >= 0.0 && s.is_finite()) || !d.is_finite() {
                    return Err(invalid(format!("sample {}: bad speed/direction", self.timestamp)));
                }
                Ok((s, wrap_degrees(d)))
            }
            (_, _, Some(u), Some(v)) => {
                if !(u.is_finite() && v.is_finite()) {
                    return Err(invalid(format!("sample {}: non-finite components", self.timestamp)));
                }
                Ok(components_to_met(u, v))
            }
            _ => Err(invalid(format!(
                "sample {}: needs (u, v) or (speed, direction)",
                self.timestamp
            ))),
        }
    }
}

fn wrap_degrees(d: f64) -> f64 {
    let w = d.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Converts eastward/northward components to speed and the direction the
/// wind blows from, clockwise from north. Calm maps to direction 0.
pub fn components_to_met(u: f64, v: f64) -> (f64, f64) {
    let speed = u.hypot(v);
    if speed == 0.0 {
        return (0.0, 0.0);
    }
    let dir = 270.0 - v.atan2(u).to_degrees();
    (speed, wrap_degrees(dir))
}

/// Bin index for a from-direction: bin k covers [10k, 10(k+1)).
pub fn bin_index(direction_deg: f64) -> usize {
    let d = wrap_degrees(direction_deg);
    ((d / BIN_WIDTH_DEG).floor() as usize).min(N_BINS - 1)
}

pub fn bin_center(index: usize) -> f64 {
    BIN_WIDTH_DEG * index as f64 + 0.5 * BIN_WIDTH_DEG
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoseBin {
    pub center_deg: f64,
    pub frequency: f64,
    pub mean_speed: f64,
}

/// How the representative speed of a bin is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinMean {
    #[default]
    Arithmetic,
    /// Cube root of the mean cubed speed (energy weighted).
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindRose {
    bins: Vec<RoseBin>,
}

impl WindRose {
    /// Validates 36 bins at centers 5°, 15°, …, 355° with non-negative
    /// frequencies summing to one.
    pub fn new(bins: Vec<RoseBin>) -> Result<Self> {
        if bins.len() != N_BINS {
            return Err(invalid(format!("wind rose needs {N_BINS} bins, got {}", bins.len())));
        }
        for (k, b) in bins.iter().enumerate() {
            if (b.center_deg - bin_center(k)).abs() > 1e-9 {
                return Err(invalid(format!(
                    "bin {k} center {} should be {}",
                    b.center_deg,
                    bin_center(k)
                )));
            }
            if !(b.frequency >= 0.0 && b.frequency.is_finite()) {
                return Err(invalid(format!("bin {k}: frequency must be non-negative")));
            }
            if !(b.mean_speed >= 0.0 && b.mean_speed.is_finite()) {
                return Err(invalid(format!("bin {k}: mean speed must be non-negative")));
            }
        }
        let total: f64 = bins.iter().map(|b| b.frequency).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("bin frequencies sum to {total}, expected 1")));
        }
        Ok(Self { bins })
    }

    /// Builds a rose from unnormalized weights; weights are scaled to sum to one.
    pub fn from_weights(weights: &[f64], speeds: &[f64]) -> Result<Self> {
        if weights.len() != N_BINS || speeds.len() != N_BINS {
            return Err(invalid(format!("expected {N_BINS} weights and speeds")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("weights must be non-negative with a positive sum"));
        }
        let bins = (0..N_BINS)
            .map(|k| RoseBin {
                center_deg: bin_center(k),
                frequency: weights[k] / total,
                mean_speed: speeds[k],
            })
            .collect();
        Self::new(bins)
    }

    /// All probability in one bin at `speed`.
    pub fn single_direction(direction_deg: f64, speed: f64) -> Result<Self> {
        let mut w = [0.0; N_BINS];
        w[bin_index(direction_deg)] = 1.0;
        Self::from_weights(&w, &[speed; N_BINS])
    }

    pub fn uniform(speed: f64) -> Result<Self> {
        Self::from_weights(&[1.0; N_BINS], &[speed; N_BINS])
    }

    pub fn bins(&self) -> &[RoseBin] {
        &self.bins
    }

    /// Shifts the rose clockwise by `steps` bins.
    pub fn rotated(&self, steps: i64) -> Self {
        let n = N_BINS as i64;
        let mut bins = self.bins.clone();
        for (k, b) in self.bins.iter().enumerate() {
            let j = (k as i64 + steps).rem_euclid(n) as usize;
            bins[j] = RoseBin {
                center_deg: bin_center(j),
                ..*b
            };
        }
        Self { bins }
    }

    pub fn dominant_bin(&self) -> &RoseBin {
        // first maximum wins ties
        self.bins
            .iter()
            .fold(&self.bins[0], |best, b| if b.frequency > best.frequency { b } else { best })
    }

    /// Frequency-weighted mean of the bin speeds.
    pub fn mean_speed(&self) -> f64 {
        self.bins.iter().map(|b| b.frequency * b.mean_speed).sum()
    }
}

/// Bins a time series into the 36-sector rose after extrapolating every
/// speed from `z_ref` to `z_hub` with exponent `shear_alpha`.
pub fn bin_time_series(samples: &[WindSample], shear_alpha: f64, z_ref: f64, z_hub: f64) -> Result<WindRose> {
    bin_time_series_with(samples, shear_alpha, z_ref, z_hub, BinMean::Arithmetic)
}

pub fn bin_time_series_with(
    samples: &[WindSample],
    shear_alpha: f64,
    z_ref: f64,
    z_hub: f64,
    mean: BinMean,
) -> Result<WindRose> {
    if samples.is_empty() {
        return Err(invalid("no wind samples"));
    }
    let mut acc = BinAccumulator::default();
    for s in samples {
        let (speed, dir) = s.speed_direction()?;
        acc.add(shear_extrapolate(speed, z_ref, z_hub, shear_alpha)?, dir, mean);
    }
    acc.finish(mean)
}

/// Per-bin counts and sums; partial accumulators merge exactly.
#[derive(Debug, Clone)]
pub struct BinAccumulator {
    counts: [u64; N_BINS],
    sums: [f64; N_BINS],
}

impl Default for BinAccumulator {
    fn default() -> Self {
        Self {
            counts: [0; N_BINS],
            sums: [0.0; N_BINS],
        }
    }
}

impl BinAccumulator {
    pub fn add(&mut self, speed: f64, direction_deg: f64, mean: BinMean) {
        let k = bin_index(direction_deg);
        self.counts[k] += 1;
        self.sums[k] += match mean {
            BinMean::Arithmetic => speed,
            BinMean::Cubic => speed * speed * speed,
        };
    }

    pub fn merge(&mut self, other: &BinAccumulator) {
        for k in 0..N_BINS {
            self.counts[k] += other.counts[k];
            self.sums[k] += other.sums[k];
        }
    }

    pub fn finish(&self, mean: BinMean) -> Result<WindRose> {
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return Err(invalid("no wind samples"));
        }
        let bins = (0..N_BINS)
            .map(|k| {
                let n = self.counts[k];
                let mean_speed = if n == 0 {
                    0.0
                } else {
                    let m = self.sums[k] / n as f64;
                    match mean {
                        BinMean::Arithmetic => m,
                        BinMean::Cubic => m.cbrt(),
                    }
                };
                RoseBin {
                    center_deg: bin_center(k),
                    frequency: n as f64 / total as f64,
                    mean_speed,
                }
            })
            .collect();
        WindRose::new(bins)
    }
}

/// Parametric two-lobe rose: a dominant sector plus a weaker secondary one.
/// Bin speed rises with the local relative frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRose {
    pub primary_deg: f64,
    pub secondary_deg: f64,
    pub secondary_weight: f64,
    pub concentration: f64,
    pub floor: f64,
    pub calm_speed: f64,
    pub peak_speed: f64,
}

impl Default for SyntheticRose {
    /// North-north-westerly dominant climate with a south-easterly secondary lobe.
    fn default() -> Self {
        Self {
            primary_deg: 337.5,
            secondary_deg: 135.0,
            secondary_weight: 0.45,
            concentration: 2.5,
            floor: 0.05,
            calm_speed: 8.5,
            peak_speed: 11.5,
        }
    }
}

impl SyntheticRose {
    pub fn build(&self) -> Result<WindRose> {
        let lobe = |center: f64, theta: f64| {
            (self.concentration * ((theta - center).to_radians().cos() - 1.0)).exp()
        };
        let weights: Vec<f64> = (0..N_BINS)
            .map(|k| {
                let th = bin_center(k);
                self.floor + lobe(self.primary_deg, th) + self.secondary_weight * lobe(self.secondary_deg, th)
            })
            .collect();
        let max = weights.iter().cloned().fold(f64::MIN, f64::max);
        let speeds: Vec<f64> = weights
            .iter()
            .map(|w| self.calm_speed + (self.peak_speed - self.calm_speed) * w / max)
            .collect();
        WindRose::from_weights(&weights, &speeds)
    }
}
