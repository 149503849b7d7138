//! Multi-start penalized gradient ascent on AEP.
//!
//! Each start runs `n_sequences` sequences of `n_iterations` steepest-ascent
//! iterations; the constraint penalty weight grows between sequences and the
//! final layout is projected onto the feasible set.

use std::time::Instant;

use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::Boundary;
use super::lhs::latin_hypercube_sample;
use crate::aep::{AepCache, AepEvaluator, EvaluationReport};
use crate::error::{invalid, FarmError, Result};
use crate::layout::{Layout, Point};
use crate::turbine::TurbineSpec;
use crate::wake::{SweepScratch, WakeModelConfig};
use crate::windrose::WindRose;

const MAX_HALVINGS: usize = 8;
// per-turbine step normalization never divides by less than this share of
// the largest gradient component
const NORMALIZATION_FLOOR: f64 = 1e-3;
const MAX_PROJECTION_PASSES: usize = 1000;
/// Slack allowed on the spacing constraint of a returned layout, m.
pub const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizationConfig {
    pub n_starts: usize,
    pub n_sequences: usize,
    /// Gradient iterations per sequence.
    pub n_iterations: usize,
    pub seed: u64,
    /// Minimum turbine spacing in rotor diameters.
    pub min_spacing: f64,
    /// Largest coordinate move of a line-search trial, m.
    pub initial_step: f64,
    /// Penalty weight of the first sequence, GWh/yr per m².
    pub penalty_weight: f64,
    /// Factor applied to the penalty weight at each new sequence.
    pub penalty_growth: f64,
    /// Central finite-difference step, m.
    pub fd_step: f64,
    /// Wake-spread factor of the first sequence; it falls linearly to 1
    /// (the physical model) in the last sequence.
    pub wake_spread_start: f64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            n_starts: 30,
            n_sequences: 3,
            n_iterations: 70,
            seed: 0,
            min_spacing: 2.0,
            initial_step: 200.0,
            penalty_weight: 1e-3,
            penalty_growth: 10.0,
            fd_step: 1.0,
            wake_spread_start: 3.0,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 || self.n_sequences == 0 || self.n_iterations == 0 {
            return Err(invalid("starts, sequences and iterations must all be at least 1"));
        }
        for (name, v) in [
            ("min_spacing", self.min_spacing),
            ("initial_step", self.initial_step),
            ("penalty_weight", self.penalty_weight),
            ("penalty_growth", self.penalty_growth),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if !(self.wake_spread_start >= 1.0 && self.wake_spread_start.is_finite()) {
            return Err(invalid("wake_spread_start must be at least 1"));
        }
        Ok(())
    }

    pub fn wake_spread_for(&self, sequence: usize) -> f64 {
        if self.n_sequences <= 1 {
            return 1.0;
        }
        let t = sequence.min(self.n_sequences - 1) as f64 / (self.n_sequences - 1) as f64;
        self.wake_spread_start + t * (1.0 - self.wake_spread_start)
    }

    pub fn penalty_weight_for(&self, sequence: usize) -> f64 {
        self.penalty_weight * self.penalty_growth.powi(sequence as i32)
    }
}

/// AEP minus a quadratic penalty on boundary and spacing violations.
#[derive(Debug, Clone)]
pub struct PenalizedObjective<'a> {
    evaluator: AepEvaluator<'a>,
    boundary: &'a Boundary,
    min_spacing_m: f64,
}

impl<'a> PenalizedObjective<'a> {
    pub fn new(
        spec: &'a TurbineSpec,
        rose: &WindRose,
        wake: &WakeModelConfig,
        boundary: &'a Boundary,
        min_spacing_m: f64,
    ) -> Result<Self> {
        Ok(Self {
            evaluator: AepEvaluator::new(spec, rose, wake)?,
            boundary,
            min_spacing_m,
        })
    }

    pub fn evaluator(&self) -> &AepEvaluator<'a> {
        &self.evaluator
    }

    pub fn min_spacing_m(&self) -> f64 {
        self.min_spacing_m
    }

    /// Σ (distance outside)² + Σ over pairs max(0, spacing − distance)², m².
    pub fn penalty(&self, positions: &[Point]) -> f64 {
        let mut total = 0.0;
        for (i, &p) in positions.iter().enumerate() {
            let out = self.boundary.outside_distance(p);
            total += out * out;
            for &q in &positions[..i] {
                let short = (self.min_spacing_m - p.distance(q)).max(0.0);
                total += short * short;
            }
        }
        total
    }

    pub fn value(&self, positions: &[Point], weight: f64, scratch: &mut ObjectiveScratch) -> f64 {
        let aep = self.evaluator.aep(positions, &mut scratch.sweep);
        Self::combine(aep, self.penalty(positions), weight)
    }

    fn combine(aep: f64, penalty: f64, weight: f64) -> f64 {
        if penalty == 0.0 {
            aep
        } else {
            aep - weight * penalty
        }
    }

    pub fn is_feasible(&self, positions: &[Point]) -> bool {
        positions.iter().all(|&p| self.boundary.contains(p))
            && positions.iter().enumerate().all(|(i, &p)| {
                positions[..i]
                    .iter()
                    .all(|&q| p.distance(q) >= self.min_spacing_m - SPACING_TOLERANCE)
            })
    }
}

/// Penalized objective evaluated for one problem with a fresh scratch buffer.
#[allow(clippy::too_many_arguments)]
pub fn penalized_objective(
    layout: &Layout,
    spec: &TurbineSpec,
    rose: &WindRose,
    wake: &WakeModelConfig,
    boundary: &Boundary,
    min_spacing_m: f64,
    penalty_weight: f64,
) -> Result<f64> {
    let obj = PenalizedObjective::new(spec, rose, wake, boundary, min_spacing_m)?;
    Ok(obj.value(layout.positions(), penalty_weight, &mut ObjectiveScratch::default()))
}

/// Reusable evaluation buffers for one optimization thread.
#[derive(Debug, Default, Clone)]
pub struct ObjectiveScratch {
    sweep: SweepScratch,
    cache: AepCache,
    probe: Vec<Point>,
}

/// Supplies ∂objective/∂(x, y) for every turbine.
pub trait GradientSource: Sync {
    fn gradient(
        &self,
        objective: &PenalizedObjective<'_>,
        positions: &[Point],
        weight: f64,
        scratch: &mut ObjectiveScratch,
        out: &mut Vec<Point>,
    );
}

/// Central differences with a fixed coordinate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralDifference {
    pub step: f64,
}

impl GradientSource for CentralDifference {
    fn gradient(
        &self,
        objective: &PenalizedObjective<'_>,
        positions: &[Point],
        weight: f64,
        scratch: &mut ObjectiveScratch,
        out: &mut Vec<Point>,
    ) {
        let h = self.step;
        let evaluator = objective.evaluator();
        evaluator.prepare(positions, &mut scratch.cache);
        let ObjectiveScratch { cache, probe, .. } = scratch;
        probe.clear();
        probe.extend_from_slice(positions);
        let mut value_at = |probe: &mut Vec<Point>, i: usize, moved: Point| {
            probe[i] = moved;
            let aep = evaluator.aep_moved(cache, i, moved);
            PenalizedObjective::combine(aep, objective.penalty(probe), weight)
        };
        out.clear();
        for (i, &p) in positions.iter().enumerate() {
            let fxp = value_at(probe, i, Point::new(p.x + h, p.y));
            let fxm = value_at(probe, i, Point::new(p.x - h, p.y));
            let fyp = value_at(probe, i, Point::new(p.x, p.y + h));
            let fym = value_at(probe, i, Point::new(p.x, p.y - h));
            probe[i] = p;
            out.push(Point::new((fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub sequence: usize,
    pub iteration: usize,
    /// Penalized objective after the iteration.
    pub objective: f64,
    pub penalty_weight: f64,
    /// Wake-width multiplier in force during the sequence.
    pub wake_spread: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub start: usize,
    pub seed: u64,
    pub initial_layout: Option<Layout>,
    /// AEP of the raw stratified sample, GWh/yr.
    pub initial_aep: Option<f64>,
    pub history: Vec<HistoryEntry>,
    pub final_layout: Option<Layout>,
    pub final_report: Option<EvaluationReport>,
    /// Why the start was discarded, if it was.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct OptimizedResult {
    pub best_start: usize,
    pub best_layout: Layout,
    pub best_report: EvaluationReport,
    pub starts: Vec<StartOutcome>,
    /// seconds
    pub wall_time: f64,
}

impl OptimizedResult {
    pub fn per_start_history(&self) -> Vec<&[HistoryEntry]> {
        self.starts.iter().map(|s| s.history.as_slice()).collect()
    }
}

/// Runs every start (concurrently) and keeps the feasible layout with the
/// largest AEP; exact ties go to the lowest start index.
pub fn optimize(
    spec: &TurbineSpec,
    rose: &WindRose,
    boundary: &Boundary,
    n_turbines: usize,
    cfg: &OptimizationConfig,
    wake: &WakeModelConfig,
) -> Result<OptimizedResult> {
    optimize_with_gradient(
        spec,
        rose,
        boundary,
        n_turbines,
        cfg,
        wake,
        &CentralDifference { step: cfg.fd_step },
    )
}

pub fn optimize_with_gradient(
    spec: &TurbineSpec,
    rose: &WindRose,
    boundary: &Boundary,
    n_turbines: usize,
    cfg: &OptimizationConfig,
    wake: &WakeModelConfig,
    gradient: &dyn GradientSource,
) -> Result<OptimizedResult> {
    cfg.validate()?;
    if n_turbines == 0 {
        return Err(invalid("need at least one turbine"));
    }
    let clock = Instant::now();
    let min_spacing_m = cfg.min_spacing * spec.rotor_diameter();
    let objective = PenalizedObjective::new(spec, rose, wake, boundary, min_spacing_m)?;
    let stages = (0..cfg.n_sequences)
        .map(|s| {
            let staged = WakeModelConfig {
                wake_spread: wake.wake_spread * cfg.wake_spread_for(s),
                ..*wake
            };
            PenalizedObjective::new(spec, rose, &staged, boundary, min_spacing_m)
        })
        .collect::<Result<Vec<_>>>()?;

    let starts: Vec<StartOutcome> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|k| run_start(k, n_turbines, cfg, &objective, &stages, boundary, gradient))
        .collect();

    let mut best: Option<(usize, &Layout, &EvaluationReport)> = None;
    for s in &starts {
        if let (Some(layout), Some(report)) = (&s.final_layout, &s.final_report) {
            if best.is_none_or(|(_, _, b)| report.aep > b.aep) {
                best = Some((s.start, layout, report));
            }
        }
    }
    let Some((best_start, layout, report)) = best else {
        return Err(FarmError::OptimizationFailure(format!(
            "all {} starts were discarded",
            cfg.n_starts
        )));
    };
    let (best_layout, best_report) = (layout.clone(), report.clone());
    let wall_time = clock.elapsed().as_secs_f64();
    info!(
        "best start {best_start}: AEP {:.3} GWh, wake loss {:.2}% ({wall_time:.1} s)",
        best_report.aep,
        100.0 * best_report.wake_loss
    );
    Ok(OptimizedResult {
        best_start,
        best_layout,
        best_report,
        starts,
        wall_time,
    })
}

fn run_start(
    start: usize,
    n_turbines: usize,
    cfg: &OptimizationConfig,
    objective: &PenalizedObjective<'_>,
    stages: &[PenalizedObjective<'_>],
    boundary: &Boundary,
    gradient: &dyn GradientSource,
) -> StartOutcome {
    let seed = cfg.seed.wrapping_add(start as u64);
    let mut outcome = StartOutcome {
        start,
        seed,
        initial_layout: None,
        initial_aep: None,
        history: Vec::new(),
        final_layout: None,
        final_report: None,
        failure: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = match latin_hypercube_sample(n_turbines, boundary, &mut rng) {
        Ok(s) => s.layout,
        Err(e) => {
            warn!("start {start}: {e}");
            outcome.failure = Some(e.to_string());
            return outcome;
        }
    };
    let mut scratch = ObjectiveScratch::default();
    outcome.initial_aep = Some(objective.evaluator().aep(initial.positions(), &mut scratch.sweep));

    let mut positions = initial.positions().to_vec();
    outcome.initial_layout = Some(initial);
    ascend(&mut positions, cfg, stages, gradient, &mut scratch, &mut outcome.history);

    if !project_feasible(&mut positions, boundary, objective.min_spacing_m()) {
        let msg = "could not restore feasibility after optimization".to_string();
        warn!("start {start}: {msg}");
        outcome.failure = Some(msg);
        return outcome;
    }
    match Layout::new(positions) {
        Ok(layout) => {
            let report = objective.evaluator().report(layout.positions());
            debug!("start {start}: AEP {:.3} GWh", report.aep);
            outcome.final_layout = Some(layout);
            outcome.final_report = Some(report);
        }
        Err(e) => outcome.failure = Some(e.to_string()),
    }
    outcome
}

fn ascend(
    positions: &mut Vec<Point>,
    cfg: &OptimizationConfig,
    stages: &[PenalizedObjective<'_>],
    gradient: &dyn GradientSource,
    scratch: &mut ObjectiveScratch,
    history: &mut Vec<HistoryEntry>,
) {
    let mut grad = Vec::with_capacity(positions.len());
    let mut trial = positions.clone();
    for (sequence, objective) in stages.iter().enumerate() {
        let weight = cfg.penalty_weight_for(sequence);
        let mut step = cfg.initial_step;
        let mut current = objective.value(positions, weight, scratch);
        for iteration in 0..cfg.n_iterations {
            gradient.gradient(objective, positions, weight, scratch, &mut grad);
            let scale = grad
                .iter()
                .fold(0.0f64, |m, g| m.max(g.x.abs()).max(g.y.abs()));
            let mut accepted = false;
            if scale > 0.0 && scale.is_finite() {
                let mut s = step;
                for _ in 0..=MAX_HALVINGS {
                    for ((t, p), g) in trial.iter_mut().zip(positions.iter()).zip(&grad) {
                        // each turbine moves up to `s` along its own gradient
                        let norm = g.x.abs().max(g.y.abs()).max(NORMALIZATION_FLOOR * scale);
                        t.x = p.x + s * g.x / norm;
                        t.y = p.y + s * g.y / norm;
                    }
                    let value = objective.value(&trial, weight, scratch);
                    if value > current {
                        positions.copy_from_slice(&trial);
                        current = value;
                        accepted = true;
                        step = (2.0 * s).min(cfg.initial_step);
                        break;
                    }
                    s *= 0.5;
                }
                if !accepted {
                    step *= 0.5;
                }
            }
            history.push(HistoryEntry {
                sequence,
                iteration,
                objective: current,
                penalty_weight: weight,
                wake_spread: objective.evaluator().wake_config().wake_spread,
                accepted,
            });
        }
    }
}

/// Moves outside points onto the boundary and pushes apart pairs closer
/// than `min_spacing_m`, repeating until feasible or the pass budget runs
/// out. Returns whether the layout ended feasible.
pub fn project_feasible(positions: &mut [Point], boundary: &Boundary, min_spacing_m: f64) -> bool {
    let target = min_spacing_m + 0.5 * SPACING_TOLERANCE;
    for _ in 0..MAX_PROJECTION_PASSES {
        for p in positions.iter_mut() {
            *p = boundary.clamp_inside(*p);
        }
        let mut violated = false;
        for i in 0..positions.len() {
            for j in 0..i {
                let (a, b) = (positions[i], positions[j]);
                let d = a.distance(b);
                if d >= min_spacing_m - SPACING_TOLERANCE {
                    continue;
                }
                violated = true;
                let (ux, uy) = if d > 0.0 {
                    ((a.x - b.x) / d, (a.y - b.y) / d)
                } else {
                    // coincident: separate along a fixed index-dependent bearing
                    let (s, c) = (i as f64 * 2.399_963).sin_cos();
                    (c, s)
                };
                let push = 0.5 * (target - d);
                positions[i] = Point::new(a.x + push * ux, a.y + push * uy);
                positions[j] = Point::new(b.x - push * ux, b.y - push * uy);
            }
        }
        if !violated && positions.iter().all(|&p| boundary.contains(p)) {
            return true;
        }
    }
    false
}
