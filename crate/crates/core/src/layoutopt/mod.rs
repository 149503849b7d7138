//! Constrained layout optimization: boundary geometry, stratified
//! initialization, the penalized objective and the multi-start driver.

mod geometry;
mod lhs;
mod optimizer;

pub use geometry::{
    closest_on_segment, edge_clustering_metric, point_in_polygon, polygon_area, Boundary, EDGE_TOLERANCE,
};
pub use lhs::{latin_hypercube_layout, latin_hypercube_sample, LhsSample, MIN_INITIAL_SEPARATION};
pub use optimizer::{
    optimize, optimize_with_gradient, penalized_objective, project_feasible, CentralDifference, GradientSource,
    HistoryEntry, ObjectiveScratch, OptimizationConfig, OptimizedResult, PenalizedObjective, StartOutcome, SPACING_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::aep::compute_aep;
use crate::error::Result;
use crate::layout::Layout;
use crate::turbine::TurbineSpec;
use crate::wake::{WakeModel, WakeModelConfig};
use crate::windrose::WindRose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    /// GWh/yr
    pub aep_bastankhah: f64,
    /// GWh/yr
    pub aep_jensen: f64,
    pub relative_gap: f64,
}

/// AEP of one layout under both wake models with default constants.
pub fn compare_models(layout: &Layout, spec: &TurbineSpec, rose: &WindRose) -> Result<ModelComparison> {
    let gauss = compute_aep(layout, spec, rose, &WakeModelConfig::with_model(WakeModel::Bastankhah))?;
    let jensen = compute_aep(layout, spec, rose, &WakeModelConfig::with_model(WakeModel::Jensen))?;
    let relative_gap = if gauss.aep > 0.0 {
        (gauss.aep - jensen.aep).abs() / gauss.aep
    } else {
        0.0
    };
    Ok(ModelComparison {
        aep_bastankhah: gauss.aep,
        aep_jensen: jensen.aep,
        relative_gap,
    })
}
