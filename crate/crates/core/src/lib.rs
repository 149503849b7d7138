//! Wind-farm wake modelling and layout optimization.
//!
//! The crate covers the whole chain from a hub-height wind rose to an
//! optimized, feasible turbine layout:
//!
//! - [`turbine`]: smoothed power / thrust curves and shear extrapolation
//! - [`windrose`]: 36-sector rose from time series
//! - [`wake`]: Jensen and Bastankhah deficits with RSS superposition
//! - [`aep`]: farm power, AEP, wake loss, capacity density, flow fields
//! - [`layoutopt`]: polygon constraints, Latin-hypercube starts and the
//!   multi-start penalized gradient optimizer
//! - [`io`]: the JSON and CSV file formats

pub mod aep;
pub mod error;
pub mod interp;
pub mod io;
pub mod layout;
pub mod layoutopt;
pub mod turbine;
pub mod wake;
pub mod windrose;

pub use aep::{capacity_plan, compute_aep, farm_power, flow_field, CapacityPlan, EvaluationReport, FlowFieldGrid, GridSpec};
pub use error::{FarmError, Result};
pub use layout::{Layout, Point};
pub use layoutopt::{
    compare_models, edge_clustering_metric, latin_hypercube_layout, optimize, penalized_objective, point_in_polygon,
    polygon_area, Boundary, ModelComparison, OptimizationConfig, OptimizedResult,
};
pub use turbine::{shear_extrapolate, smooth_curve, CurvePoint, TurbineData, TurbineSpec};
pub use wake::{
    bastankhah_deficit, combine_deficits, effective_speeds, jensen_deficit, rotate_to_wind_frame, DeficitBasis,
    FramePoint, WakeModel, WakeModelConfig,
};
pub use windrose::{bin_time_series, components_to_met, WindRose, WindSample};
