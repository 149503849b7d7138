//! Python bindings: turbines, wind roses, wake settings, AEP evaluation and
//! the multi-start layout optimizer. Positions cross the boundary as lists
//! of `(x, y)` tuples in metres.

use std::path::PathBuf;

use farmlayout::io::{read_layout_file, read_rose_file, read_turbine, write_layout_file, write_rose_file, Problem};
use farmlayout::windrose::SyntheticRose;
use farmlayout::{
    Boundary, DeficitBasis, FarmError, Layout, OptimizationConfig, Point, WakeModel, WakeModelConfig,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

create_exception!(farmlayout_py, OptimizationFailure, PyValueError);

fn to_py(err: FarmError) -> PyErr {
    match err {
        FarmError::OptimizationFailure(_) => OptimizationFailure::new_err(err.to_string()),
        FarmError::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn layout(points: &[(f64, f64)]) -> PyResult<Layout> {
    Layout::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect()).map_err(to_py)
}

fn tuples(points: &[Point]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.x, p.y)).collect()
}

#[pyclass(name = "TurbineSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTurbineSpec(farmlayout::TurbineSpec);

#[pymethods]
impl PyTurbineSpec {
    /// Generic 15 MW offshore reference turbine (240 m rotor, 150 m hub).
    #[staticmethod]
    fn reference_15mw() -> Self {
        Self(farmlayout::TurbineSpec::reference_15mw())
    }

    #[staticmethod]
    fn from_json(path: PathBuf) -> PyResult<Self> {
        read_turbine(&path).map(Self).map_err(to_py)
    }

    /// Electrical power in MW at a hub-height speed in m/s.
    fn power(&self, speed: f64) -> f64 {
        self.0.power_at(speed)
    }

    fn thrust_coefficient(&self, speed: f64) -> f64 {
        self.0.thrust_coefficient_at(speed)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn rotor_diameter(&self) -> f64 {
        self.0.rotor_diameter()
    }

    #[getter]
    fn hub_height(&self) -> f64 {
        self.0.hub_height()
    }

    #[getter]
    fn rated_power(&self) -> f64 {
        self.0.rated_power()
    }

    fn __repr__(&self) -> String {
        format!("TurbineSpec({:?}, {} MW, D={} m)", self.0.name(), self.0.rated_power(), self.0.rotor_diameter())
    }
}

#[pyclass(name = "WindRose", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWindRose(farmlayout::WindRose);

#[pymethods]
impl PyWindRose {
    /// North-north-westerly 36-sector rose used by the desk-scale analog.
    #[staticmethod]
    fn synthetic() -> PyResult<Self> {
        SyntheticRose::default().build().map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn single_direction(direction_deg: f64, speed: f64) -> PyResult<Self> {
        farmlayout::WindRose::single_direction(direction_deg, speed).map(Self).map_err(to_py)
    }

    /// 36 relative weights and mean speeds, sectors centred on 5°, 15°, ...
    #[staticmethod]
    fn from_weights(weights: Vec<f64>, speeds: Vec<f64>) -> PyResult<Self> {
        farmlayout::WindRose::from_weights(&weights, &speeds).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_csv(path: PathBuf) -> PyResult<Self> {
        read_rose_file(&path).map(Self).map_err(to_py)
    }

    fn to_csv(&self, path: PathBuf) -> PyResult<()> {
        write_rose_file(&path, &self.0).map_err(to_py)
    }

    #[getter]
    fn centers(&self) -> Vec<f64> {
        self.0.bins().iter().map(|b| b.center_deg).collect()
    }

    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.0.bins().iter().map(|b| b.frequency).collect()
    }

    #[getter]
    fn mean_speeds(&self) -> Vec<f64> {
        self.0.bins().iter().map(|b| b.mean_speed).collect()
    }

    fn dominant_center(&self) -> f64 {
        self.0.dominant_bin().center_deg
    }

    /// The rose turned clockwise by `steps` sectors of 10°.
    fn rotated(&self, steps: i64) -> Self {
        Self(self.0.rotated(steps))
    }

    fn __len__(&self) -> usize {
        self.0.bins().len()
    }
}

#[pyclass(name = "WakeConfig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyWakeConfig(WakeModelConfig);

#[pymethods]
impl PyWakeConfig {
    #[new]
    #[pyo3(signature = (model = "bastankhah", k = 0.05, k_star = 0.025, deficit_basis = "local"))]
    fn new(model: &str, k: f64, k_star: f64, deficit_basis: &str) -> PyResult<Self> {
        let model = match model {
            "jensen" => WakeModel::Jensen,
            "bastankhah" => WakeModel::Bastankhah,
            other => return Err(PyValueError::new_err(format!("unknown wake model {other:?}"))),
        };
        let deficit_basis = match deficit_basis {
            "local" => DeficitBasis::Local,
            "freestream" => DeficitBasis::Freestream,
            other => return Err(PyValueError::new_err(format!("unknown deficit basis {other:?}"))),
        };
        let cfg = WakeModelConfig {
            model,
            k_jensen: k,
            k_star,
            deficit_basis,
            ..WakeModelConfig::default()
        };
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

fn wake_or_default(wake: Option<&PyWakeConfig>) -> WakeModelConfig {
    wake.map(|w| w.0).unwrap_or_default()
}

#[pyclass(name = "EvaluationReport", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEvaluationReport {
    /// net GWh/yr
    aep: f64,
    /// GWh/yr without wakes
    gross_aep: f64,
    wake_loss: f64,
    /// MW per rose sector
    per_direction_power: Vec<f64>,
    n_turbines: usize,
    installed_capacity: f64,
}

impl From<farmlayout::EvaluationReport> for PyEvaluationReport {
    fn from(r: farmlayout::EvaluationReport) -> Self {
        Self {
            aep: r.aep,
            gross_aep: r.gross_aep,
            wake_loss: r.wake_loss,
            per_direction_power: r.per_direction_power,
            n_turbines: r.n_turbines,
            installed_capacity: r.installed_capacity,
        }
    }
}

#[pymethods]
impl PyEvaluationReport {
    fn __repr__(&self) -> String {
        format!(
            "EvaluationReport(aep={:.3} GWh, gross_aep={:.3} GWh, wake_loss={:.4}, n_turbines={})",
            self.aep, self.gross_aep, self.wake_loss, self.n_turbines
        )
    }
}

#[pyclass(name = "OptimizedResult", frozen, get_all)]
struct PyOptimizedResult {
    positions: Vec<(f64, f64)>,
    report: Py<PyEvaluationReport>,
    best_start: usize,
    /// raw stratified-sample AEP per start (None for discarded starts)
    initial_aep: Vec<Option<f64>>,
    wall_time: f64,
}

/// Returns `(capacity_mw, n_turbines)`.
#[pyfunction]
fn capacity_plan(area_km2: f64, density_mw_per_km2: f64, unit_rating_mw: f64) -> PyResult<(f64, usize)> {
    let plan = farmlayout::capacity_plan(area_km2, density_mw_per_km2, unit_rating_mw).map_err(to_py)?;
    Ok((plan.capacity, plan.n_turbines))
}

#[pyfunction]
#[pyo3(signature = (speed, z_ref, z_target, alpha = 0.15))]
fn shear_extrapolate(speed: f64, z_ref: f64, z_target: f64, alpha: f64) -> PyResult<f64> {
    farmlayout::shear_extrapolate(speed, z_ref, z_target, alpha).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (dx, dr, ct, rotor_diameter, model = "bastankhah", k = None))]
fn deficit(dx: f64, dr: f64, ct: f64, rotor_diameter: f64, model: &str, k: Option<f64>) -> PyResult<f64> {
    match model {
        "jensen" => Ok(farmlayout::jensen_deficit(dx, dr, ct, rotor_diameter, k.unwrap_or(0.05))),
        "bastankhah" => Ok(farmlayout::bastankhah_deficit(dx, dr, ct, rotor_diameter, k.unwrap_or(0.025))),
        other => Err(PyValueError::new_err(format!("unknown wake model {other:?}"))),
    }
}

/// Farm output in MW for one inflow direction and free-stream speed.
#[pyfunction]
#[pyo3(signature = (positions, turbine, direction_deg, speed, wake = None))]
fn farm_power(
    positions: Vec<(f64, f64)>,
    turbine: &PyTurbineSpec,
    direction_deg: f64,
    speed: f64,
    wake: Option<&PyWakeConfig>,
) -> PyResult<f64> {
    farmlayout::farm_power(&layout(&positions)?, &turbine.0, direction_deg, speed, &wake_or_default(wake))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (positions, turbine, rose, wake = None))]
fn compute_aep(
    py: Python<'_>,
    positions: Vec<(f64, f64)>,
    turbine: &PyTurbineSpec,
    rose: &PyWindRose,
    wake: Option<&PyWakeConfig>,
) -> PyResult<PyEvaluationReport> {
    let layout = layout(&positions)?;
    let cfg = wake_or_default(wake);
    py.detach(|| farmlayout::compute_aep(&layout, &turbine.0, &rose.0, &cfg))
        .map(Into::into)
        .map_err(to_py)
}

/// Returns `(aep_bastankhah, aep_jensen, relative_gap)`.
#[pyfunction]
fn compare_models(positions: Vec<(f64, f64)>, turbine: &PyTurbineSpec, rose: &PyWindRose) -> PyResult<(f64, f64, f64)> {
    let c = farmlayout::compare_models(&layout(&positions)?, &turbine.0, &rose.0).map_err(to_py)?;
    Ok((c.aep_bastankhah, c.aep_jensen, c.relative_gap))
}

#[pyfunction]
#[pyo3(signature = (positions, boundary, band = 1000.0))]
fn edge_clustering_metric(positions: Vec<(f64, f64)>, boundary: Vec<(f64, f64)>, band: f64) -> PyResult<f64> {
    let boundary = polygon(&boundary)?;
    farmlayout::edge_clustering_metric(layout(&positions)?.positions(), &boundary, band).map_err(to_py)
}

fn polygon(vertices: &[(f64, f64)]) -> PyResult<Boundary> {
    Boundary::new(vertices.iter().map(|&(x, y)| Point::new(x, y)).collect()).map_err(to_py)
}

#[pyfunction]
fn latin_hypercube_layout(n: usize, boundary: Vec<(f64, f64)>, seed: u64) -> PyResult<Vec<(f64, f64)>> {
    let l = farmlayout::latin_hypercube_layout(n, &polygon(&boundary)?, seed).map_err(to_py)?;
    Ok(tuples(l.positions()))
}

/// Multi-start penalized gradient optimization inside a polygon. Raises
/// `OptimizationFailure` when no start yields a feasible layout.
#[pyfunction]
#[pyo3(signature = (
    boundary, n_turbines, turbine, rose, wake = None,
    n_starts = 30, n_sequences = 3, n_iterations = 70, seed = 0, min_spacing = 2.0
))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    boundary: Vec<(f64, f64)>,
    n_turbines: usize,
    turbine: &PyTurbineSpec,
    rose: &PyWindRose,
    wake: Option<&PyWakeConfig>,
    n_starts: usize,
    n_sequences: usize,
    n_iterations: usize,
    seed: u64,
    min_spacing: f64,
) -> PyResult<PyOptimizedResult> {
    let boundary = polygon(&boundary)?;
    let cfg = OptimizationConfig {
        n_starts,
        n_sequences,
        n_iterations,
        seed,
        min_spacing,
        ..OptimizationConfig::default()
    };
    let wake = wake_or_default(wake);
    let r = py
        .detach(|| farmlayout::optimize(&turbine.0, &rose.0, &boundary, n_turbines, &cfg, &wake))
        .map_err(to_py)?;
    Ok(PyOptimizedResult {
        positions: tuples(r.best_layout.positions()),
        report: Py::new(py, PyEvaluationReport::from(r.best_report))?,
        best_start: r.best_start,
        initial_aep: r.starts.iter().map(|s| s.initial_aep).collect(),
        wall_time: r.wall_time,
    })
}

/// Loads a problem file; returns `(boundary, turbine, rose, wake, n_turbines)`.
#[pyfunction]
fn load_problem(path: PathBuf) -> PyResult<(Vec<(f64, f64)>, PyTurbineSpec, PyWindRose, PyWakeConfig, usize)> {
    let p = Problem::load(&path).map_err(to_py)?;
    Ok((
        tuples(p.boundary.vertices()),
        PyTurbineSpec(p.turbine),
        PyWindRose(p.rose),
        PyWakeConfig(p.wake),
        p.n_turbines,
    ))
}

#[pyfunction]
fn read_layout(path: PathBuf) -> PyResult<Vec<(f64, f64)>> {
    Ok(tuples(read_layout_file(&path).map_err(to_py)?.positions()))
}

#[pyfunction]
fn write_layout(path: PathBuf, positions: Vec<(f64, f64)>) -> PyResult<()> {
    write_layout_file(&path, layout(&positions)?.positions()).map_err(to_py)
}

#[pymodule]
fn farmlayout_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("OptimizationFailure", m.py().get_type::<OptimizationFailure>())?;
    m.add_class::<PyTurbineSpec>()?;
    m.add_class::<PyWindRose>()?;
    m.add_class::<PyWakeConfig>()?;
    m.add_class::<PyEvaluationReport>()?;
    m.add_class::<PyOptimizedResult>()?;
    m.add_function(wrap_pyfunction!(capacity_plan, m)?)?;
    m.add_function(wrap_pyfunction!(shear_extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(deficit, m)?)?;
    m.add_function(wrap_pyfunction!(farm_power, m)?)?;
    m.add_function(wrap_pyfunction!(compute_aep, m)?)?;
    m.add_function(wrap_pyfunction!(compare_models, m)?)?;
    m.add_function(wrap_pyfunction!(edge_clustering_metric, m)?)?;
    m.add_function(wrap_pyfunction!(latin_hypercube_layout, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(load_problem, m)?)?;
    m.add_function(wrap_pyfunction!(read_layout, m)?)?;
    m.add_function(wrap_pyfunction!(write_layout, m)?)?;
    Ok(())
}
