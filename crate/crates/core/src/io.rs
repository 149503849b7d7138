//! File formats: turbine JSON, time-series and rose CSV, layout CSV and the
//! optimization problem file.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::aep::capacity_plan;
use crate::error::{invalid, FarmError, Result};
use crate::layout::{Layout, Point};
use crate::layoutopt::{polygon_area, Boundary, OptimizationConfig};
use crate::turbine::{TurbineData, TurbineSpec};
use crate::wake::{DeficitBasis, WakeModel, WakeModelConfig};
use crate::windrose::{bin_center, RoseBin, WindRose, WindSample, N_BINS};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| FarmError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| FarmError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> FarmError + '_ {
    move |source| FarmError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Deserializes JSON, reporting the failing field path on schema errors.
pub fn from_json_reader<T: DeserializeOwned, R: Read>(reader: R, path: &Path) -> Result<T> {
    let mut de = serde_json::Deserializer::from_reader(reader);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        FarmError::Schema {
            path: path.to_path_buf(),
            field,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_reader(open(path)?, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| invalid(e.to_string()))?;
    f.write_all(b"\n").map_err(io_err(path))
}

pub fn read_turbine(path: &Path) -> Result<TurbineSpec> {
    let data: TurbineData = read_json(path)?;
    TurbineSpec::new(data)
}

pub fn write_turbine(path: &Path, spec: &TurbineSpec) -> Result<()> {
    write_json(path, spec.data())
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader)
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> FarmError {
    FarmError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn field(path: &Path, rec: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let line = record_line(rec);
    let raw = rec
        .get(idx)
        .ok_or_else(|| parse_err(path, line, format!("missing column `{name}`")))?;
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(path, line, format!("`{name}`: cannot parse `{raw}` as a number")))
}

fn csv_error(path: &Path, e: csv::Error) -> FarmError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    parse_err(path, line, e.to_string())
}

/// Time series with header `timestamp,u100,v100` or `timestamp,speed,direction`.
pub fn read_time_series<R: Read>(reader: R, path: &Path) -> Result<Vec<WindSample>> {
    let mut rdr = csv_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ts = col("timestamp").ok_or_else(|| parse_err(path, 1, "header needs a `timestamp` column"))?;
    let layout = match (col("u100"), col("v100"), col("speed"), col("direction")) {
        (Some(u), Some(v), _, _) => Columns::Components(u, v),
        (_, _, Some(s), Some(d)) => Columns::Polar(s, d),
        _ => {
            return Err(parse_err(
                path,
                1,
                "header must be `timestamp,u100,v100` or `timestamp,speed,direction`",
            ))
        }
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = record_line(&rec);
        let stamp = rec.get(ts).unwrap_or_default().to_string();
        let sample = match layout {
            Columns::Components(u, v) => {
                WindSample::from_components(stamp, field(path, &rec, u, "u100")?, field(path, &rec, v, "v100")?)
            }
            Columns::Polar(s, d) => {
                let speed = field(path, &rec, s, "speed")?;
                if speed < 0.0 {
                    return Err(parse_err(path, line, "negative speed"));
                }
                WindSample::from_polar(stamp, speed, field(path, &rec, d, "direction")?)
            }
        };
        out.push(sample);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Columns {
    Components(usize, usize),
    Polar(usize, usize),
}

pub fn read_time_series_file(path: &Path) -> Result<Vec<WindSample>> {
    read_time_series(open(path)?, path)
}

pub fn write_rose<W: Write>(writer: W, rose: &WindRose) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["center_deg", "frequency", "mean_speed_ms"])?;
    for b in rose.bins() {
        w.write_record([b.center_deg.to_string(), b.frequency.to_string(), b.mean_speed.to_string()])?;
    }
    w.flush()
}

pub fn write_rose_file(path: &Path, rose: &WindRose) -> Result<()> {
    write_rose(create(path)?, rose).map_err(io_err(path))
}

/// Reads the 36-row rose CSV. Frequencies off from unit sum by less than
/// 1e-3 (rounded exports) are renormalized.
pub fn read_rose<R: Read>(reader: R, path: &Path) -> Result<WindRose> {
    let mut rdr = csv_reader(reader);
    let mut bins = Vec::with_capacity(N_BINS);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = record_line(&rec);
        let bin = RoseBin {
            center_deg: field(path, &rec, 0, "center_deg")?,
            frequency: field(path, &rec, 1, "frequency")?,
            mean_speed: field(path, &rec, 2, "mean_speed_ms")?,
        };
        let k = bins.len();
        if k >= N_BINS || (bin.center_deg - bin_center(k)).abs() > 1e-9 {
            return Err(parse_err(
                path,
                line,
                format!("expected bin centered at {} degrees", bin_center(k.min(N_BINS - 1))),
            ));
        }
        bins.push(bin);
    }
    let total: f64 = bins.iter().map(|b| b.frequency).sum();
    if bins.len() == N_BINS && (total - 1.0).abs() > 1e-9 && (total - 1.0).abs() < 1e-3 {
        for b in &mut bins {
            b.frequency /= total;
        }
    }
    WindRose::new(bins).map_err(|e| match e {
        FarmError::InvalidInput(m) => invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_rose_file(path: &Path) -> Result<WindRose> {
    read_rose(open(path)?, path)
}

pub fn write_layout<W: Write>(writer: W, positions: &[Point]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x_m", "y_m"])?;
    for p in positions {
        w.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()
}

pub fn write_layout_file(path: &Path, positions: &[Point]) -> Result<()> {
    write_layout(create(path)?, positions).map_err(io_err(path))
}

pub fn read_layout<R: Read>(reader: R, path: &Path) -> Result<Layout> {
    let mut rdr = csv_reader(reader);
    let mut positions = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        positions.push(Point::new(field(path, &rec, 0, "x_m")?, field(path, &rec, 1, "y_m")?));
    }
    Layout::new(positions)
}

pub fn read_layout_file(path: &Path) -> Result<Layout> {
    read_layout(open(path)?, path)
}

/// Turbine given as a path to a spec file or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurbineSource {
    Path(PathBuf),
    Inline(Box<TurbineData>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WakeSection {
    #[serde(default)]
    pub model: WakeModel,
    /// Jensen expansion coefficient.
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_k_star")]
    pub k_star: f64,
    #[serde(default)]
    pub deficit_basis: DeficitBasis,
}

fn default_k() -> f64 {
    WakeModelConfig::default().k_jensen
}

fn default_k_star() -> f64 {
    WakeModelConfig::default().k_star
}

impl Default for WakeSection {
    fn default() -> Self {
        Self::from(WakeModelConfig::default())
    }
}

impl From<WakeModelConfig> for WakeSection {
    fn from(c: WakeModelConfig) -> Self {
        Self {
            model: c.model,
            k: c.k_jensen,
            k_star: c.k_star,
            deficit_basis: c.deficit_basis,
        }
    }
}

impl From<&WakeSection> for WakeModelConfig {
    fn from(w: &WakeSection) -> Self {
        WakeModelConfig {
            model: w.model,
            k_jensen: w.k,
            k_star: w.k_star,
            deficit_basis: w.deficit_basis,
            ..WakeModelConfig::default()
        }
    }
}

/// Problem file as written on disk. Relative paths resolve against the
/// directory holding the problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub boundary: Boundary,
    /// Defaults to the generic 15 MW reference turbine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turbine: Option<TurbineSource>,
    pub rose: PathBuf,
    #[serde(default)]
    pub wake: WakeSection,
    #[serde(default)]
    pub optimizer: OptimizationConfig,
    /// Fixed turbine count; otherwise derived from the capacity density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_turbines: Option<usize>,
    #[serde(default = "default_density")]
    pub density_mw_km2: f64,
}

fn default_density() -> f64 {
    3.5
}

/// A fully loaded problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub boundary: Boundary,
    pub turbine: TurbineSpec,
    pub rose: WindRose,
    pub wake: WakeModelConfig,
    pub optimizer: OptimizationConfig,
    pub n_turbines: usize,
    /// Files the problem was assembled from (problem file first).
    pub inputs: Vec<PathBuf>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self> {
        let file: ProblemFile = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut inputs = vec![path.to_path_buf()];
        let turbine = match &file.turbine {
            None => TurbineSpec::reference_15mw(),
            Some(TurbineSource::Inline(data)) => TurbineSpec::new((**data).clone())?,
            Some(TurbineSource::Path(p)) => {
                let p = base.join(p);
                let t = read_turbine(&p)?;
                inputs.push(p);
                t
            }
        };
        let rose_path = base.join(&file.rose);
        let rose = read_rose_file(&rose_path)?;
        inputs.push(rose_path);
        let wake = WakeModelConfig::from(&file.wake);
        wake.validate()?;
        file.optimizer.validate()?;
        let n_turbines = match file.n_turbines {
            Some(n) if n > 0 => n,
            Some(_) => return Err(invalid("n_turbines must be at least 1")),
            None => {
                let area = polygon_area(&file.boundary)?;
                capacity_plan(area, file.density_mw_km2, turbine.rated_power())?.n_turbines
            }
        };
        Ok(Self {
            boundary: file.boundary,
            turbine,
            rose,
            wake,
            optimizer: file.optimizer,
            n_turbines,
            inputs,
        })
    }
}
