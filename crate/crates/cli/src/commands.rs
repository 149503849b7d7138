//! Subcommand implementations. Each one writes its outputs and a
//! [`RunManifest`] into the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use farmlayout::aep::GridSpec;
use farmlayout::io::{read_layout_file, read_time_series_file, write_layout_file, write_rose_file, Problem};
use farmlayout::layoutopt::StartOutcome;
use farmlayout::windrose::{bin_index, BinMean, SyntheticRose};
use farmlayout::{
    capacity_plan, compare_models, compute_aep, edge_clustering_metric, flow_field, optimize, Layout, Point,
};
use log::info;
use serde::Serialize;

use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::render;
use crate::{
    CapacityArgs, Cli, Command, CompareArgs, EvaluateArgs, FlowfieldArgs, OptimizeArgs, WindroseArgs,
};

/// Distance from the boundary within which a turbine counts as edge-placed, m.
pub const EDGE_BAND_M: f64 = 1000.0;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Windrose(a) => windrose(cli, a),
        Command::Capacity(a) => capacity(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Optimize(a) => optimize_cmd(cli, a),
        Command::Flowfield(a) => flowfield(cli, a),
        Command::Compare(a) => compare(cli, a),
    }
}

/// Output directory that remembers what was written into it.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
    clock: Instant,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            clock: Instant::now(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        farmlayout::io::write_json(&path, value)?;
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = std::mem::take(&mut self.written);
        manifest.wall_time = self.clock.elapsed().as_secs_f64();
        farmlayout::io::write_json(&self.dir.join(MANIFEST_FILE), &manifest)?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct RoseSummary {
    dominant_center_deg: f64,
    dominant_frequency: f64,
    dominant_mean_speed_ms: f64,
    mean_speed_ms: f64,
    samples: Option<usize>,
}

fn windrose(cli: &Cli, a: &WindroseArgs) -> Result<()> {
    let mut out = Outputs::create(&cli.out)?;
    let mean = if a.cubic_mean { BinMean::Cubic } else { BinMean::Arithmetic };
    let (rose, inputs, samples) = match &a.input {
        Some(path) => {
            let series = read_time_series_file(path)?;
            let rose = farmlayout::windrose::bin_time_series_with(&series, a.alpha, a.ref_height, a.hub_height, mean)?;
            (rose, vec![path.clone()], Some(series.len()))
        }
        None => (SyntheticRose::default().build()?, Vec::new(), None),
    };
    let path = out.path("rose.csv");
    write_rose_file(&path, &rose)?;
    let dom = rose.dominant_bin();
    let summary = RoseSummary {
        dominant_center_deg: dom.center_deg,
        dominant_frequency: dom.frequency,
        dominant_mean_speed_ms: dom.mean_speed,
        mean_speed_ms: rose.mean_speed(),
        samples,
    };
    out.json("rose_summary.json", &summary)?;
    if a.render {
        out.text("rose.svg", &render::rose_svg(&rose))?;
    }
    println!(
        "dominant bin {:.0}° ({:.1}% of the time, {:.2} m/s); mean speed {:.2} m/s",
        dom.center_deg,
        100.0 * dom.frequency,
        dom.mean_speed,
        summary.mean_speed_ms
    );
    let config = serde_json::json!({
        "synthetic": a.synthetic,
        "ref_height_m": a.ref_height,
        "hub_height_m": a.hub_height,
        "alpha": a.alpha,
        "cubic_mean": a.cubic_mean,
    });
    out.finish(RunManifest::new("windrose", &inputs, config)?)
}

#[derive(Debug, Serialize)]
struct CapacityReport {
    area_km2: f64,
    density_mw_km2: f64,
    unit_rating_mw: f64,
    capacity_mw: f64,
    n_turbines: usize,
    unallocated_mw: f64,
    unallocated_area_km2: f64,
}

fn capacity(cli: &Cli, a: &CapacityArgs) -> Result<()> {
    let mut out = Outputs::create(&cli.out)?;
    let plan = capacity_plan(a.area, a.density, a.rating)?;
    let unallocated = plan.capacity - plan.n_turbines as f64 * a.rating;
    let report = CapacityReport {
        area_km2: a.area,
        density_mw_km2: a.density,
        unit_rating_mw: a.rating,
        capacity_mw: plan.capacity,
        n_turbines: plan.n_turbines,
        unallocated_mw: unallocated,
        unallocated_area_km2: unallocated / a.density,
    };
    println!(
        "installed capacity: {} MW ({:.1} MW)",
        round_display(plan.capacity),
        plan.capacity
    );
    println!(
        "turbines: {} x {} MW = {} MW",
        plan.n_turbines,
        a.rating,
        round_display(plan.n_turbines as f64 * a.rating)
    );
    println!(
        "unallocated: {} MW, i.e. {:.3} km² at {} MW/km²",
        round_display(unallocated),
        report.unallocated_area_km2,
        a.density
    );
    out.json("capacity.json", &report)?;
    let config = serde_json::json!({"area_km2": a.area, "density_mw_km2": a.density, "unit_rating_mw": a.rating});
    out.finish(RunManifest::new("capacity", &[], config)?)
}

/// Shortest decimal after rounding away float noise (627.5500000001 -> 627.55).
fn round_display(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    format!("{r}")
}

fn load(problem: &Path, layout: Option<&Path>) -> Result<(Problem, Option<Layout>, Vec<PathBuf>)> {
    let p = Problem::load(problem)?;
    let mut inputs = p.inputs.clone();
    let layout = match layout {
        Some(path) => {
            inputs.push(path.to_path_buf());
            Some(read_layout_file(path)?)
        }
        None => None,
    };
    Ok((p, layout, inputs))
}

#[derive(Debug, Serialize)]
struct DirectionRow {
    center_deg: f64,
    frequency: f64,
    mean_speed_ms: f64,
    power_mw: f64,
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<()> {
    let (problem, layout, inputs) = load(&a.problem, Some(&a.layout))?;
    let layout = layout.expect("layout requested");
    let wake = a.wake.apply(problem.wake);
    let report = compute_aep(&layout, &problem.turbine, &problem.rose, &wake)?;
    let mut out = Outputs::create(&cli.out)?;
    out.json("report.json", &report)?;
    let rows = problem
        .rose
        .bins()
        .iter()
        .zip(&report.per_direction_power)
        .map(|(b, &p)| DirectionRow {
            center_deg: b.center_deg,
            frequency: b.frequency,
            mean_speed_ms: b.mean_speed,
            power_mw: p,
        });
    out.csv("per_direction.csv", rows)?;
    if a.render {
        out.text("layout.svg", &render::layout_svg(&problem.boundary, layout.positions(), None))?;
    }
    println!(
        "AEP {:.3} GWh/yr (gross {:.3}), wake loss {:.2}%",
        report.aep,
        report.gross_aep,
        100.0 * report.wake_loss
    );
    let config = serde_json::json!({"wake": wake, "n_turbines": layout.len()});
    out.finish(RunManifest::new("evaluate", &inputs, config)?)
}

#[derive(Debug, Serialize)]
struct HistoryRow {
    start: usize,
    sequence: usize,
    iteration: usize,
    objective: f64,
    penalty_weight: f64,
    wake_spread: f64,
    accepted: bool,
}

#[derive(Debug, Serialize)]
struct StartRow {
    start: usize,
    seed: u64,
    status: &'static str,
    initial_aep: Option<f64>,
    final_aep: Option<f64>,
    wake_loss: Option<f64>,
    initial_edge_fraction: Option<f64>,
    final_edge_fraction: Option<f64>,
    failure: Option<String>,
}

#[derive(Debug, Serialize)]
struct LayoutRow {
    start: usize,
    x_m: f64,
    y_m: f64,
}

fn layout_rows<'a>(starts: &'a [StartOutcome], pick: fn(&StartOutcome) -> Option<&Layout>) -> impl Iterator<Item = LayoutRow> + 'a {
    starts.iter().flat_map(move |s| {
        pick(s)
            .map(|l| l.positions().to_vec())
            .unwrap_or_default()
            .into_iter()
            .map(move |p: Point| LayoutRow {
                start: s.start,
                x_m: p.x,
                y_m: p.y,
            })
    })
}

fn optimize_cmd(cli: &Cli, a: &OptimizeArgs) -> Result<()> {
    let (problem, _, inputs) = load(&a.problem, None)?;
    let mut cfg = problem.optimizer.clone();
    if let Some(v) = a.starts {
        cfg.n_starts = v;
    }
    if let Some(v) = a.iterations {
        cfg.n_iterations = v;
    }
    if let Some(v) = a.sequences {
        cfg.n_sequences = v;
    }
    if let Some(v) = a.min_spacing_d {
        cfg.min_spacing = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    let n = a.n_turbines.unwrap_or(problem.n_turbines);
    let wake = a.wake.apply(problem.wake);
    info!("optimizing {n} turbines: {cfg:?}");

    let result = optimize(&problem.turbine, &problem.rose, &problem.boundary, n, &cfg, &wake)?;
    let mut out = Outputs::create(&cli.out)?;
    let path = out.path("layout.csv");
    write_layout_file(&path, result.best_layout.positions())?;
    out.json("report.json", &result.best_report)?;

    let history = result.starts.iter().flat_map(|s| {
        s.history.iter().map(move |h| HistoryRow {
            start: s.start,
            sequence: h.sequence,
            iteration: h.iteration,
            objective: h.objective,
            penalty_weight: h.penalty_weight,
            wake_spread: h.wake_spread,
            accepted: h.accepted,
        })
    });
    out.csv("history.csv", history)?;

    let boundary = &problem.boundary;
    let edge = |l: &Layout| edge_clustering_metric(l.positions(), boundary, EDGE_BAND_M).ok();
    let rows: Vec<StartRow> = result
        .starts
        .iter()
        .map(|s| StartRow {
            start: s.start,
            seed: s.seed,
            status: if s.final_layout.is_some() { "ok" } else { "discarded" },
            initial_aep: s.initial_aep,
            final_aep: s.final_report.as_ref().map(|r| r.aep),
            wake_loss: s.final_report.as_ref().map(|r| r.wake_loss),
            initial_edge_fraction: s.initial_layout.as_ref().and_then(edge),
            final_edge_fraction: s.final_layout.as_ref().and_then(edge),
            failure: s.failure.clone(),
        })
        .collect();
    out.csv("starts.csv", rows)?;
    out.csv("initial_layouts.csv", layout_rows(&result.starts, |s| s.initial_layout.as_ref()))?;
    out.csv("final_layouts.csv", layout_rows(&result.starts, |s| s.final_layout.as_ref()))?;

    if a.render {
        let initial = result.starts[result.best_start].initial_layout.as_ref().map(|l| l.positions());
        out.text(
            "layout.svg",
            &render::layout_svg(boundary, result.best_layout.positions(), initial),
        )?;
    }
    let r = &result.best_report;
    println!(
        "best start {}: AEP {:.3} GWh/yr (gross {:.3}), wake loss {:.2}%, {:.1} s",
        result.best_start,
        r.aep,
        r.gross_aep,
        100.0 * r.wake_loss,
        result.wall_time
    );
    let config = serde_json::json!({
        "optimizer": cfg,
        "wake": wake,
        "n_turbines": n,
        "edge_band_m": EDGE_BAND_M,
    });
    out.finish(RunManifest::new("optimize", &inputs, config)?)
}

fn flowfield(cli: &Cli, a: &FlowfieldArgs) -> Result<()> {
    let (problem, layout, inputs) = load(&a.problem, Some(&a.layout))?;
    let layout = layout.expect("layout requested");
    let wake = a.wake.apply(problem.wake);
    let bins = problem.rose.bins();
    let direction = a.direction.unwrap_or(problem.rose.dominant_bin().center_deg);
    let speed = a.speed.unwrap_or(bins[bin_index(direction)].mean_speed);

    let (mut lo, mut hi) = problem.boundary.bounding_box();
    for p in layout.positions() {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let grid = GridSpec::covering(lo, hi, a.margin, a.cell_size)?;
    let field = flow_field(&layout, &problem.turbine, direction, speed, &wake, &grid)?;

    let mut out = Outputs::create(&cli.out)?;
    let rows = (0..field.ny).flat_map(|j| {
        let field = &field;
        (0..field.nx).map(move |i| {
            let p = field.point(i, j);
            (p.x, p.y, field.speed(i, j))
        })
    });
    let path = out.path("flowfield.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["x", "y", "speed"])?;
    for (x, y, u) in rows {
        w.write_record([x.to_string(), y.to_string(), u.to_string()])?;
    }
    w.flush()?;
    if a.render {
        out.text(
            "flowfield.svg",
            &render::flow_field_svg(&field, &problem.boundary, layout.positions(), speed),
        )?;
    }
    println!(
        "{} x {} cells, wind from {direction}° at {speed:.2} m/s, slowest {:.2} m/s",
        field.nx,
        field.ny,
        field.speeds.iter().copied().fold(speed, f64::min)
    );
    let config = serde_json::json!({
        "direction_deg": direction,
        "speed_ms": speed,
        "grid": grid,
        "margin_m": a.margin,
        "wake": wake,
    });
    out.finish(RunManifest::new("flowfield", &inputs, config)?)
}

fn compare(cli: &Cli, a: &CompareArgs) -> Result<()> {
    let (problem, layout, inputs) = load(&a.problem, Some(&a.layout))?;
    let layout = layout.expect("layout requested");
    let cmp = compare_models(&layout, &problem.turbine, &problem.rose)?;
    let mut out = Outputs::create(&cli.out)?;
    out.json("compare.json", &cmp)?;
    println!(
        "Bastankhah {:.3} GWh/yr, Jensen {:.3} GWh/yr, relative gap {:.2}%",
        cmp.aep_bastankhah,
        cmp.aep_jensen,
        100.0 * cmp.relative_gap
    );
    out.finish(RunManifest::new("compare", &inputs, serde_json::json!({"n_turbines": layout.len()}))?)
}
