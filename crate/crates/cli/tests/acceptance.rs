//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs the full 30-start desk-scale analog through the
//! binary, so expect several minutes on a single core.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use farmlayout::aep::AepEvaluator;
use farmlayout::io::{read_layout_file, write_layout, Problem};
use farmlayout::layoutopt::{latin_hypercube_sample, CentralDifference, GradientSource, ObjectiveScratch, PenalizedObjective};
use farmlayout::wake::SweepScratch;
use farmlayout::windrose::SyntheticRose;
use farmlayout::{
    bastankhah_deficit, combine_deficits, compare_models, compute_aep, edge_clustering_metric, jensen_deficit, optimize,
    penalized_objective, shear_extrapolate, Boundary, EvaluationReport, Layout, OptimizationConfig, Point,
    TurbineSpec, WakeModel, WakeModelConfig, WindRose,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const D: f64 = 240.0;
const EDGE_BAND_M: f64 = 1000.0;
const FULL_RUN_BUDGET_S: f64 = 600.0;
const CI_RUN_BUDGET_S: f64 = 60.0;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn farmlayout(args: &[&str]) -> Result<(String, f64), String> {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_farmlayout"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed().as_secs_f64();
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok((String::from_utf8_lossy(&out.stdout).into_owned(), elapsed))
}

fn analog_problem() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/utsira_analog/problem.json"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `start,x_m,y_m` rows grouped per start.
fn read_grouped_layouts(path: &Path) -> Result<Vec<Vec<Point>>, String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let mut groups: Vec<(usize, Vec<Point>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let start: usize = rec[0].parse().map_err(|e| format!("{e}"))?;
        let p = Point::new(rec[1].parse().unwrap(), rec[2].parse().unwrap());
        match groups.last_mut() {
            Some((s, pts)) if *s == start => pts.push(p),
            _ => groups.push((start, vec![p])),
        }
    }
    Ok(groups.into_iter().map(|(_, p)| p).collect())
}

// --- 1 --------------------------------------------------------------------

fn capacity_math(out: &Path) -> Outcome {
    let o = out.to_str().unwrap();
    let (fifteen, t15) = farmlayout(&["capacity", "--area", "179.3", "--density", "3.5", "--rating", "15", "--out", o])?;
    let (five, t5) = farmlayout(&["capacity", "--area", "179.3", "--density", "3.5", "--rating", "5", "--out", o])?;
    let shown = fifteen.contains("(627.5 MW)") || fifteen.contains("(627.6 MW)");
    let ok = fifteen.contains("627.55 MW")
        && shown
        && fifteen.contains("turbines: 41 ")
        && five.contains("turbines: 125 ")
        && t15 < 1.0
        && t5 < 1.0;
    check(
        ok,
        format!("627.55 MW, 41 x 15 MW, 125 x 5 MW; runtimes {t15:.3} s / {t5:.3} s (< 1 s)"),
    )
}

// --- 2 --------------------------------------------------------------------

/// (1.5^3)^(1/20) by Newton iteration, independent of `powf`.
fn shear_oracle() -> f64 {
    let x = 1.5f64 * 1.5 * 1.5;
    let mut r = 1.0f64;
    for _ in 0..100 {
        r -= (r.powi(20) - x) / (20.0 * r.powi(19));
    }
    r
}

fn shear() -> Outcome {
    let got = shear_extrapolate(1.0, 100.0, 150.0, 0.15).map_err(|e| e.to_string())?;
    let oracle = shear_oracle();
    check(
        (got - 1.06266).abs() <= 1e-4 && (got - oracle).abs() <= 1e-12,
        format!("factor {got:.8}, oracle {oracle:.8}, |factor - 1.06266| = {:.2e}", (got - 1.06266).abs()),
    )
}

// --- 3-5 ------------------------------------------------------------------

struct FullRun {
    wall: f64,
    report: EvaluationReport,
    best_initial_aep: f64,
    layout: Layout,
    initial: Vec<Vec<Point>>,
    finals: Vec<Vec<Point>>,
}

fn full_run(out: &Path) -> Result<FullRun, String> {
    let problem = Problem::load(analog_problem()).map_err(|e| e.to_string())?;
    let analog_rose = SyntheticRose::default().build().map_err(|e| e.to_string())?;
    if problem.rose != analog_rose || problem.n_turbines != 41 || problem.optimizer.n_starts != 30 {
        return Err("analog problem file drifted from the acceptance configuration".into());
    }
    let o = out.to_str().unwrap();
    let (_, wall) = farmlayout(&["optimize", "--problem", analog_problem().to_str().unwrap(), "--out", o])?;
    let report: EvaluationReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let mut best_initial_aep = f64::MIN;
    let mut rdr = csv::Reader::from_path(out.join("starts.csv")).map_err(|e| e.to_string())?;
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = header.iter().position(|h| h == "initial_aep").ok_or("no initial_aep column")?;
    for rec in rdr.records() {
        if let Ok(v) = rec.map_err(|e| e.to_string())?[col].parse::<f64>() {
            best_initial_aep = best_initial_aep.max(v);
        }
    }
    Ok(FullRun {
        wall,
        report,
        best_initial_aep,
        layout: read_layout_file(&out.join("layout.csv")).map_err(|e| e.to_string())?,
        initial: read_grouped_layouts(&out.join("initial_layouts.csv"))?,
        finals: read_grouped_layouts(&out.join("final_layouts.csv"))?,
    })
}

fn analog_full(run: &FullRun) -> Outcome {
    let r = &run.report;
    check(
        r.wake_loss <= 0.05 && r.aep > run.best_initial_aep && run.wall <= FULL_RUN_BUDGET_S,
        format!(
            "30x3x70: wake loss {:.2}% (<= 5%), AEP {:.1} GWh > best LHS start {:.1} GWh, wall {:.1} s (<= {FULL_RUN_BUDGET_S} s)",
            100.0 * r.wake_loss,
            r.aep,
            run.best_initial_aep,
            run.wall
        ),
    )
}

fn analog_ci(out: &Path) -> Outcome {
    let o = out.to_str().unwrap();
    let (_, wall) = farmlayout(&[
        "optimize", "--problem", analog_problem().to_str().unwrap(), "--starts", "5", "--iterations", "20", "--out", o,
    ])?;
    let report: EvaluationReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    check(
        report.wake_loss <= 0.08 && wall <= CI_RUN_BUDGET_S,
        format!(
            "5x3x20: wake loss {:.2}% (<= 8%), wall {wall:.1} s (<= {CI_RUN_BUDGET_S} s)",
            100.0 * report.wake_loss
        ),
    )
}

fn model_cross_check(run: &FullRun) -> Outcome {
    let spec = TurbineSpec::reference_15mw();
    let rose = SyntheticRose::default().build().map_err(|e| e.to_string())?;
    let cmp = compare_models(&run.layout, &spec, &rose).map_err(|e| e.to_string())?;
    check(
        cmp.relative_gap <= 0.05,
        format!(
            "Bastankhah {:.1} GWh, Jensen {:.1} GWh, gap {:.2}% (<= 5%)",
            cmp.aep_bastankhah,
            cmp.aep_jensen,
            100.0 * cmp.relative_gap
        ),
    )
}

fn edge_clustering(run: &FullRun) -> Outcome {
    let boundary = Boundary::rectangle(13_400.0, 13_380.0).map_err(|e| e.to_string())?;
    let metric = |layouts: &[Vec<Point>]| -> Result<Vec<f64>, String> {
        layouts
            .iter()
            .map(|p| edge_clustering_metric(p, &boundary, EDGE_BAND_M).map_err(|e| e.to_string()))
            .collect()
    };
    let (init, fin) = (metric(&run.initial)?, metric(&run.finals)?);
    if init.is_empty() || fin.is_empty() {
        return Err("no layouts to compare".into());
    }
    let (mi, mf) = (median(init.clone()), median(fin.clone()));
    check(
        mf >= mi,
        format!(
            "median edge fraction {mf:.3} over {} optimized >= {mi:.3} over {} initial layouts",
            fin.len(),
            init.len()
        ),
    )
}

// --- 6 --------------------------------------------------------------------

fn deficit_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (f64::MAX, f64::MIN);
    for _ in 0..100_000 {
        let dx = rng.random_range(-5.0 * D..60.0 * D);
        let dr = rng.random_range(-20.0 * D..20.0 * D);
        let ct = rng.random_range(0.0..1.0);
        for d in [jensen_deficit(dx, dr, ct, D, 0.05), bastankhah_deficit(dx, dr, ct, D, 0.025)] {
            worst = (worst.0.min(d), worst.1.max(d));
        }
    }
    check(
        worst.0 >= 0.0 && worst.1 <= 1.0,
        format!("1e5 probes x 2 models, deficits within [{:.3}, {:.3}]", worst.0, worst.1),
    )
}

fn rotation_invariance() -> Outcome {
    let spec = TurbineSpec::reference_15mw();
    let rose = SyntheticRose::default().build().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let layout = Layout::new(
        (0..41)
            .map(|_| Point::new(rng.random_range(0.0..13_000.0), rng.random_range(0.0..13_000.0)))
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for model in [WakeModel::Jensen, WakeModel::Bastankhah] {
        let cfg = WakeModelConfig::with_model(model);
        let base = compute_aep(&layout, &spec, &rose, &cfg).map_err(|e| e.to_string())?.aep;
        for k in 1..36i64 {
            let turned = compute_aep(&layout.rotated_clockwise(10.0 * k as f64), &spec, &rose.rotated(k), &cfg)
                .map_err(|e| e.to_string())?
                .aep;
            worst = worst.max((turned - base).abs() / base);
        }
    }
    check(worst <= 1e-9, format!("35 rotations x 2 models, worst relative change {worst:.1e} (<= 1e-9)"))
}

fn rss_superposition() -> Outcome {
    let pair = combine_deficits(&[0.3, 0.4]);
    let single = combine_deficits(&[0.37]);
    check(
        (pair - 0.5).abs() <= 1e-12 && single == 0.37,
        format!("[0.3, 0.4] -> {pair:.15}, [0.37] -> {single}"),
    )
}

fn centreline() -> Outcome {
    // independent closed form of the Gaussian deficit on the axis
    let (ct, k_star, x_d): (f64, f64, f64) = (0.8, 0.025, 8.0);
    let beta = 0.5 * (1.0 + (1.0 - ct).sqrt()) / (1.0 - ct).sqrt();
    let sigma_d = k_star * x_d + 0.2 * beta.sqrt();
    let oracle = 1.0 - (1.0 - ct / (8.0 * sigma_d * sigma_d)).sqrt();
    let got = bastankhah_deficit(x_d * D, 0.0, ct, D, k_star);
    check(
        (got - 0.2818).abs() <= 1e-3 && (got - oracle).abs() <= 1e-12,
        format!("deficit {got:.5}, oracle {oracle:.5}, target 0.2818 +/- 1e-3"),
    )
}

fn gradient_check() -> Outcome {
    let spec = TurbineSpec::reference_15mw();
    let rose = SyntheticRose {
        calm_speed: 6.0,
        peak_speed: 8.0,
        ..SyntheticRose::default()
    }
    .build()
    .map_err(|e| e.to_string())?;
    let wake = WakeModelConfig::default();
    let b = Boundary::rectangle(6000.0, 6000.0).map_err(|e| e.to_string())?;
    let positions = vec![Point::new(2000.0, 4000.0), Point::new(2500.0, 2600.0), Point::new(3300.0, 1500.0)];
    let weight = 1e-3;
    let objective = PenalizedObjective::new(&spec, &rose, &wake, &b, 2.0 * D).map_err(|e| e.to_string())?;
    let mut internal = Vec::new();
    CentralDifference { step: 1.0 }.gradient(&objective, &positions, weight, &mut ObjectiveScratch::default(), &mut internal);
    let f = |p: &[Point]| {
        penalized_objective(&Layout::new(p.to_vec()).unwrap(), &spec, &rose, &wake, &b, 2.0 * D, weight).unwrap()
    };
    let h = 0.1;
    let (mut diff2, mut norm2) = (0.0, 0.0);
    for i in 0..positions.len() {
        for axis in 0..2 {
            let (mut plus, mut minus) = (positions.clone(), positions.clone());
            if axis == 0 {
                plus[i].x += h;
                minus[i].x -= h;
            } else {
                plus[i].y += h;
                minus[i].y -= h;
            }
            let fine = (f(&plus) - f(&minus)) / (2.0 * h);
            let coarse = if axis == 0 { internal[i].x } else { internal[i].y };
            diff2 += (fine - coarse).powi(2);
            norm2 += fine * fine;
        }
    }
    let rel = (diff2 / norm2).sqrt();
    check(
        norm2 > 0.0 && rel <= 1e-3,
        format!("3-turbine probe, step 1 m vs 0.1 m: relative norm error {rel:.2e} (<= 1e-3)"),
    )
}

fn lhs_strata() -> Outcome {
    let b = Boundary::rectangle(13_400.0, 13_380.0).map_err(|e| e.to_string())?;
    let (lo, hi) = b.bounding_box();
    let n = 41;
    for seed in 0..30 {
        let s = latin_hypercube_sample(n, &b, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(|e| e.to_string())?;
        let (w, h) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
        let mut hits = vec![[0u32; 2]; n];
        for (p, &inside) in s.layout.positions().iter().zip(&s.in_cell) {
            if !inside {
                return Err(format!("seed {seed}: sample left its cell in a convex boundary"));
            }
            hits[(((p.x - lo.x) / w) as usize).min(n - 1)][0] += 1;
            hits[(((p.y - lo.y) / h) as usize).min(n - 1)][1] += 1;
        }
        if hits.iter().any(|c| *c != [1, 1]) {
            return Err(format!("seed {seed}: a stratum holds other than exactly one sample"));
        }
    }
    Ok("30 seeds x 41 samples: exactly one in-cell sample per x and y stratum".into())
}

fn determinism(out: &Path) -> Outcome {
    let problem = analog_problem().to_str().unwrap();
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let dir = out.join(name);
        farmlayout(&[
            "optimize", "--problem", problem, "--starts", "2", "--iterations", "5", "--seed", "11", "--out",
            dir.to_str().unwrap(),
        ])?;
        fs::read(dir.join("layout.csv")).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a")?, run("b")?);
    // and the in-process optimizer writes the very same bytes
    let p = Problem::load(analog_problem()).map_err(|e| e.to_string())?;
    let cfg = OptimizationConfig {
        n_starts: 2,
        n_iterations: 5,
        seed: 11,
        ..p.optimizer.clone()
    };
    let r = optimize(&p.turbine, &p.rose, &p.boundary, p.n_turbines, &cfg, &p.wake).map_err(|e| e.to_string())?;
    let mut c = Vec::new();
    write_layout(&mut c, r.best_layout.positions()).map_err(|e| e.to_string())?;
    check(a == b && a == c, format!("two CLI runs and one library run, {} identical layout CSV bytes", a.len()))
}

fn two_turbine_sanity() -> Outcome {
    let spec = TurbineSpec::reference_15mw();
    let rose = WindRose::single_direction(275.0, 9.0).map_err(|e| e.to_string())?;
    let wake = WakeModelConfig::default();
    let eval = AepEvaluator::new(&spec, &rose, &wake).map_err(|e| e.to_string())?;
    let side = 3000.0;
    let grid: Vec<Point> = (0..50)
        .flat_map(|i| (0..50).map(move |j| Point::new(i as f64 * side / 49.0, j as f64 * side / 49.0)))
        .collect();
    let mut scratch = SweepScratch::default();
    let mut brute_best = f64::MIN;
    for (i, &p) in grid.iter().enumerate() {
        for &q in &grid[i + 1..] {
            if p.distance(q) >= 2.0 * D {
                brute_best = brute_best.max(eval.aep(&[p, q], &mut scratch));
            }
        }
    }
    let b = Boundary::rectangle(side, side).map_err(|e| e.to_string())?;
    let cfg = OptimizationConfig {
        n_starts: 3,
        n_iterations: 20,
        ..OptimizationConfig::default()
    };
    let r = optimize(&spec, &rose, &b, 2, &cfg, &wake).map_err(|e| e.to_string())?;
    check(
        r.best_report.wake_loss < 1e-3 && r.best_report.aep >= brute_best * (1.0 - 1e-3),
        format!(
            "optimizer {:.4} GWh (loss {:.4}%), 50x50 brute force {:.4} GWh",
            r.best_report.aep,
            100.0 * r.best_report.wake_loss,
            brute_best
        ),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = |name: &str| tmp.path().join(name);

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, outcome: Outcome| {
        println!("{} {name}: {}", if outcome.is_ok() { "PASS" } else { "FAIL" }, match &outcome {
            Ok(d) | Err(d) => d,
        });
        results.push((name, outcome));
    };

    record("1 capacity math", capacity_math(&dir("capacity")));
    record("2 shear extrapolation", shear());
    match full_run(&dir("analog")) {
        Ok(run) => {
            record("3 desk-scale analog (full)", analog_full(&run));
            record("3 desk-scale analog (CI variant)", analog_ci(&dir("analog-ci")));
            record("4 Jensen / Bastankhah cross-check", model_cross_check(&run));
            record("5 edge clustering", edge_clustering(&run));
        }
        Err(e) => {
            record("3 desk-scale analog (full)", Err(e.clone()));
            record("3 desk-scale analog (CI variant)", analog_ci(&dir("analog-ci")));
            record("4 Jensen / Bastankhah cross-check", Err(format!("no optimized layout: {e}")));
            record("5 edge clustering", Err(format!("no optimized layouts: {e}")));
        }
    }
    record("6 deficit bounds", deficit_bounds());
    record("6 AEP rotation invariance", rotation_invariance());
    record("6 RSS superposition", rss_superposition());
    record("6 Gaussian centreline", centreline());
    record("6 gradient check", gradient_check());
    record("6 LHS stratification", lhs_strata());
    record("6 determinism", determinism(&dir("determinism")));
    record("6 two-turbine sanity", two_turbine_sanity());

    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
