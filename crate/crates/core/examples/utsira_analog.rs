//! Desk-scale analog of a 179 km² offshore tender area: 41 × 15 MW turbines
//! in a 13.4 km × 13.38 km rectangle under a north-north-westerly rose.
//!
//! `cargo run --release -p farmlayout --example utsira_analog -- [starts] [iterations]`

use farmlayout::windrose::SyntheticRose;
use farmlayout::{compare_models, optimize, Boundary, OptimizationConfig, TurbineSpec, WakeModelConfig};

fn main() -> farmlayout::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = OptimizationConfig {
        n_starts: args.first().copied().unwrap_or(5),
        n_iterations: args.get(1).copied().unwrap_or(20),
        ..Default::default()
    };
    let spec = TurbineSpec::reference_15mw();
    let rose = SyntheticRose::default().build()?;
    let boundary = Boundary::rectangle(13_400.0, 13_380.0)?;
    let result = optimize(&spec, &rose, &boundary, 41, &cfg, &WakeModelConfig::default())?;
    for s in &result.starts {
        println!(
            "start {:2}: initial {:9.3} GWh -> {}",
            s.start,
            s.initial_aep.unwrap_or(f64::NAN),
            s.final_report
                .as_ref()
                .map(|r| format!("{:9.3} GWh, wake loss {:.2}%", r.aep, 100.0 * r.wake_loss))
                .unwrap_or_else(|| s.failure.clone().unwrap_or_default())
        );
    }
    let r = &result.best_report;
    println!(
        "best start {}: AEP {:.3} GWh (gross {:.3}), wake loss {:.2}%, {:.1} s",
        result.best_start,
        r.aep,
        r.gross_aep,
        100.0 * r.wake_loss,
        result.wall_time
    );
    let cmp = compare_models(&result.best_layout, &spec, &rose)?;
    println!(
        "Bastankhah {:.3} GWh, Jensen {:.3} GWh, gap {:.2}%",
        cmp.aep_bastankhah,
        cmp.aep_jensen,
        100.0 * cmp.relative_gap
    );
    Ok(())
}
