//! Gaussian initial points, one run each, tallied by final label.
//!
//!     cargo run --release --example monte_carlo [trials] [iters]

use extra_lab::harness::{emit_monte_carlo, load_config, run_monte_carlo};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let iters: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);

    let mut cfg = load_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/k20_bilinear.toml").as_ref())?;
    cfg.solver.iters = iters;
    if let Some(mc) = cfg.monte_carlo.as_mut() {
        mc.trials = trials;
    }
    let summary = run_monte_carlo(&cfg)?;
    println!("{} trials, alpha {}, {} iterations", summary.trials, summary.alpha, summary.iters);
    for (label, n) in &summary.counts {
        println!("  {label:<26} {n}");
    }
    println!("saddle-trapped       {}/{}", summary.saddle_trapped, summary.trials);
    println!("second-order reached {}/{}", summary.second_order_converged, summary.trials);
    let mut d: Vec<f64> = summary.per_trial.iter().filter_map(|t| t.dist_second_order).collect();
    d.sort_by(f64::total_cmp);
    if !d.is_empty() {
        println!("distance to nearest minimizer: min {:.3e}, median {:.3e}, max {:.3e}", d[0], d[d.len() / 2], d[d.len() - 1]);
    }

    let dir = std::env::temp_dir().join("extra-lab-monte-carlo");
    let files = emit_monte_carlo(&summary, &dir, true)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
