//! Load a TOML experiment, run it, and write metrics.csv, meta.json and
//! chart.svg.
//!
//!     cargo run --release --example config_run -- configs/ring_quartic.toml /tmp/out

use std::path::PathBuf;

use extra_lab::analysis::cesaro_rates;
use extra_lab::harness::{emit_outputs, load_config, run_single, HarnessError};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/k20_bilinear.toml")));
    let out = args.next().map(PathBuf::from);
    if let Err(e) = go(&path, out) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn go(path: &std::path::Path, out: Option<PathBuf>) -> Result<(), HarnessError> {
    let cfg = load_config(path)?;
    let rec = run_single(&cfg)?;
    let last = rec.series.last().expect("at least one iteration");
    println!("{:?} with {:?}", rec.meta.solver, rec.meta.schedule);
    println!("k = {}: consensus {:.3e}, avg grad {:.3e}, F = {:.6}", last.k, last.consensus_error, last.avg_grad_norm, last.objective);
    if let Some(v) = rec.verdict {
        println!("verdict {} (lambda_min {:?})", v.label.as_str(), v.lambda_min);
    }
    if let Ok(r) = cesaro_rates(&rec.series) {
        println!(
            "running-average slopes: consensus {:.2}, gradient {:.2}",
            r.consensus.loglog_slope, r.gradient.loglog_slope
        );
    }
    for w in &rec.meta.warnings {
        println!("warning: {w}");
    }
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    for f in emit_outputs(&rec, &dir, true)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
