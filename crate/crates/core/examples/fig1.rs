//! EXTRA with a constant step against DGD with a diminishing one, plus a
//! start placed next to the saddle.
//!
//!     cargo run --release --example fig1 [out_dir]

use extra_lab::harness::{emit_fig1, load_config, reproduce_fig1, Fig1Result};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("extra-lab-fig1"));
    let cfg = load_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/k20_bilinear.toml").as_ref())?;
    let r = reproduce_fig1(&cfg)?;
    println!("tracked agent {}, {} iterations", r.agent, r.iters);
    println!("saddle {:?}, stable direction {:?}", r.saddle, r.stable_direction);
    for k in [1, 10, 50, 100, 200, 300, 400, 500] {
        let at = |s: &[extra_lab::analysis::MetricSample]| s.get(k - 1).and_then(|m| m.dist_to_targets).unwrap_or(f64::NAN);
        println!("k {k:>4}  extra {:.4}  dgd {:.4}  near-saddle {:.4}", at(&r.extra), at(&r.dgd), at(&r.bad));
    }
    println!(
        "final: extra {:.4}, dgd {:.4}",
        Fig1Result::final_distance(&r.extra).unwrap_or(f64::NAN),
        Fig1Result::final_distance(&r.dgd).unwrap_or(f64::NAN)
    );
    for f in emit_fig1(&r, &out, true)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
