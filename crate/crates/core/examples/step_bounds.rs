//! Theoretical step-size bounds against the step the experiments use.
//!
//!     cargo run --example step_bounds [config.toml]

use std::path::PathBuf;

use extra_lab::harness::{build_instance, load_config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/k20_bilinear.toml")));
    let cfg = load_config(&path)?;
    let inst = build_instance(&cfg)?;
    let b = &inst.bounds;
    println!("config          {}", path.display());
    println!("lambda1(P)      {:.10}", b.lambda1_p);
    println!("lambda_min(V)   {:.10}", b.lambda_min_v);
    println!("L_F (r = {})   {:.10}", b.lipschitz_radius, b.l_f);
    println!("thm1 bound      {:.6e}", b.thm1);
    println!("thm2 bound      {:.6e}", b.thm2);
    println!("lambda_min(V)/L_F {:.6e}", b.lambda_min_v / b.l_f);
    println!("0.2 / thm1      {:.1}", 0.2 / b.thm1);
    Ok(())
}
