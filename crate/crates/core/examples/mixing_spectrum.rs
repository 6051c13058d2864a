//! Metropolis weights on a few topologies and the contraction factor of the
//! consensus-error recursion.
//!
//!     cargo run --example mixing_spectrum

use extra_lab::graph::{circulant_regular_graph, complete_graph, ring_graph};
use extra_lab::mixing::{lazify, metropolis_weights, MixingPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = [
        ("complete(20)", complete_graph(20)?),
        ("ring(20)", ring_graph(20)?),
        ("circulant(20, 4)", circulant_regular_graph(20, 4)?),
    ];
    println!("{:<18} {:>6} {:>6} {:>12} {:>12} {:>12}", "graph", "theta", "beta", "lambda2(W)", "lambda_min(V)", "lambda1(P)");
    for (name, g) in &graphs {
        for theta in [0.05, 0.25, 0.5] {
            for beta in [0.0, 0.3] {
                let w = lazify(&metropolis_weights(g)?, beta)?;
                match MixingPair::new(w, theta, g) {
                    Ok(pair) => println!(
                        "{name:<18} {theta:>6} {beta:>6} {:>12.6} {:>12.6} {:>12.6}",
                        pair.spectral().w_eigenvalues[1],
                        pair.lambda_min_v(),
                        pair.lambda1_p()
                    ),
                    Err(e) => println!("{name:<18} {theta:>6} {beta:>6}   rejected: {e}"),
                }
            }
        }
    }

    // On the complete graph W is the averaging matrix, so every nonconsensual
    // mode of P solves λ² - λ + θ = 0.
    let g = complete_graph(20)?;
    for theta in [0.05, 0.2, 0.25, 0.3, 0.5] {
        let pair = MixingPair::new(metropolis_weights(&g)?, theta, &g)?;
        let root = if theta >= 0.25 { theta.sqrt() } else { (1.0 + (1.0 - 4.0 * theta).sqrt()) / 2.0 };
        println!("K20 theta {theta:<5} lambda1(P) {:.10}  root modulus {root:.10}", pair.lambda1_p());
    }
    Ok(())
}
