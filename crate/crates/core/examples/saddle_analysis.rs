//! Stationary points of the bilinear logistic instance, their labels, and
//! the Jacobian of the one-round map at the saddle.
//!
//!     cargo run --example saddle_analysis

use extra_lab::analysis::{
    classify_point, find_stationary_points, lemma4_certificate, t_map_jacobian, StationarySearch, Tolerances,
};
use extra_lab::graph::complete_graph;
use extra_lab::linalg::spectral_radius;
use extra_lab::mixing::{metropolis_weights, MixingPair};
use extra_lab::objectives::generate_bilinear_logistic;
use extra_lab::point::StackedPoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 20;
    let g = complete_graph(m)?;
    let pair = MixingPair::new(metropolis_weights(&g)?, 0.5, &g)?;
    let obj = generate_bilinear_logistic(m, 0.1, 1)?;
    let data = obj.dataset().unwrap();
    println!("coupling sum(zeta*xi)/(2m) = {:.4}, eta = 0.1", data.saddle_coupling());

    let points = find_stationary_points(&obj, &StationarySearch::default())?;
    let tol = Tolerances::default();
    for p in points.second_order.iter().chain(&points.strict_saddles) {
        let v = classify_point(&obj, &StackedPoint::consensual(m, p), &tol)?;
        println!(
            "[{:+.6}, {:+.6}] {:<26} lambda_min = {:+.4e}",
            p[0],
            p[1],
            v.label.as_str(),
            v.lambda_min.unwrap_or(f64::NAN)
        );
    }

    for p in &points.strict_saddles {
        let x = StackedPoint::consensual(m, p);
        for alpha in [0.01, 0.05, 0.2] {
            let rho = spectral_radius(&t_map_jacobian(&obj, &x, alpha, &pair)?)?;
            let cert = lemma4_certificate(&obj, &x, alpha, &pair)?;
            println!(
                "alpha {alpha:<5} spectral radius {rho:.8} (excess {:.2e}), det(V - aH) = {:.3e}, invertible {}",
                rho - 1.0,
                cert.det,
                cert.invertible
            );
        }
    }
    Ok(())
}
