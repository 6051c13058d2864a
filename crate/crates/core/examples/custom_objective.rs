//! Plugging in a user-defined local objective: agents share a double-well
//! but each sees a shifted linear tilt.
//!
//!     cargo run --example custom_objective

use std::sync::Arc;

use extra_lab::analysis::{classify_point, find_stationary_points, StationarySearch, Tolerances};
use extra_lab::graph::circulant_regular_graph;
use extra_lab::mixing::{metropolis_weights, MixingPair};
use extra_lab::objectives::{LocalObjective, ObjectiveSet};
use extra_lab::point::StackedPoint;
use extra_lab::solvers::{extra_init, run, ExtraForm};
use nalgebra::DMatrix;

/// `¼(x² - 1)² + c·x` on the real line.
#[derive(Debug)]
struct TiltedWell {
    c: f64,
}

impl LocalObjective for TiltedWell {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.25 * (x[0] * x[0] - 1.0).powi(2) + self.c * x[0]
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0] * (x[0] * x[0] - 1.0) + self.c;
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, 3.0 * x[0] * x[0] - 1.0))
    }

    fn lipschitz(&self, radius: f64) -> f64 {
        (3.0 * radius * radius - 1.0).max(1.0)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 10;
    let g = circulant_regular_graph(m, 4)?;
    let pair = MixingPair::new(metropolis_weights(&g)?, 0.5, &g)?;
    // Tilts cancel on average, so the sum keeps wells at ±1.
    let locals: Vec<Arc<dyn LocalObjective>> =
        (0..m).map(|i| Arc::new(TiltedWell { c: 0.3 * (i as f64 - 4.5) / 4.5 }) as Arc<dyn LocalObjective>).collect();
    let obj = ObjectiveSet::new(locals)?;

    let points = find_stationary_points(&obj, &StationarySearch::default())?;
    println!("minimizers {:?}, saddles {:?}", points.second_order, points.strict_saddles);

    let alpha = 0.5 * pair.lambda_min_v() / obj.lipschitz_bound(2.0)?;
    let x0 = StackedPoint::new(m, 1, (0..m).map(|i| 0.05 * (i as f64 - 4.0)).collect()).unwrap();
    let mut st = extra_init(x0, alpha, &pair, &obj, ExtraForm::Jacobi)?;
    let trace = run(&mut st, &pair, &obj, 3000, |_, x, _| x.average_block()[0]).map_err(|f| f.error)?;
    println!("alpha {alpha:.4}; average after 3000 rounds {:.8}", trace.last().unwrap());
    let x = extra_lab::solvers::Solver::iterate(&st).clone();
    println!("label {}", classify_point(&obj, &x, &Tolerances::default())?.label.as_str());
    Ok(())
}
