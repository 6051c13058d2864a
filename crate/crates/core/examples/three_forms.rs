//! The recurrence, dynamical and Jacobi forms of EXTRA produce the same
//! iterates; DGD with a diminishing step does not reach consensus as fast.
//!
//!     cargo run --example three_forms

use extra_lab::analysis::{avg_gradient_norm, consensus_error};
use extra_lab::graph::ring_graph;
use extra_lab::mixing::{metropolis_weights, MixingPair};
use extra_lab::objectives::generate_bilinear_logistic;
use extra_lab::point::StackedPoint;
use extra_lab::rng::Stream;
use extra_lab::solvers::{dgd_step, extra_init, extra_step, DgdState, ExtraForm, Solver, StepSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 8;
    let g = ring_graph(m)?;
    let pair = MixingPair::new(metropolis_weights(&g)?, 0.5, &g)?;
    let obj = generate_bilinear_logistic(m, 0.1, 3)?;
    let mut s = Stream::new(42, 0);
    let x0 = StackedPoint::new(m, 2, (0..2 * m).map(|_| s.standard_normal()).collect()).unwrap();
    let alpha = 0.2;

    let mut forms: Vec<_> = ExtraForm::ALL
        .iter()
        .map(|&f| extra_init(x0.clone(), alpha, &pair, &obj, f))
        .collect::<Result<_, _>>()?;
    let mut dgd = DgdState::new(x0.clone(), StepSchedule::Diminishing { a: 2.0, b: 1.0 }, &pair, &obj)?;

    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "k", "form gap", "consensus", "avg grad", "dgd consensus");
    for k in 1..=400 {
        for st in forms.iter_mut() {
            extra_step(st, &pair, &obj)?;
        }
        dgd_step(&mut dgd, &pair, &obj)?;
        if k % 50 == 0 {
            let x = forms[0].iterate();
            let gap = forms[1..].iter().map(|f| f.iterate().max_abs_diff(x)).fold(0.0, f64::max);
            println!(
                "{k:>5} {gap:>12.2e} {:>12.3e} {:>12.3e} {:>12.3e}",
                consensus_error(x),
                avg_gradient_norm(&obj, x)?,
                consensus_error(dgd.iterate())
            );
        }
    }
    println!("agent average after 400 rounds: {:?}", forms[1].iterate().average_block());
    Ok(())
}
