//! Agents that only see their own state and their neighbours' messages,
//! checked round by round against the stacked update.
//!
//!     cargo run --example message_passing

use extra_lab::graph::ring_graph;
use extra_lab::mixing::{metropolis_weights, MixingPair};
use extra_lab::objectives::generate_bilinear_logistic;
use extra_lab::point::StackedPoint;
use extra_lab::rng::Stream;
use extra_lab::solvers::{extra_init, extra_step, neighbor_view_step, ExtraForm, Network, Solver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 5;
    let g = ring_graph(m)?;
    let pair = MixingPair::new(metropolis_weights(&g)?, 0.5, &g)?;
    let obj = generate_bilinear_logistic(m, 0.1, 3)?;
    let mut s = Stream::new(1, 0);
    let x0 = StackedPoint::new(m, 2, (0..2 * m).map(|_| s.standard_normal()).collect()).unwrap();

    let mut net = Network::new(&g, &pair, &obj, &x0, 0.2, ExtraForm::Recurrence)?;
    let mut agg = extra_init(x0.clone(), 0.2, &pair, &obj, ExtraForm::Recurrence)?;
    let mut sent = 0;
    for _ in 0..100 {
        sent += net.round()?;
        extra_step(&mut agg, &pair, &obj)?;
    }
    println!("{} edges, {sent} messages in 100 rounds", g.edge_count());
    println!("max gap to the stacked update: {:e}", net.iterate().max_abs_diff(agg.iterate()));
    for (i, a) in net.agents().iter().enumerate() {
        println!("agent {} x = [{:.6}, {:.6}]", i + 1, a.x[0], a.x[1]);
    }

    // Drop agent 1's message from agent 3's inbox.
    let view = &net.views()[2];
    let inbox: Vec<_> = view.neighbors().iter().filter(|&&j| j != 1).map(|&j| net.agents()[j].outgoing(j)).collect();
    match neighbor_view_step(view, obj.local(2), ExtraForm::Recurrence, 0.2, &net.agents()[2], &inbox) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("incomplete inbox: {e}"),
    }
    Ok(())
}
