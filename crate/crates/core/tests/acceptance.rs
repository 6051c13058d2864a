//! One line per acceptance criterion. Exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::sync::Arc;
use std::time::Instant;

use common::{fd_errors, random_convex_quadratics, random_instance_pair, shipped_objectives};
use extra_lab::analysis::{
    cesaro_rates, classify_point, find_stationary_points, lemma4_certificate, t_map_jacobian, StationarityLabel,
    StationarySearch, Tolerances,
};
use extra_lab::graph::{circulant_regular_graph, complete_graph, ring_graph, NetworkGraph};
use extra_lab::harness::{
    emit_monte_carlo, emit_outputs, parse_config, reproduce_fig1, run_monte_carlo, run_single, AlphaMode,
    ExperimentConfig, Fig1Result, InitDistribution,
};
use extra_lab::linalg::spectral_radius;
use extra_lab::mixing::{lazify, metropolis_weights, MixingPair};
use extra_lab::objectives::{generate_bilinear_logistic, LocalObjective, ObjectiveSet, Quadratic};
use extra_lab::point::StackedPoint;
use extra_lab::rng::Stream;
use extra_lab::solvers::{extra_init, extra_step, ExtraForm, Network, Solver};
use nalgebra::DMatrix;

const K20_BILINEAR: &str = include_str!("../configs/k20_bilinear.toml");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn k20_config() -> ExperimentConfig {
    parse_config(K20_BILINEAR).expect("shipped config parses")
}

fn k20() -> MixingPair {
    let g = complete_graph(20).unwrap();
    MixingPair::new(metropolis_weights(&g).unwrap(), 0.5, &g).unwrap()
}

fn gaussian_point(s: &mut Stream, m: usize, n: usize) -> StackedPoint {
    StackedPoint::new(m, n, (0..m * n).map(|_| s.standard_normal()).collect()).unwrap()
}

fn within(limit_s: f64, started: Instant) -> (bool, f64) {
    let t = started.elapsed().as_secs_f64();
    (t < limit_s, t)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut s = Stream::new(2024, 0);
    let mut worst = 0.0_f64;
    let mut drawn = 0;
    while drawn < 50 {
        let m = 2 + (s.next_u64() % 19) as usize;
        let g = match s.next_u64() % 3 {
            0 if m >= 3 => ring_graph(m).unwrap(),
            1 if m >= 4 => {
                let ds: Vec<usize> = (2..m).filter(|d| (m * d).is_multiple_of(2)).collect();
                circulant_regular_graph(m, ds[(s.next_u64() as usize) % ds.len()]).unwrap()
            }
            _ => complete_graph(m).unwrap(),
        };
        let theta = [0.05, 0.25, 0.5][(s.next_u64() % 3) as usize];
        let beta = [0.0, 0.3][(s.next_u64() % 2) as usize];
        let Ok(pair) = MixingPair::new(lazify(&metropolis_weights(&g).unwrap(), beta).unwrap(), theta, &g) else {
            continue;
        };
        drawn += 1;
        worst = worst.max(pair.lambda1_p());
    }
    let suite = worst < 1.0 - 1e-8;

    let mut closed = true;
    let mut notes = Vec::new();
    let mut root_err = 0.0_f64;
    for m in [2, 5, 20] {
        let g = complete_graph(m).unwrap();
        for theta in [0.05, 0.25, 0.5] {
            let got = MixingPair::new(metropolis_weights(&g).unwrap(), theta, &g).unwrap().lambda1_p();
            // Largest root modulus of λ² - λ + θ, the 2x2 block on the 1-complement.
            let root = if theta >= 0.25 { theta.sqrt() } else { (1.0 + (1.0 - 4.0 * theta).sqrt()) / 2.0 };
            root_err = root_err.max((got - root).abs());
            let err = (got - theta.sqrt()).abs();
            if err > 1e-9 {
                closed = false;
                notes.push(format!("m={m} theta={theta}: {got:.10} vs sqrt(theta) {:.10}", theta.sqrt()));
            }
        }
    }
    notes.dedup_by(|a, b| a.split_once(':').map(|p| p.1.to_string()) == b.split_once(':').map(|p| p.1.to_string()));
    let (fast, t) = within(10.0, started);
    outcome(
        suite && closed && fast,
        format!(
            "50 pairs max lambda1(P) = {worst:.6}; sqrt(theta) closed form {}{}; root-modulus formula max error {root_err:.1e}; {t:.2}s",
            if closed { "holds" } else { "off at " },
            notes.join("; ")
        ),
    )
}

struct Case {
    graph: NetworkGraph,
    pair: MixingPair,
    obj: ObjectiveSet,
    x0: StackedPoint,
    alpha: f64,
}

fn random_case(seed: u64, topology: Option<usize>) -> Case {
    let mut s = Stream::new(seed, 0);
    let (graph, pair) = match topology {
        None => random_instance_pair(&mut s, 2, 10),
        Some(t) => loop {
            let m = 4 + (s.next_u64() % 7) as usize;
            let g = match t {
                0 => ring_graph(m).unwrap(),
                1 => circulant_regular_graph(m, if m.is_multiple_of(2) { 3 } else { 2 }).unwrap(),
                _ => complete_graph(m).unwrap(),
            };
            let theta = [0.05, 0.25, 0.5][(s.next_u64() % 3) as usize];
            if let Ok(p) = MixingPair::new(metropolis_weights(&g).unwrap(), theta, &g) {
                break (g, p);
            }
        },
    };
    let m = pair.m();
    let obj = if seed.is_multiple_of(2) {
        let n = 1 + (s.next_u64() % 3) as usize;
        random_convex_quadratics(&mut s, m, n)
    } else {
        generate_bilinear_logistic(m, 0.1, seed).unwrap()
    };
    let alpha = (0.9 * pair.lambda_min_v() / obj.lipschitz_bound(3.0).unwrap()).min(0.2);
    let x0 = gaussian_point(&mut s, m, obj.n());
    Case { graph, pair, obj, x0, alpha }
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for seed in 0..20 {
        let c = random_case(seed, None);
        let mut states: Vec<_> =
            ExtraForm::ALL.iter().map(|&f| extra_init(c.x0.clone(), c.alpha, &c.pair, &c.obj, f).unwrap()).collect();
        for _ in 0..100 {
            for st in states.iter_mut() {
                extra_step(st, &c.pair, &c.obj).unwrap();
            }
            for st in &states[1..] {
                worst = worst.max(st.iterate().max_abs_diff(states[0].iterate()));
            }
        }
    }
    let (fast, t) = within(10.0, started);
    outcome(worst < 1e-9 && fast, format!("max deviation {worst:.2e} over 20 instances x 100 steps; {t:.2}s"))
}

fn criterion_3() -> Outcome {
    let g = NetworkGraph::from_edges(1, &[]).unwrap();
    let pair = MixingPair::new(DMatrix::identity(1, 1), 0.5, &g).unwrap();
    let f: Arc<dyn LocalObjective> = Arc::new(Quadratic::new(DMatrix::identity(1, 1), vec![0.0]).unwrap());
    let obj = ObjectiveSet::new(vec![f]).unwrap();
    let alpha = 0.1;
    let mut worst = 0.0_f64;
    for form in ExtraForm::ALL {
        let mut st = extra_init(StackedPoint::consensual(1, &[1.0]), alpha, &pair, &obj, form).unwrap();
        for k in 1..=30 {
            extra_step(&mut st, &pair, &obj).unwrap();
            let want = (1.0 - alpha).powi(k);
            worst = worst.max((st.iterate().as_slice()[0] - want).abs() / want);
        }
    }
    outcome(worst < 1e-12, format!("max relative error {worst:.2e} over 30 steps, all forms"))
}

fn criterion_4() -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    for (name, mode) in [("0.99 x thm1", AlphaMode::TheoreticalThm1), ("0.2", AlphaMode::Fixed(0.2))] {
        let started = Instant::now();
        let mut cfg = k20_config();
        cfg.solver.alpha_mode = mode;
        cfg.solver.iters = 2000;
        let rec = run_single(&cfg).expect("k20 run completes");
        let last = rec.series.last().unwrap();
        let rates = cesaro_rates(&rec.series).unwrap();
        let limits = last.consensus_error < 1e-6 && last.avg_grad_norm < 1e-6;
        let plateau = rates.consensus.partial_sums_bounded && rates.gradient.partial_sums_bounded;
        let slope_ok = |s: f64| (-1.7..=-0.6).contains(&s);
        let slopes = slope_ok(rates.consensus.loglog_slope) && slope_ok(rates.gradient.loglog_slope);
        let (fast, t) = within(30.0, started);
        out.push((
            format!("4 ({name})"),
            outcome(
                limits && plateau && slopes && fast,
                format!(
                    "k=2000 consensus {:.2e}, avg grad {:.2e}; plateau {}/{}; slopes {:.2}/{:.2}; {t:.2}s",
                    last.consensus_error,
                    last.avg_grad_norm,
                    rates.consensus.partial_sums_bounded,
                    rates.gradient.partial_sums_bounded,
                    rates.consensus.loglog_slope,
                    rates.gradient.loglog_slope
                ),
            ),
        ));
    }
    out
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..10u64 {
        let c = random_case(500 + seed, Some(seed as usize % 3));
        let form = ExtraForm::ALL[seed as usize % 3];
        let mut agg = extra_init(c.x0.clone(), c.alpha, &c.pair, &c.obj, form).unwrap();
        let mut net = Network::new(&c.graph, &c.pair, &c.obj, &c.x0, c.alpha, form).unwrap();
        for _ in 0..50 {
            extra_step(&mut agg, &c.pair, &c.obj).unwrap();
            net.round().unwrap();
            worst = worst.max(net.iterate().max_abs_diff(agg.iterate()));
        }
    }
    outcome(worst <= 1e-14, format!("max deviation {worst:.2e} over 10 instances (ring, circulant, complete) x 50 rounds"))
}

fn criterion_6() -> Outcome {
    let pair = k20();
    let obj = generate_bilinear_logistic(20, 0.1, 1).unwrap();
    let points = find_stationary_points(&obj, &StationarySearch::default()).unwrap();
    if points.strict_saddles.is_empty() {
        return outcome(false, "no strict saddle found");
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for p in &points.strict_saddles {
        let x = StackedPoint::consensual(20, p);
        let label = classify_point(&obj, &x, &Tolerances::default()).unwrap().label;
        pass &= label == StationarityLabel::ConsensualStrictSaddle;
        for alpha in [0.01, 0.05, 0.2] {
            let rho = spectral_radius(&t_map_jacobian(&obj, &x, alpha, &pair).unwrap()).unwrap();
            pass &= rho > 1.0 + 1e-8;
            parts.push(format!("alpha {alpha}: rho-1 = {:.2e}", rho - 1.0));
        }
    }
    outcome(pass, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut rejected = Vec::new();
    for seed in 0..20u64 {
        let mut s = Stream::new(300 + seed, 0);
        let (_, pair) = random_instance_pair(&mut s, 2, 10);
        let m = pair.m();
        let obj = if seed % 2 == 0 { generate_bilinear_logistic(m, 0.1, seed).unwrap() } else { random_convex_quadratics(&mut s, m, 2) };
        let alpha = 0.9 * pair.lambda_min_v() / obj.lipschitz_bound(3.0).unwrap();
        let x = StackedPoint::new(m, 2, (0..2 * m).map(|_| s.uniform_in(-1.5, 1.5)).collect()).unwrap();
        let c = lemma4_certificate(&obj, &x, alpha, &pair).unwrap();
        if !c.invertible {
            rejected.push(format!("seed {seed} (m={m}, theta={}, det/scale {:.1e})", pair.theta(), c.det / c.scale));
        }
    }
    let g = complete_graph(2).unwrap();
    let pair = MixingPair::new(DMatrix::from_element(2, 2, 0.5), 0.5, &g).unwrap();
    let quad = |b: f64| Arc::new(Quadratic::new(DMatrix::from_element(1, 1, 5.0), vec![b]).unwrap()) as Arc<dyn LocalObjective>;
    let obj = ObjectiveSet::new(vec![quad(0.0), quad(1.0)]).unwrap();
    let counter = lemma4_certificate(&obj, &StackedPoint::zeros(2, 1), 0.1, &pair).unwrap();
    let pass = rejected.is_empty() && !counter.invertible;
    let random = if rejected.is_empty() {
        "20/20 random instances invertible".to_string()
    } else {
        format!("{}/20 invertible, rejected {}", 20 - rejected.len(), rejected.join(", "))
    };
    outcome(pass, format!("{random}; counterexample det {:.1e} invertible={}", counter.det, counter.invertible))
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let cfg = k20_config();
    let summary = run_monte_carlo(&cfg).expect("monte carlo completes");
    let (fast, t) = within(60.0, started);

    let mut adv = k20_config();
    adv.monte_carlo = None;
    adv.init.distribution = InitDistribution::Point { values: vec![0.0, 0.0] };
    let rec = run_single(&adv).unwrap();
    let stays = rec.final_iterate.as_ref().map(|x| x.max_abs()) == Some(0.0);

    let pass = summary.saddle_trapped == 0 && summary.second_order_converged == summary.trials && stays && fast;
    outcome(
        pass,
        format!(
            "saddle-trapped {}/{}, second-order-converged {}/{}, counts {:?}; exact-saddle start fixed: {stays}; {t:.2}s",
            summary.saddle_trapped, summary.trials, summary.second_order_converged, summary.trials, summary.counts
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for seed in 1..=10u64 {
        let mut cfg = k20_config();
        cfg.init.seed = seed;
        let r = reproduce_fig1(&cfg).expect("fig1 completes");
        let (e, d) = (Fig1Result::final_distance(&r.extra).unwrap(), Fig1Result::final_distance(&r.dgd).unwrap());
        if e < d {
            wins += 1;
        }
        parts.push(format!("{e:.2}<{d:.2}"));
    }
    outcome(wins == 10, format!("EXTRA closer than DGD at k=500 for {wins}/10 seeds [{}]", parts.join(" ")))
}

fn criterion_10() -> Outcome {
    let mut grad = 0.0_f64;
    let mut hess = 0.0_f64;
    for (i, (_, obj)) in shipped_objectives().iter().enumerate() {
        let (g, h) = fd_errors(obj, 40 + i as u64, 5, 3);
        grad = grad.max(g);
        hess = hess.max(h);
    }
    let fd_ok = grad < 1e-5 && hess < 1e-4;

    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = k20_config();
    cfg.solver.iters = 300;
    let run_bytes = |tag: &str| {
        let dir = tmp.path().join(tag);
        emit_outputs(&run_single(&cfg).unwrap(), &dir, false).unwrap();
        fs::read(dir.join("metrics.csv")).unwrap()
    };
    let runs_equal = run_bytes("a") == run_bytes("b");

    let mc_bytes = |threads: Option<usize>, tag: &str| {
        let mut c = k20_config();
        c.solver.iters = 100;
        if let Some(mc) = c.monte_carlo.as_mut() {
            mc.trials = 24;
            mc.threads = threads;
        }
        let dir = tmp.path().join(tag);
        emit_monte_carlo(&run_monte_carlo(&c).unwrap(), &dir, false).unwrap();
        (fs::read(dir.join("summary.json")).unwrap(), fs::read(dir.join("trials.csv")).unwrap())
    };
    let base = mc_bytes(Some(1), "mc1");
    let mc_equal = [(Some(2), "mc2"), (Some(8), "mc8"), (None, "mcauto")].iter().all(|&(t, tag)| mc_bytes(t, tag) == base);

    outcome(
        fd_ok && runs_equal && mc_equal,
        format!(
            "fd gradient {grad:.1e}, Hessian {hess:.1e}; repeated metrics.csv identical: {runs_equal}; Monte Carlo outputs identical at 1/2/8/auto threads: {mc_equal}"
        ),
    )
}

fn main() {
    let mut results: Vec<(String, Outcome)> = vec![
        ("1".into(), criterion_1()),
        ("2".into(), criterion_2()),
        ("3".into(), criterion_3()),
    ];
    results.extend(criterion_4());
    results.push(("5".into(), criterion_5()));
    results.push(("6".into(), criterion_6()));
    results.push(("7".into(), criterion_7()));
    results.push(("8".into(), criterion_8()));
    results.push(("9".into(), criterion_9()));
    results.push(("10".into(), criterion_10()));

    let titles = |id: &str| match id.split(' ').next().unwrap() {
        "1" => "mixing contraction",
        "2" => "form equivalence",
        "3" => "single-agent reduction",
        "4" => "first-order convergence",
        "5" => "locality",
        "6" => "saddle instability",
        "7" => "Jacobian invertibility",
        "8" => "saddle avoidance",
        "9" => "EXTRA vs DGD",
        _ => "numerical hygiene",
    };
    let mut failed = 0;
    for (id, o) in &results {
        println!("{} criterion {id} {}: {}", if o.pass { "PASS" } else { "FAIL" }, titles(id), o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
