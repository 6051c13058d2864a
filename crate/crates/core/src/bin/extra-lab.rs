use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use extra_lab::harness::{
    build_instance, emit_fig1, emit_monte_carlo, emit_outputs, load_config, reproduce_fig1, run_monte_carlo,
    run_single, ExperimentConfig, HarnessError,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    /// Parse the config and build graph, mixing pair and objective.
    Validate,
    /// One solver run; writes metrics.csv, meta.json, chart.svg.
    Run,
    /// Monte-Carlo saddle-avoidance study; writes summary.json, trials.csv.
    Montecarlo,
    /// EXTRA vs DGD distance-to-minimizer comparison.
    Fig1,
    /// Print spectral quantities and step-size bounds.
    Bounds,
}

#[derive(Debug, Parser)]
#[command(name = "extra-lab", version, about = "EXTRA decentralized optimization laboratory")]
struct Cli {
    verb: Verb,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the init seed, or the Monte-Carlo master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    overwrite: bool,
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let mut cfg: ExperimentConfig = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.init.seed = seed;
        if let Some(mc) = cfg.monte_carlo.as_mut() {
            mc.master_seed = seed;
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    match cli.verb {
        Verb::Validate => {
            let inst = build_instance(&cfg)?;
            println!(
                "ok: m = {}, |E| = {}, n = {}, lambda1(P) = {:.12}, stationary points found: {} second-order, {} strict saddles",
                inst.graph.m(),
                inst.graph.edge_count(),
                inst.objective.n(),
                inst.bounds.lambda1_p,
                inst.targets.second_order.len(),
                inst.targets.strict_saddles.len()
            );
        }
        Verb::Bounds => {
            let b = build_instance(&cfg)?.bounds;
            println!("lambda1(P)      {:.16e}", b.lambda1_p);
            println!("lambda_min(V)   {:.16e}", b.lambda_min_v);
            println!("L_F (r = {})   {:.16e}", b.lipschitz_radius, b.l_f);
            println!("thm1 bound      {:.16e}", b.thm1);
            println!("thm2 bound      {:.16e}", b.thm2);
        }
        Verb::Run => {
            let record = match run_single(&cfg) {
                Ok(r) => r,
                Err(HarnessError::Runtime { message, record: Some(record) }) => {
                    emit_outputs(&record, &out, cli.overwrite)?;
                    return Err(HarnessError::Runtime { message, record: None });
                }
                Err(e) => return Err(e),
            };
            emit_outputs(&record, &out, cli.overwrite)?;
            if let (Some(last), Some(v)) = (record.series.last(), record.verdict) {
                println!(
                    "k = {}: consensus error {:.3e}, avg gradient norm {:.3e}, verdict {}",
                    last.k,
                    last.consensus_error,
                    last.avg_grad_norm,
                    v.label.as_str()
                );
            }
            for w in &record.meta.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out.display());
        }
        Verb::Montecarlo => {
            let s = run_monte_carlo(&cfg)?;
            emit_monte_carlo(&s, &out, cli.overwrite)?;
            for (label, count) in &s.counts {
                println!("{label:<26} {count}");
            }
            println!("saddle-trapped {}/{}, second-order converged {}/{}", s.saddle_trapped, s.trials, s.second_order_converged, s.trials);
            println!("wrote {}", out.display());
        }
        Verb::Fig1 => {
            let r = reproduce_fig1(&cfg)?;
            emit_fig1(&r, &out, cli.overwrite)?;
            let last = |s: &[extra_lab::analysis::MetricSample]| s.last().and_then(|x| x.dist_to_targets).unwrap_or(f64::NAN);
            println!("final distance of agent {}: EXTRA {:.6e}, DGD {:.6e}, near-saddle start {:.6e}", r.agent, last(&r.extra), last(&r.dgd), last(&r.bad));
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
