//! Command-line surface: BRS computation, benchmark harnesses, closed-loop
//! simulation, and built-in case export.
//!
//! Exit codes: 0 ok, 2 schema/usage error, 3 infeasible or empty result,
//! 4 solver failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zonoreach::bench::{
    run_minkdiff_bench, run_reduce_bench, summarize_ratios, write_minkdiff_results_csv,
    write_minkdiff_timings_csv, write_ratios_csv, write_reduce_results_csv,
    write_reduce_timings_csv, MinkdiffBenchParams, ReduceBenchParams,
};
use zonoreach::brs::{compute_brs, BrsSequence};
use zonoreach::cases::{builtin_case, builtin_case_names};
use zonoreach::config::Config;
use zonoreach::control::{Controller, DisturbancePolicy};
use zonoreach::error::Error;
use zonoreach::geometry::volume_exact;
use zonoreach::problem::{zonotope_to_json, BuiltProblem, ProblemFile};

#[derive(Parser)]
#[command(
    name = "zonoreach",
    about = "Zonotopic backward reachable sets for uncertain linear systems",
    version
)]
struct Cli {
    /// Override the seed from the problem file / default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the feasibility tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for benchmark commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the under/over BRS chains of a problem and write them out.
    Brs {
        /// Problem file (JSON, schema zonoreach/1).
        #[arg(long, conflicts_with = "case")]
        problem: Option<PathBuf>,
        /// Built-in case name instead of a problem file.
        #[arg(long)]
        case: Option<String>,
        /// Override the horizon.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Random-instance comparison of the two difference under-approximations.
    MinkdiffBench {
        /// State dimensions to sample from, e.g. 2,3,4.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        dims: Vec<usize>,
        /// Template orders to sample from, e.g. 1.5,2,4.
        #[arg(long, value_delimiter = ',', default_value = "1.5,2,3")]
        orders: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Single-merge order-reduction quality over random zonotopes.
    ReduceBench {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1.5,2,4,6,8")]
        orders: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Closed-loop simulations from sampled initial states.
    Simulate {
        #[arg(long, conflicts_with = "case")]
        problem: Option<PathBuf>,
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// zero | uniform | vertex
        #[arg(long, default_value = "uniform")]
        policy: String,
        /// Override the horizon.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Write a built-in case as a problem file.
    Case {
        /// lateral | longitudinal | integrator10d | demo1d
        #[arg(long)]
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Schema(_) | Error::InvalidArgument(_) | Error::DimMismatch(_)
                | Error::NonFinite(_) => 2,
                Error::EmptyUnderApprox(_) | Error::Infeasible(_) => 3,
                Error::SolverFailure(_) => 4,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = Config::default();
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument("--tol must be positive".into()));
        }
        cfg.feas_tol = t;
    }
    fs::create_dir_all(&cli.out)?;

    match &cli.cmd {
        Cmd::Brs {
            problem,
            case,
            horizon,
        } => {
            let built = load_problem(problem.as_deref(), case.as_deref(), &cli, &cfg)?;
            let horizon = horizon.unwrap_or(built.horizon);
            cmd_brs(&built, horizon, &cli.out, &cfg)
        }
        Cmd::MinkdiffBench {
            dims,
            orders,
            count,
        } => with_pool(cli.threads, || {
            let params = MinkdiffBenchParams {
                dims: dims.clone(),
                orders: orders.clone(),
                count: *count,
                seed: cli.seed.unwrap_or(0),
            };
            let out = run_minkdiff_bench(&params, &cfg)?;
            write_file(&cli.out.join("results.csv"), |w| {
                write_minkdiff_results_csv(w, &out.records)
            })?;
            write_file(&cli.out.join("ratios.csv"), |w| {
                write_ratios_csv(w, &out.ratios)
            })?;
            write_file(&cli.out.join("timings.csv"), |w| {
                write_minkdiff_timings_csv(w, &out.records)
            })?;
            match summarize_ratios(&out.ratios) {
                Some(s) => println!(
                    "{} instances, {} ratio samples: r2 mean {:.4} std {:.4} min {:.4} max {:.4}, \
                     {:.2}% in [0.95,1.05]",
                    params.count,
                    s.count,
                    s.mean,
                    s.std,
                    s.min,
                    s.max,
                    100.0 * s.within_tight_band
                ),
                None => println!("{} instances, no ratio samples", params.count),
            }
            Ok(())
        }),
        Cmd::ReduceBench {
            dims,
            orders,
            count,
        } => with_pool(cli.threads, || {
            let params = ReduceBenchParams {
                dims: dims.clone(),
                orders: orders.clone(),
                count: *count,
                seed: cli.seed.unwrap_or(0),
            };
            let records = run_reduce_bench(&params, &cfg)?;
            write_file(&cli.out.join("results.csv"), |w| {
                write_reduce_results_csv(w, &records)
            })?;
            write_file(&cli.out.join("timings.csv"), |w| {
                write_reduce_timings_csv(w, &records)
            })?;
            let with_ratio: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
            let mean = with_ratio.iter().sum::<f64>() / with_ratio.len().max(1) as f64;
            println!(
                "{} merges, {} with volume ratio, mean ratio {:.4}",
                records.len(),
                with_ratio.len(),
                mean
            );
            Ok(())
        }),
        Cmd::Simulate {
            problem,
            case,
            trials,
            policy,
            horizon,
        } => {
            let built = load_problem(problem.as_deref(), case.as_deref(), &cli, &cfg)?;
            let horizon = horizon.unwrap_or(built.horizon);
            let policy = match policy.as_str() {
                "zero" => DisturbancePolicy::Zero,
                "uniform" => DisturbancePolicy::Uniform,
                "vertex" => DisturbancePolicy::VertexAdversarial,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown policy \"{other}\" (want zero | uniform | vertex)"
                    )))
                }
            };
            cmd_simulate(&built, horizon, *trials, policy, &cli.out, &cfg)
        }
        Cmd::Case { name } => {
            let pf = builtin_case(name)?;
            let path = cli.out.join(format!("{name}.json"));
            pf.save(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn load_problem(
    problem: Option<&Path>,
    case: Option<&str>,
    cli: &Cli,
    cfg: &Config,
) -> Result<BuiltProblem, Error> {
    let mut pf = match (problem, case) {
        (Some(path), None) => ProblemFile::load(path)?,
        (None, Some(name)) => builtin_case(name)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "pass exactly one of --problem or --case (cases: {})",
                builtin_case_names().join(" | ")
            )))
        }
    };
    if let Some(seed) = cli.seed {
        pf.options.seed = seed;
    }
    if let Some(tol) = cli.tol {
        pf.options.tol = Some(zonoreach::problem::Dec(tol));
    }
    pf.build(cfg)
}

fn with_pool(
    threads: usize,
    f: impl FnOnce() -> Result<(), Error> + Send,
) -> Result<(), Error> {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("--threads: {e}")))?;
    pool.install(f)
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<(), Error> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    f(&mut w)?;
    Ok(())
}

fn cmd_brs(built: &BuiltProblem, horizon: usize, out: &Path, cfg: &Config) -> Result<(), Error> {
    let t0 = std::time::Instant::now();
    let seq = compute_brs(&built.sys, &built.target, horizon, &built.opts, cfg)?;
    let total_ms = t0.elapsed().as_secs_f64() * 1e3;

    for (k, z) in seq.under.iter().enumerate() {
        fs::write(out.join(format!("under_{k:03}.json")), zonotope_to_json(z)?)?;
    }
    for (k, z) in seq.over.iter().enumerate() {
        fs::write(out.join(format!("over_{k:03}.json")), zonotope_to_json(z)?)?;
    }
    write_chain_timing(&out.join("timing.csv"), &seq, true, cfg)?;
    write_chain_timing(&out.join("over_timing.csv"), &seq, false, cfg)?;

    let summary = serde_json::json!({
        "horizon": horizon,
        "under_steps": seq.under.len() - 1,
        "over_steps": seq.over.len() - 1,
        "under_truncation": seq.truncation.as_ref().map(|t| {
            serde_json::json!({"first_empty_step": t.first_empty_step, "reason": t.reason})
        }),
        "over_truncation": seq.over_truncation.as_ref().map(|t| {
            serde_json::json!({"first_empty_step": t.first_empty_step, "reason": t.reason})
        }),
        "total_ms": total_ms,
    });
    fs::write(
        out.join("summary.json"),
        format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;
    println!(
        "under chain: {} steps{}; over chain: {} steps; wrote {}",
        seq.under.len() - 1,
        seq.truncation
            .as_ref()
            .map(|t| format!(" (empty from step {})", t.first_empty_step))
            .unwrap_or_default(),
        seq.over.len() - 1,
        out.display()
    );
    // an under chain that never left the target set is an empty result
    if seq.under.len() == 1 && horizon > 0 {
        return Err(Error::EmptyUnderApprox(
            "the first backward step is already infeasible".into(),
        ));
    }
    Ok(())
}

fn write_chain_timing(
    path: &Path,
    seq: &BrsSequence,
    under: bool,
    cfg: &Config,
) -> Result<(), Error> {
    write_file(path, |w| {
        use std::io::Write;
        writeln!(w, "k,cpu_ms,order,volume")?;
        let chain = if under { &seq.under } else { &seq.over };
        for meta in &seq.steps {
            let (ms, ord) = if under {
                (meta.under_ms, meta.order_under)
            } else {
                (meta.over_ms, meta.order_over)
            };
            let (Some(ms), Some(ord)) = (ms, ord) else {
                continue;
            };
            write!(w, "{},{},{}", meta.k, ms, ord)?;
            let vol = chain
                .get(meta.k)
                .filter(|z| z.dim() <= 4)
                .and_then(|z| volume_exact(z, cfg.volume_comb_cap).ok());
            match vol {
                Some(v) => writeln!(w, ",{v}")?,
                None => writeln!(w, ",")?,
            }
        }
        Ok(())
    })
}

fn cmd_simulate(
    built: &BuiltProblem,
    horizon: usize,
    trials: usize,
    policy: DisturbancePolicy,
    out: &Path,
    cfg: &Config,
) -> Result<(), Error> {
    let seq = compute_brs(&built.sys, &built.target, horizon, &built.opts, cfg)?;
    if seq.horizon() == 0 {
        return Err(Error::EmptyUnderApprox(
            "no usable controller horizon: the under chain is empty".into(),
        ));
    }
    if let Some(t) = &seq.truncation {
        println!(
            "note: under chain truncated at step {}; simulating over {} steps",
            t.first_empty_step,
            seq.horizon()
        );
    }
    let ctrl = Controller::new(&built.sys, &seq);
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(built.seed);
    let deepest = &seq.under[seq.horizon()];

    let mut successes = 0usize;
    let mut rows = String::from("trial,success,replay_error\n");
    for trial in 0..trials {
        let x0 = deepest.sample_point(&mut rng);
        let traj = ctrl.simulate(&x0, policy, built.seed.wrapping_add(trial as u64), cfg)?;
        if traj.success {
            successes += 1;
        }
        rows.push_str(&format!(
            "{},{},{}\n",
            trial,
            traj.success,
            traj.replay_error(&built.sys)
        ));
        let in_target: Vec<bool> = traj
            .states
            .iter()
            .map(|x| seq.under[0].contains_point(x, cfg).unwrap_or(false))
            .collect();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, &in_target)?;
        fs::write(out.join(format!("traj_{trial:03}.csv")), buf)?;
    }
    fs::write(out.join("trials.csv"), rows)?;
    println!(
        "{successes}/{trials} trials reached the target over {} steps",
        seq.horizon()
    );
    Ok(())
}
