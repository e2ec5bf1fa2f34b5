//! Experiment runner: optimization runs, sequence/size sweeps, rate
//! studies and the built-in verification suite, all emitting plot-ready
//! CSV traces plus a manifest of the resolved configuration.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use output::{fmt_f64, write_manifest, write_trace};
use quasivi::diagnostics;
use quasivi::estimators::Estimator;
use quasivi::families::VarParams;
use quasivi::lds::SourceKind;
use quasivi::models::{hierarchical_lr, multilevel_poisson, toy_gaussian, ModelInstance};
use quasivi::optim::{run, OptimConfig, RunConfig, SampleSchedule};
use quasivi::selftest;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "quasivi",
    about = "Low-discrepancy gradient estimators for variational inference",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single optimization experiment and write its CSV trace.
    Run(RunArgs),
    /// Run the cross product of sequence kinds and sample sizes.
    Sweep(SweepArgs),
    /// Convergence-rate studies (integration error, gradient variance).
    Rates(RatesArgs),
    /// Run the verification suite and write its results as CSV.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Configuration file (flat `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: toy | hier-lr | multilevel-poisson.
    #[arg(long)]
    model: Option<String>,
    /// Estimator: score | reparam.
    #[arg(long)]
    estimator: Option<String>,
    /// Sequence kind: mc | qmc-sobol | rqmc-shift | rqmc-scramble.
    #[arg(long)]
    seq: Option<String>,
    /// Fixed per-iteration sample count.
    #[arg(long)]
    n: Option<usize>,
    /// Optimizer: sgd | adam.
    #[arg(long)]
    opt: Option<String>,
    /// Step size.
    #[arg(long)]
    alpha: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    /// Extra `key=value` overrides for any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Comma-separated sequence kinds to sweep.
    #[arg(long, default_value = "mc,rqmc-scramble")]
    seqs: String,
    /// Comma-separated sample sizes to sweep.
    #[arg(long, default_value = "10,50")]
    ns: String,
    /// Output directory for the sweep cells.
    #[arg(long, default_value = "sweep_out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    /// Study: integration | gradvar.
    #[arg(long, default_value = "integration")]
    target: String,
    /// Dimension of the integration study.
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Randomizations (integration) or resamples (gradvar) per point.
    #[arg(long, default_value_t = 100)]
    replications: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, default_value = "rates.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// Master seed folded into every check.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory for `selftest.csv`.
    #[arg(long, default_value = "selftest_out")]
    out: PathBuf,
    /// Comma-separated subset of check ids (default: all).
    #[arg(long)]
    criteria: Option<String>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => fallible(cmd_run(args)),
        Command::Sweep(args) => fallible(cmd_sweep(args)),
        Command::Rates(args) => fallible(cmd_rates(args)),
        Command::Selftest(args) => cmd_selftest(args),
    }
}

fn fallible(res: Result<(), String>) -> ExitCode {
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_config(common: &ConfigArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &common.model {
        cfg.set("model", v)?;
    }
    if let Some(v) = &common.estimator {
        cfg.set("estimator", v)?;
    }
    if let Some(v) = &common.seq {
        cfg.set("sequence", v)?;
    }
    if let Some(v) = common.n {
        cfg.set("n", &v.to_string())?;
    }
    if let Some(v) = &common.opt {
        cfg.set("optimizer", v)?;
    }
    if let Some(v) = common.alpha {
        cfg.set("alpha", &v.to_string())?;
    }
    if let Some(v) = common.iters {
        cfg.set("iters", &v.to_string())?;
    }
    if let Some(v) = common.seed {
        cfg.set("seed", &v.to_string())?;
    }
    if let Some(v) = &common.out {
        cfg.set("out", v)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn build_model(cfg: &ExperimentConfig) -> Result<ModelInstance, String> {
    let model = match cfg.model.as_str() {
        "toy" => toy_gaussian(cfg.toy_dim),
        "hier-lr" => hierarchical_lr(cfg.hlr_groups, cfg.hlr_covariates, cfg.model_seed),
        "multilevel-poisson" => {
            multilevel_poisson(cfg.mlp_groups, cfg.mlp_precincts, cfg.model_seed)
        }
        other => Err(quasivi::Error::InvalidConfig(format!(
            "unknown model `{other}` (expected toy, hier-lr or multilevel-poisson)"
        ))),
    };
    model.map_err(|e| e.to_string())
}

fn build_schedule(cfg: &ExperimentConfig) -> Result<SampleSchedule, String> {
    let schedule = match cfg.schedule.as_str() {
        "fixed" => SampleSchedule::Fixed(cfg.n),
        "geometric" => SampleSchedule::Geometric {
            n_floor: cfg.n_floor,
            tau: cfg.tau,
        },
        other => return Err(format!("unknown schedule `{other}`")),
    };
    schedule.validate().map_err(|e| e.to_string())?;
    Ok(schedule)
}

fn execute_run(cfg: &ExperimentConfig) -> Result<(), String> {
    let model = build_model(cfg)?;
    let spec = model.default_family();
    let init = spec.init_params(cfg.init_mean, cfg.init_rho);
    let estimator = Estimator {
        kind: cfg.estimator,
        entropy: cfg.entropy,
        freeze_scales: cfg.fixed_scale,
    };
    let optim = OptimConfig {
        algorithm: cfg.optimizer,
        step_size: cfg.alpha,
        beta1: cfg.beta1,
        beta2: cfg.beta2,
        adam_eps: cfg.adam_eps,
        max_iters: cfg.iters,
        stop_tol: cfg.stop_tol,
    };
    let run_cfg = RunConfig {
        estimator,
        source: cfg.sequence,
        optim,
        schedule: build_schedule(cfg)?,
        master_seed: cfg.seed,
        snapshot_every: cfg.var_every,
        skip: cfg.skip,
    };
    let result = run(&model, &spec, &init, &run_cfg).map_err(|e| e.to_string())?;

    let mut trvar = BTreeMap::new();
    if cfg.var_every > 0 {
        for rec in &result.trace {
            if let Some(snapshot) = &rec.lambda_snapshot {
                let report = diagnostics::grad_variance(
                    &model,
                    &spec,
                    &VarParams::new(snapshot.clone()),
                    &estimator,
                    cfg.sequence,
                    rec.n_t,
                    cfg.var_resamples,
                    quasivi::derive_seed(cfg.seed, rec.t as u64 ^ 0xD1A6),
                )
                .map_err(|e| e.to_string())?;
                trvar.insert(rec.t, report.trace_of_variance);
            }
        }
    }

    let out = Path::new(&cfg.out);
    write_trace(out, &result.trace, &trvar, cfg.no_timing).map_err(|e| e.to_string())?;
    write_manifest(&out.with_extension("manifest"), &cfg.serialize())
        .map_err(|e| e.to_string())?;

    let last = result.trace.last();
    println!(
        "wrote {} ({} iterations, {} total samples, final elbo estimate {})",
        out.display(),
        result.trace.len(),
        result.total_samples,
        last.map(|r| fmt_f64(r.elbo_est)).unwrap_or_default()
    );
    if let Some(reason) = &result.abort {
        return Err(format!("run aborted: {reason}"));
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), String> {
    let cfg = resolve_config(&args.common)?;
    execute_run(&cfg)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), String> {
    let base = resolve_config(&args.common)?;
    let seqs: Vec<&str> = args.seqs.split(',').filter(|s| !s.is_empty()).collect();
    let ns: Vec<usize> = args
        .ns
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("bad sample size `{s}`")))
        .collect::<Result<_, _>>()?;
    if seqs.is_empty() || ns.is_empty() {
        return Err("sweep needs at least one sequence kind and one sample size".into());
    }
    for seq in &seqs {
        for &n in &ns {
            let mut cfg = base.clone();
            cfg.set("sequence", seq)?;
            cfg.set("n", &n.to_string())?;
            let cell = args.out_dir.join(format!("sweep_{seq}_n{n}.csv"));
            cfg.out = cell.to_string_lossy().into_owned();
            execute_run(&cfg)?;
        }
    }
    Ok(())
}

fn cmd_rates(args: RatesArgs) -> Result<(), String> {
    match args.target.as_str() {
        "integration" => {
            let ns: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
            let rows = diagnostics::integration_rates(args.d, &ns, args.replications, args.seed)
                .map_err(|e| e.to_string())?;
            let mut csv = String::from("n,mc_var,rqmc_var,qmc_abs_err,mc_rmse\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.n,
                    fmt_f64(r.mc_var),
                    fmt_f64(r.rqmc_var),
                    fmt_f64(r.qmc_abs_err),
                    fmt_f64(r.mc_rmse)
                ));
            }
            std::fs::write(&args.out, csv).map_err(|e| e.to_string())?;
            let mc: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mc_var)).collect();
            let rq: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.rqmc_var)).collect();
            let mc_fit = diagnostics::rate_fit(&mc).map_err(|e| e.to_string())?;
            let rq_fit = diagnostics::rate_fit(&rq).map_err(|e| e.to_string())?;
            println!(
                "integration d={}: mc slope {:.3} (r2 {:.3}), rqmc-scramble slope {:.3} (r2 {:.3}); wrote {}",
                args.d,
                mc_fit.slope,
                mc_fit.r_squared,
                rq_fit.slope,
                rq_fit.r_squared,
                args.out.display()
            );
        }
        "gradvar" => {
            let model = toy_gaussian(2).map_err(|e| e.to_string())?;
            let spec = model.default_family();
            let params = spec.init_params(0.1, 0.0);
            let estimator =
                Estimator::new(quasivi::estimators::EstimatorKind::Reparam).with_frozen_scales(true);
            let ns: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
            let mut csv = String::from("n,mc_trvar,rqmc_trvar\n");
            let mut mc_pts = Vec::new();
            let mut rq_pts = Vec::new();
            for &n in &ns {
                let mc = diagnostics::grad_variance(
                    &model,
                    &spec,
                    &params,
                    &estimator,
                    SourceKind::Mc,
                    n,
                    args.replications,
                    quasivi::derive_seed(args.seed, n as u64),
                )
                .map_err(|e| e.to_string())?;
                let rq = diagnostics::grad_variance(
                    &model,
                    &spec,
                    &params,
                    &estimator,
                    SourceKind::RqmcScramble,
                    n,
                    args.replications,
                    quasivi::derive_seed(args.seed, 1000 + n as u64),
                )
                .map_err(|e| e.to_string())?;
                csv.push_str(&format!(
                    "{},{},{}\n",
                    n,
                    fmt_f64(mc.trace_of_variance),
                    fmt_f64(rq.trace_of_variance)
                ));
                mc_pts.push((n as f64, mc.trace_of_variance));
                rq_pts.push((n as f64, rq.trace_of_variance));
            }
            std::fs::write(&args.out, csv).map_err(|e| e.to_string())?;
            let mc_fit = diagnostics::rate_fit(&mc_pts).map_err(|e| e.to_string())?;
            let rq_fit = diagnostics::rate_fit(&rq_pts).map_err(|e| e.to_string())?;
            println!(
                "gradient variance: mc slope {:.3}, rqmc-scramble slope {:.3}; wrote {}",
                mc_fit.slope,
                rq_fit.slope,
                args.out.display()
            );
        }
        other => return Err(format!("unknown rates target `{other}`")),
    }
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> ExitCode {
    let ids: Vec<usize> = match &args.criteria {
        None => (1..=selftest::CRITERION_COUNT).collect(),
        Some(list) => match list
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(ids)
                if !ids.is_empty()
                    && ids.iter().all(|&i| (1..=selftest::CRITERION_COUNT).contains(&i)) =>
            {
                ids
            }
            _ => {
                eprintln!("error: --criteria expects comma-separated ids in 1..=10");
                return ExitCode::FAILURE;
            }
        },
    };

    let mut csv = String::from("criterion,name,passed,detail\n");
    let mut all_passed = true;
    for id in ids {
        let started = Instant::now();
        let r = selftest::run_criterion(id, args.seed);
        println!(
            "{} [{:2}] {} ({:.1}s): {}",
            r.status(),
            r.id,
            r.name,
            started.elapsed().as_secs_f64(),
            r.detail
        );
        all_passed &= r.passed;
        csv.push_str(&format!("{},{},{},{}\n", r.id, r.name, r.passed, r.detail));
    }
    if let Err(e) = std::fs::create_dir_all(&args.out)
        .and_then(|_| std::fs::write(args.out.join("selftest.csv"), csv))
    {
        eprintln!("error: cannot write results: {e}");
        return ExitCode::FAILURE;
    }
    println!("results written to {}", args.out.join("selftest.csv").display());
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
