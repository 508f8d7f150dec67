//! Command-line harness around the library: dataset generation and
//! ingestion, (proximal-)SGD training with metric emission, randomized
//! verification suites for the proximal mappings, prox wall-time
//! benchmarks, and PGD robustness evaluation.
//!
//! Exit codes: 0 on success, 1 when a verification suite reports
//! violations, 2 on usage or I/O errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pathprox_cli::dataset::{load_csv, write_csv, Split};
use pathprox_cli::weights;

use pathprox::attack::{robust_error, AttackConfig};
use pathprox::checks::{self, Fault};
use pathprox::model::{
    classification_error, synthetic_blobs, ActivationKind, LossKind,
};
use pathprox::optimizer::{run_stochastic, Method, Regularizer, TrainConfig};
use pathprox::prox_multi::{prox_multi, ProxInputMulti};
use pathprox::prox_single::{prox_single, ProxInputSingle};
use pathprox::Rng;

#[derive(Parser)]
#[command(name = "pathprox", version, about = "1-path-norm proximal training harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a shallow network with SGD or proximal SGD and write JSONL metrics.
    Train(TrainArgs),
    /// Run the randomized prox verification suites; nonzero exit on violations.
    ProxCheck(ProxCheckArgs),
    /// Measure prox wall times across problem sizes and emit a CSV table.
    BenchProx(BenchProxArgs),
    /// Evaluate clean and robust error of saved weights across an epsilon list.
    AttackEval(AttackEvalArgs),
    /// Generate the seeded synthetic two-class blob dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    None,
    L1,
    Path,
    Parseval,
}

impl From<RegArg> for Regularizer {
    fn from(r: RegArg) -> Self {
        match r {
            RegArg::None => Regularizer::None,
            RegArg::L1 => Regularizer::L1,
            RegArg::Path => Regularizer::PathNorm,
            RegArg::Parseval => Regularizer::Parseval,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Prox,
    Sgd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActArg {
    Elu,
    Softplus,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    CrossEntropy,
    Squared,
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV (label-first).
    #[arg(long)]
    data: PathBuf,
    /// Optional held-out CSV for the per-epoch clean error.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    reg: RegArg,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Constant learning rate.
    #[arg(long, default_value_t = 5e-2)]
    lr: f64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    hidden: usize,
    /// prox applies the regularizer's exact operator after each gradient
    /// step; sgd folds its almost-everywhere gradient into the step.
    #[arg(long, value_enum, default_value = "prox")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "elu")]
    act: ActArg,
    #[arg(long, value_enum, default_value = "cross-entropy")]
    loss: LossArg,
    /// Output metrics file, one JSON object per epoch.
    #[arg(long)]
    out: PathBuf,
    /// Optionally persist the final weights (PPRX1 binary).
    #[arg(long)]
    save_weights: Option<PathBuf>,
}

#[derive(Args)]
struct ProxCheckArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Largest row length of random instances.
    #[arg(long, default_value_t = 8)]
    max_m: usize,
    /// Largest output count of random multi-output instances.
    #[arg(long, default_value_t = 6)]
    max_p: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Deliberately break the tie rule to demonstrate the suite catches it.
    #[arg(long, value_enum, default_value = "none")]
    inject_fault: FaultArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    TieRule,
}

#[derive(Args)]
struct BenchProxArgs {
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    max_m: usize,
    #[arg(long, default_value_t = 16)]
    max_p: usize,
    #[arg(long, default_value_t = 3)]
    seed: u64,
}

#[derive(Args)]
struct AttackEvalArgs {
    /// Evaluation CSV (label-first).
    #[arg(long)]
    data: PathBuf,
    /// PPRX1 weight file.
    #[arg(long)]
    weights: PathBuf,
    /// Comma-separated epsilon values.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25,0.3")]
    eps_list: Vec<f64>,
    /// Regularization weight echoed into the output rows.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 40)]
    iters: usize,
    #[arg(long, default_value_t = 5)]
    seed: u64,
    #[arg(long, value_enum, default_value = "elu")]
    act: ActArg,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    features: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Serialize)]
struct MetricsLine<'a> {
    epoch: usize,
    objective: f64,
    reg_value: f64,
    nnz_fraction: f64,
    clean_error: f64,
    robust_error: Option<f64>,
    config: &'a TrainConfig,
    seed: u64,
}

fn cmd_train(args: &TrainArgs) -> Result<i32> {
    let train = load_csv(&args.data, Split::Train)?;
    let test = args.test.as_ref().map(|p| load_csv(p, Split::Test)).transpose()?;
    let cfg = TrainConfig {
        reg: args.reg.into(),
        lambda: args.lambda,
        step: args.lr,
        epochs: args.epochs,
        batch: args.batch,
        seed: args.seed,
        loss: match args.loss {
            LossArg::CrossEntropy => LossKind::CrossEntropy,
            LossArg::Squared => LossKind::Squared,
        },
        act: match args.act {
            ActArg::Elu => ActivationKind::Elu,
            ActArg::Softplus => ActivationKind::Softplus,
        },
        hidden: args.hidden,
        method: match args.method {
            MethodArg::Prox => Method::Prox,
            MethodArg::Sgd => Method::Subgradient,
        },
    };
    let train_batch = train.to_batch();
    let test_batch = test.as_ref().map(|d| d.to_batch());
    let (params, metrics) = run_stochastic(&train_batch, test_batch.as_ref(), &cfg)?;

    let mut out = String::new();
    for m in &metrics {
        let line = MetricsLine {
            epoch: m.epoch,
            objective: m.objective,
            reg_value: m.reg_value,
            nnz_fraction: m.nnz_fraction,
            clean_error: m.clean_error,
            robust_error: m.robust_error,
            config: &cfg,
            seed: cfg.seed,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    std::fs::write(&args.out, out)
        .with_context(|| format!("cannot write metrics to {}", args.out.display()))?;

    if let Some(path) = &args.save_weights {
        weights::save(path, &params)?;
    }
    Ok(0)
}

fn cmd_prox_check(args: &ProxCheckArgs) -> Result<i32> {
    let fault = match args.inject_fault {
        FaultArg::None => Fault::None,
        FaultArg::TieRule => Fault::FlipTieRule,
    };
    let reports = checks::run_all(args.trials, args.max_m, args.max_p, args.seed, fault);
    let mut failed = false;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {name}: {passed}/{trials} instances, {violations} violations, worst residual {worst:.3e}",
            name = r.name,
            passed = r.trials - r.violations,
            trials = r.trials,
            violations = r.violations,
            worst = r.worst,
        );
        failed |= !r.passed();
    }
    Ok(if failed { 1 } else { 0 })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    xs[xs.len() / 2]
}

fn time_median<F: FnMut()>(mut f: F, reps: usize) -> f64 {
    f(); // warmup
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        f();
        times.push(t0.elapsed().as_secs_f64());
    }
    median(times)
}

fn cmd_bench_prox(args: &BenchProxArgs) -> Result<i32> {
    let mut rng = Rng::new(args.seed);
    let mut csv = String::from("op,p,m,seconds\n");

    for &m in &[0usize, 1_000, 10_000, 100_000, 1_000_000] {
        if m > args.max_m {
            continue;
        }
        let input = ProxInputSingle {
            x: rng.normal(),
            y: (0..m).map(|_| rng.normal()).collect(),
            lam: 0.05,
        };
        let secs = time_median(
            || {
                prox_single(&input).expect("bench prox");
            },
            5,
        );
        writeln!(csv, "prox_single,1,{m},{secs:.9}")?;
    }

    for &p in &[1usize, 4, 16] {
        if p > args.max_p {
            continue;
        }
        for &m in &[1_000usize, 10_000, 100_000] {
            if m > args.max_m {
                continue;
            }
            let input = ProxInputMulti {
                x: (0..p).map(|_| rng.normal()).collect(),
                y: (0..m).map(|_| rng.normal()).collect(),
                lam: 0.05,
            };
            let secs = time_median(
                || {
                    prox_multi(&input).expect("bench prox");
                },
                5,
            );
            writeln!(csv, "prox_multi,{p},{m},{secs:.9}")?;
        }
    }

    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_attack_eval(args: &AttackEvalArgs) -> Result<i32> {
    let params = weights::load(&args.weights)?;
    let data = load_csv(&args.data, Split::Test)?;
    let batch = data.to_batch();
    let act = match args.act {
        ActArg::Elu => ActivationKind::Elu,
        ActArg::Softplus => ActivationKind::Softplus,
    };
    let clean = classification_error(&params, act, &batch);
    let mut csv = String::from("lambda,epsilon,clean_error,robust_error\n");
    for &eps in &args.eps_list {
        let cfg = AttackConfig { iters: args.iters, ..AttackConfig::standard(eps) };
        let robust = robust_error(&params, act, &batch, &cfg, args.seed)?;
        writeln!(csv, "{},{},{},{}", args.lambda, eps, clean, robust)?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_gen_data(args: &GenDataArgs) -> Result<i32> {
    let batch = synthetic_blobs(args.samples, args.features, args.seed);
    write_csv(&args.out, &batch.inputs, &batch.labels)?;
    Ok(0)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::ProxCheck(args) => cmd_prox_check(args),
        Command::BenchProx(args) => cmd_bench_prox(args),
        Command::AttackEval(args) => cmd_attack_eval(args),
        Command::GenData(args) => cmd_gen_data(args),
    }
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}
