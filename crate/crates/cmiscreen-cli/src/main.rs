//! `cmiscreen` command line: simulate synthetic datasets, fit the
//! encompassing mixture, screen predictors from a saved trace, run
//! replicated benchmarks, and dump convergence diagnostics.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cmiscreen::{
    autocorrelation, default_names, ess, io, run_benchmark, run_chain, summarize, BenchmarkConfig,
    ChainConfig, CmiMode, DatasetOptions, Hyperparams, SimCase, SimulationSpec, DEFAULT_TRUNCATION,
};

#[derive(Parser)]
#[command(
    name = "cmiscreen",
    version,
    about = "Screen predictors for conditional dependence with a response via an encompassing Bayesian mixture model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known dependence structure.
    Simulate(SimulateArgs),
    /// Fit the mixture to a dataset and save the dependence trace.
    Fit(FitArgs),
    /// Summarize a saved trace into per-predictor selection decisions.
    Screen(ScreenArgs),
    /// Run a replicated generate-fit-screen benchmark and score it.
    Evaluate(EvaluateArgs),
    /// Write autocorrelation and effective-sample-size diagnostics for a trace.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PriorChoice {
    /// Empirical priors from per-column sample statistics.
    Empirical,
    /// Fixed N(0,1) / IG(1.5, 1/2) priors for pre-normalized data.
    Standard,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeChoice {
    /// Conditional mutual information given the remaining predictors.
    Conditional,
    /// Pairwise mutual information with the response.
    Marginal,
}

impl From<ModeChoice> for CmiMode {
    fn from(m: ModeChoice) -> CmiMode {
        match m {
            ModeChoice::Conditional => CmiMode::Conditional,
            ModeChoice::Marginal => CmiMode::Marginal,
        }
    }
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Generator family: case1, case2, case3, four_clouds, gaussian_null.
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Additional response noise sd (power scenarios).
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    /// Output directory (data.csv, schema.json, truth.json, manifest.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Post-burn iterations.
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 5_000)]
    burnin: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Truncation level of the mixture.
    #[arg(long = "H", default_value_t = DEFAULT_TRUNCATION)]
    truncation: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo draws for integrating a predictor out of the response.
    #[arg(long, default_value_t = 500)]
    mc_draws: usize,
    #[arg(long, value_enum, default_value_t = PriorChoice::Empirical)]
    priors: PriorChoice,
    /// z-score continuous columns before fitting.
    #[arg(long, default_value_t = false)]
    normalize: bool,
    #[arg(long, value_enum, default_value_t = ModeChoice::Conditional)]
    mode: ModeChoice,
    /// Output directory (trace.csv, manifest.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ScreenArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value_t = 0.90)]
    ci: f64,
    /// Output directory (report.json, report.csv, manifest.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 2_000)]
    iters: usize,
    #[arg(long, default_value_t = 1_000)]
    burnin: usize,
    #[arg(long, default_value_t = 5)]
    thin: usize,
    #[arg(long = "H", default_value_t = DEFAULT_TRUNCATION)]
    truncation: usize,
    #[arg(long, default_value_t = 500)]
    mc_draws: usize,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value_t = 0.90)]
    ci: f64,
    #[arg(long, value_enum, default_value_t = ModeChoice::Conditional)]
    mode: ModeChoice,
    /// Output directory (metrics.json, roc.csv, replications.csv, manifest.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
    /// Output directory (acf.csv, diagnostics.json, manifest.json).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args, started),
        Command::Fit(args) => cmd_fit(args, started),
        Command::Screen(args) => cmd_screen(args, started),
        Command::Evaluate(args) => cmd_evaluate(args, started),
        Command::Report(args) => cmd_report(args, started),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn ensure_dir(path: &Path) -> cmiscreen::Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, started: Instant) -> cmiscreen::Result<()> {
    let case: SimCase = args.case.parse()?;
    let mut spec = SimulationSpec::new(case, args.n, args.p, args.seed);
    spec.noise_sd = args.noise_sd;
    if case == SimCase::FourClouds {
        spec.p = 1;
    }
    let generated = cmiscreen::generate(&spec)?;
    let table = if args.noise_sd > 0.0 {
        generated
            .dataset
            .with_noisy_response(args.noise_sd, cmiscreen::derive_seed(args.seed, u64::MAX))?
            .to_raw_table()
    } else {
        generated.table
    };
    ensure_dir(&args.out)?;
    io::write_table_csv(&args.out.join("data.csv"), &table)?;
    io::write_schema(&args.out.join("schema.json"), &io::schema_for_table(&table))?;
    io::write_truth_json(&args.out.join("truth.json"), &generated.truth)?;
    let mut manifest = io::Manifest::new("simulate", args.seed, serde_json::to_value(&args)?);
    if let Some(h) = &generated.case3 {
        manifest.config["case3_hyperdraws"] = serde_json::to_value(h)?;
    }
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    io::write_manifest(&args.out.join("manifest.json"), &manifest)
}

fn cmd_fit(args: FitArgs, started: Instant) -> cmiscreen::Result<()> {
    let opts = DatasetOptions {
        normalize: args.normalize,
        standardize_design: true,
    };
    let data = io::load_csv_with_schema(&args.data, &args.schema, opts)?;
    let mut hp = match args.priors {
        PriorChoice::Empirical => Hyperparams::empirical(&data),
        PriorChoice::Standard => Hyperparams::standard(data.p()),
    };
    hp.h = args.truncation;
    let cfg = ChainConfig {
        burn_in: args.burnin,
        kept: args.iters,
        thin: args.thin,
        seed: args.seed,
        n_mc_marginal: args.mc_draws,
        mode: args.mode.into(),
    };
    let out = run_chain(&data, &hp, &cfg)?;
    ensure_dir(&args.out)?;
    io::write_trace_csv(&args.out.join("trace.csv"), &out.trace)?;
    let mut manifest = io::Manifest::new("fit", args.seed, serde_json::to_value(&args)?);
    manifest.response = Some(data.response_name().to_string());
    manifest.predictors = Some(data.predictor_names().to_vec());
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    io::write_manifest(&args.out.join("manifest.json"), &manifest)
}

fn cmd_screen(args: ScreenArgs, started: Instant) -> cmiscreen::Result<()> {
    let trace = io::read_trace_csv(&args.trace)?;
    // predictor names travel in the fit manifest next to the trace
    let names = args
        .trace
        .parent()
        .map(|dir| dir.join("manifest.json"))
        .filter(|m| m.exists())
        .and_then(|m| io::read_manifest(&m).ok())
        .and_then(|m| m.predictors)
        .filter(|names| names.len() == trace.draws.ncols())
        .unwrap_or_else(|| default_names(trace.draws.ncols()));
    let report = summarize(&trace, &names, args.threshold, args.ci)?;
    ensure_dir(&args.out)?;
    io::write_report_json(&args.out.join("report.json"), &report)?;
    io::write_report_csv(&args.out.join("report.csv"), &report)?;
    let mut manifest = io::Manifest::new("screen", 0, serde_json::to_value(&args)?);
    manifest.predictors = Some(names);
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    io::write_manifest(&args.out.join("manifest.json"), &manifest)
}

fn cmd_evaluate(args: EvaluateArgs, started: Instant) -> cmiscreen::Result<()> {
    let case: SimCase = args.case.parse()?;
    let mut spec = SimulationSpec::new(case, args.n, args.p, args.seed);
    spec.noise_sd = args.noise_sd;
    if case == SimCase::FourClouds {
        spec.p = 1;
    }
    let cfg = BenchmarkConfig {
        spec,
        replications: args.reps,
        burn_in: args.burnin,
        kept: args.iters,
        thin: args.thin,
        truncation: args.truncation,
        n_mc_marginal: args.mc_draws,
        mode: args.mode.into(),
        threshold: args.threshold,
        ci_level: args.ci,
    };
    let result = run_benchmark(&cfg)?;
    ensure_dir(&args.out)?;
    io::write_metrics_json(&args.out.join("metrics.json"), &result)?;
    io::write_roc_csv(&args.out.join("roc.csv"), &result.aggregate.roc)?;
    io::write_replication_csv(&args.out.join("replications.csv"), &result)?;
    let mut manifest = io::Manifest::new("evaluate", args.seed, serde_json::to_value(&args)?);
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    io::write_manifest(&args.out.join("manifest.json"), &manifest)
}

fn cmd_report(args: ReportArgs, started: Instant) -> cmiscreen::Result<()> {
    let trace = io::read_trace_csv(&args.trace)?;
    let p = trace.draws.ncols();
    let names = default_names(p);
    let acfs: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let col: Vec<f64> = trace.draws.column(j).to_vec();
            autocorrelation(&col, args.max_lag)
        })
        .collect();
    let esses: Vec<f64> = (0..p)
        .map(|j| {
            let col: Vec<f64> = trace.draws.column(j).to_vec();
            ess(&col)
        })
        .collect();
    ensure_dir(&args.out)?;
    io::write_acf_csv(&args.out.join("acf.csv"), &names, &acfs)?;
    #[derive(Serialize)]
    struct Diag<'a> {
        rows: usize,
        predictors: usize,
        ess: &'a [f64],
    }
    io::write_atomic(
        &args.out.join("diagnostics.json"),
        serde_json::to_string_pretty(&Diag {
            rows: trace.draws.nrows(),
            predictors: p,
            ess: &esses,
        })?
        .as_bytes(),
    )?;
    let mut manifest = io::Manifest::new("report", 0, serde_json::to_value(&args)?);
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    io::write_manifest(&args.out.join("manifest.json"), &manifest)
}
