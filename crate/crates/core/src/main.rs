// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use nbpdn::analysis::{run_verification, EstimateMode, VerifyOptions, DEFAULT_BUDGET};
use nbpdn::experiment::{
    cmd_bounds, cmd_rip, cmd_run, cmd_sweep, preset, BoundsRequest, Ensemble, ExperimentConfig,
    MatrixSpec,
};
use nbpdn::{Error, Result};

#[derive(Parser)]
#[command(name = "nbpdn", version, about = "Distributed sparse recovery experiments")]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm over all trials and write traces, metrics and metadata.
    Run(ExperimentArgs),
    /// Run the sweep block of a config.
    Sweep(ExperimentArgs),
    /// Bound constants and validity flags of one matrix across a λ grid.
    Bounds(BoundsArgs),
    /// Restricted isometry or orthogonality constant of one matrix.
    Rip(RipArgs),
    /// Lemma and recurrence checks; exits 1 on any violation.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// One of desk, fig2, fig3, fig4.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Frame,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Gaussian => Ensemble::Gaussian,
            EnsembleArg::Frame => Ensemble::Frame,
        }
    }
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, default_value_t = 12)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random supports instead of full enumeration (lower bounds).
    #[arg(long)]
    sampled: bool,
    #[arg(long)]
    budget: Option<u128>,
}

impl MatrixArgs {
    fn spec(&self) -> MatrixSpec {
        MatrixSpec {
            m: self.m,
            n: self.n,
            ensemble: self.ensemble.into(),
            seed: self.seed,
        }
    }

    fn mode(&self) -> EstimateMode {
        if self.sampled {
            EstimateMode::Sampled
        } else {
            EstimateMode::Exact
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value_t = 2)]
    s: usize,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Comma-separated λ grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.6, 0.8, 1.0])]
    lambda: Vec<f64>,
    /// Iteration index for the geometric sums.
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RipArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    order: usize,
    /// Second order; switches to the orthogonality constant.
    #[arg(long)]
    order2: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per lemma case.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Network instances for the recurrence checks (default: min(trials, 20)).
    #[arg(long)]
    recurrence_trials: Option<usize>,
    /// Self-test: perturb every bound so that the checker must fail.
    #[arg(long)]
    adversarial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(p), _) => ExperimentConfig::from_path(p)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset("desk")?,
    };
    if let Some(seed) = args.seed {
        cfg.instance.seed = seed;
    }
    if let Some(t) = args.trials {
        cfg.instance.trials = t;
    }
    Ok(cfg)
}

fn out_dir(args_out: &Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    args_out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(&cfg.scenario))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(&args)?;
            let dir = out_dir(&args.out, &cfg);
            let out = cmd_run(&cfg, Some(&dir))?;
            for s in &out.series {
                println!("{:8} k={:<4} mSENR {:.2} dB", s.algorithm, s.rows.len() - 1, s.last());
            }
            info!("wrote {}", dir.display());
        }
        Command::Sweep(args) => {
            let cfg = load(&args)?;
            let dir = out_dir(&args.out, &cfg);
            let out = cmd_sweep(&cfg, Some(&dir))?;
            for r in &out.rows {
                println!(
                    "{}={:<6} {:8} k={:<4} mSENR {:.2} dB",
                    out.parameter.name(),
                    r.value,
                    r.algorithm,
                    r.k,
                    r.msenr_db
                );
            }
            info!("wrote {}", dir.display());
        }
        Command::Bounds(args) => {
            let req = BoundsRequest {
                matrix: args.matrix.spec(),
                s: args.s,
                a: args.a,
                b: args.b,
                lambdas: args.lambda.clone(),
                k: args.k,
                mode: args.matrix.mode(),
                budget: args.matrix.budget.unwrap_or(DEFAULT_BUDGET),
            };
            let report = cmd_bounds(&req, args.out.as_deref())?;
            print_json(&report)?;
        }
        Command::Rip(args) => {
            let r = cmd_rip(
                &args.matrix.spec(),
                args.order,
                args.order2,
                args.matrix.mode(),
                args.matrix.budget,
            )?;
            print_json(&r)?;
        }
        Command::Verify(args) => {
            let opts = VerifyOptions {
                seed: args.seed,
                lemma_trials: args.trials,
                recurrence_trials: args.recurrence_trials.unwrap_or(args.trials.min(20)),
                perturbation: if args.adversarial { 1.0 } else { 0.0 },
            };
            let report = run_verification(&opts)?;
            if report.is_empty() {
                warn!("no trials");
            }
            for l in &report.lemmas {
                println!(
                    "{:20} trials={:<4} rejected={:<3} violations={:<4} min_slack={:.3e}",
                    l.case.name(),
                    l.trials,
                    l.rejected,
                    l.violations(),
                    l.min_slack()
                );
            }
            for r in &report.recurrences {
                println!(
                    "{:20} trials={:<4} applicable={:<3} violations={:<4} min_slack={:.3e}",
                    serde_json::to_value(r.variant)?.as_str().unwrap_or_default(),
                    r.trials,
                    r.applicable,
                    r.violations,
                    r.min_slack
                );
            }
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&report)?)?;
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let err: &Error = &e;
            eprintln!(
                "{}",
                serde_json::json!({ "error": err.kind(), "message": err.to_string() })
            );
            ExitCode::from(2)
        }
    }
}
