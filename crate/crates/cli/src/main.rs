use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_fdr::means::no_false_positive_threshold;
use sparse_fdr::monotone::shrinking_model_pair;
use sparse_fdr::montecarlo::{default_n_grid, run_sweep_with_options, with_threads};
use sparse_fdr::regression::DEFAULT_GUARD_LIMIT;
use sparse_fdr::report::{fit_csv, replicates_csv, summary_csv, PlotSeries};
use sparse_fdr::{
    audit_monotonicity, run_experiment_with, solve_regression_penalized, AuditConfig, Error, ExperimentConfig,
    LogFactorialPenalty, MeansEstimator, Result, RunOptions, SearchKind, SearchMethod, SparseVector,
};

mod input;

/// Sparse normal-means and regression estimators with FDR diagnostics.
#[derive(Parser)]
#[command(name = "sparse-fdr", version)]
struct Cli {
    /// Master seed. Overrides `master_seed` in configuration files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicates and audit trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Fill the runtime_ms column. Output is then no longer byte-reproducible.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply an estimator to a CSV of y (means) or of x_1..x_p,y rows (regression).
    Estimate {
        input: PathBuf,
        /// hard-threshold, fixed-threshold, log-factorial, bh, counterexample or top-s.
        estimator: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Means)]
        model: ModelArg,
        #[command(flatten)]
        params: EstimatorArgs,
    },
    /// Run one Monte Carlo experiment from a TOML configuration.
    Experiment { config: PathBuf },
    /// Run an experiment over a grid of n and fit log(FDR) against log(s/n).
    Sweep { config: PathBuf },
    /// Check an estimator for monotonicity on sampled majorizing pairs.
    Audit {
        estimator: String,
        #[command(flatten)]
        params: EstimatorArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Use the shrinking-model pair as trial 0 (needs --gamma).
        #[arg(long)]
        inject_paper_pair: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Means,
    Regression,
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<usize>,
    /// Fixed threshold. Defaults to sqrt(2 log(n - s)) when --s is given.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long)]
    p_tilde: Option<usize>,
    /// exhaustive or greedy.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    guard_limit: Option<u64>,
}

const EXIT_VIOLATION: u8 = 1;

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Parse { .. } | Error::Io(_) | Error::Singular { .. } => 2,
        Error::Config { .. } | Error::Domain(_) => 3,
        Error::Budget { .. } => 4,
        Error::FitDegenerate { .. } => EXIT_VIOLATION,
        Error::Replicate { .. } => unreachable!("root strips replicate wrappers"),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config {
        field: flag.into(),
        message: "required for this estimator".into(),
    })
}

fn canonical(name: &str) -> String {
    name.to_ascii_lowercase().replace('_', "-")
}

fn means_estimator(name: &str, p: &EstimatorArgs, n: usize) -> Result<MeansEstimator> {
    Ok(match canonical(name).as_str() {
        "hard-threshold" => MeansEstimator::HardThreshold {
            gamma: required(p.gamma, "--gamma")?,
            s: required(p.s, "--s")?,
        },
        "fixed-threshold" => {
            let t = match (p.t, p.s) {
                (Some(t), _) => t,
                (None, Some(s)) => no_false_positive_threshold(n, s)?,
                (None, None) => required(None, "--t")?,
            };
            MeansEstimator::FixedThreshold { t }
        }
        "log-factorial" => MeansEstimator::LogFactorial {
            gamma: required(p.gamma, "--gamma")?,
            p_tilde: p.p_tilde.unwrap_or(n),
        },
        "bh" | "bh-stepup" => MeansEstimator::BhStepUp {
            q: required(p.q, "--q")?,
        },
        "counterexample" => MeansEstimator::Counterexample {
            gamma: required(p.gamma, "--gamma")?,
        },
        "top-s" | "top-s-oracle" => MeansEstimator::TopS {
            s: required(p.s, "--s")?,
        },
        other => {
            return Err(Error::Config {
                field: "estimator".into(),
                message: format!("unknown estimator `{other}`"),
            })
        }
    })
}

fn search_method(p: &EstimatorArgs) -> Result<SearchMethod> {
    let kind = match p.method.as_deref() {
        None | Some("exhaustive") => SearchKind::Exhaustive,
        Some("greedy") => SearchKind::GreedyForward,
        Some(other) => {
            return Err(Error::Config {
                field: "--method".into(),
                message: format!("unknown search method `{other}`"),
            })
        }
    };
    let guard_limit = p.guard_limit.unwrap_or(DEFAULT_GUARD_LIMIT);
    if guard_limit == 0 {
        return Err(Error::Config {
            field: "--guard-limit".into(),
            message: "must be positive".into(),
        });
    }
    Ok(SearchMethod { kind, guard_limit })
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn beta_csv(beta: &SparseVector) -> String {
    let mut out = String::from("index,value,selected\n");
    for (i, v) in beta.entries().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, v, beta.is_selected(i)));
    }
    out
}

fn cmd_estimate(cli: &Cli, input_path: &Path, name: &str, model: ModelArg, params: &EstimatorArgs) -> Result<u8> {
    match model {
        ModelArg::Means => {
            let y = input::read_means(input_path)?;
            let est = means_estimator(name, params, y.len())?;
            let fit = est.apply(&y)?;
            write_out(&cli.out, "beta_hat.csv", &beta_csv(&fit.beta_hat))?;
            println!("selected_k={}", fit.selected_k);
            match fit.objective_value {
                Some(v) => println!("objective={v}"),
                None => println!("objective=none"),
            }
        }
        ModelArg::Regression => {
            if canonical(name) != "log-factorial" {
                return Err(Error::Config {
                    field: "estimator".into(),
                    message: format!("`{name}` is not available for the regression model; use log-factorial"),
                });
            }
            let (x, y) = input::read_regression(input_path)?;
            let (n, p) = x.shape();
            let penalty = LogFactorialPenalty::new(
                required(params.gamma, "--gamma")?,
                p,
                params.p_tilde.unwrap_or(n.min(p)),
            )?;
            let fit = solve_regression_penalized(&x, &y, &penalty, search_method(params)?)?;
            write_out(&cli.out, "beta_hat.csv", &beta_csv(&fit.beta_hat))?;
            println!("selected_k={}", fit.score.subset.len());
            println!("objective={}", fit.score.sc);
            println!("rss={}", fit.score.rss);
            println!("heuristic={}", fit.heuristic);
        }
    }
    Ok(0)
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn run_options(cli: &Cli) -> RunOptions {
    RunOptions {
        threads: cli.threads,
        record_timing: cli.timing,
    }
}

fn cmd_experiment(cli: &Cli, path: &Path) -> Result<u8> {
    let cfg = load_config(cli, path)?;
    let summary = run_experiment_with(&cfg, run_options(cli))?;
    let summaries = std::slice::from_ref(&summary);
    write_out(&cli.out, "replicates.csv", &replicates_csv(summaries))?;
    write_out(&cli.out, "summary.csv", &summary_csv(summaries, None))?;
    println!(
        "n={} s={} estimator={} fdr={} mean_fp={} freq_exact_recovery={}",
        summary.n, summary.s, summary.estimator, summary.mean_fdp, summary.mean_fp, summary.freq_exact_recovery
    );
    Ok(0)
}

fn cmd_sweep(cli: &Cli, path: &Path) -> Result<u8> {
    let cfg = load_config(cli, path)?;
    let grid = cfg.n_values.clone().unwrap_or_else(default_n_grid);
    let sweep = match run_sweep_with_options(&cfg, &grid, run_options(cli)) {
        Ok(sweep) => sweep,
        Err(err @ Error::FitDegenerate { .. }) => {
            if let Error::FitDegenerate { table, .. } = &err {
                write_out(&cli.out, "summary.csv", table)?;
            }
            return Err(err);
        }
        Err(err) => return Err(err),
    };
    write_out(&cli.out, "replicates.csv", &replicates_csv(&sweep.summaries))?;
    write_out(&cli.out, "summary.csv", &summary_csv(&sweep.summaries, Some(&sweep.dropped)))?;
    write_out(&cli.out, "fit.csv", &fit_csv(&sweep.fit, sweep.points_used))?;
    if let Some(svg) = PlotSeries::from_sweep(&sweep).to_svg() {
        write_out(&cli.out, "fdr_vs_sparsity.svg", &svg)?;
    }
    println!(
        "slope={} intercept={} r_squared={} points_used={} dropped={}",
        sweep.fit.slope,
        sweep.fit.intercept,
        sweep.fit.r_squared,
        sweep.points_used,
        sweep.dropped_count()
    );
    Ok(0)
}

fn cmd_audit(cli: &Cli, name: &str, params: &EstimatorArgs, trials: usize, n: usize, inject: bool) -> Result<u8> {
    let est = means_estimator(name, params, n)?;
    let mut cfg = AuditConfig::new(trials, n, cli.seed.unwrap_or(0));
    if inject {
        let gamma = required(params.gamma, "--gamma")?;
        let (smaller, larger) = shrinking_model_pair(n, gamma).map_err(|e| Error::Config {
            field: "--inject-paper-pair".into(),
            message: e.to_string(),
        })?;
        cfg.inject = Some((larger, smaller));
    }
    let report = with_threads(cli.threads, || audit_monotonicity(&est, &cfg))??;
    println!("estimator={}", est.name());
    println!("trials={}", report.trials);
    println!("value_violations={}", report.value_violations);
    println!("selection_violations={}", report.selection_violations);
    if let Some(cx) = &report.first_counterexample {
        let record = cx.to_record();
        print!("{record}");
        write_out(&cli.out, "counterexample.txt", &record)?;
    }
    Ok(if report.is_clean() { 0 } else { EXIT_VIOLATION })
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Estimate {
            input,
            estimator,
            model,
            params,
        } => cmd_estimate(cli, input, estimator, *model, params),
        Command::Experiment { config } => cmd_experiment(cli, config),
        Command::Sweep { config } => cmd_sweep(cli, config),
        Command::Audit {
            estimator,
            params,
            trials,
            n,
            inject_paper_pair,
        } => cmd_audit(cli, estimator, params, *trials, *n, *inject_paper_pair),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
