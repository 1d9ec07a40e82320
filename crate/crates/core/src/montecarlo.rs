//! Seeded Monte Carlo experiments over means and regression instances.
//!
//! Replicate `r` draws everything (truth support, design, noise) from
//! `seeded_substream(master_seed, r)`. Replicates may run on any number of
//! threads; results are gathered in replicate order and aggregated serially,
//! so a summary depends only on its configuration.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{Estimator, ExperimentConfig, Model, ResolvedExperiment};
use crate::diagnostics::{diagnose, fdr_rate_exponent, RateFit};
use crate::error::{Error, Result};
use crate::regression::{gaussian_design, regression_response, solve_regression_penalized, worst_case_beta};
use crate::rng::seeded_substream;
use crate::types::{SelectionDiagnostics, SparseVector};

/// Execution options that never change results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Record per-replicate wall time. Off by default so output files stay
    /// byte-reproducible.
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub diagnostics: SelectionDiagnostics,
    pub selected_k: usize,
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub estimator: &'static str,
    pub gamma: Option<f64>,
    pub mean_fp: f64,
    pub se_fp: f64,
    /// Replicate mean of the FDP, i.e. the FDR estimate.
    pub mean_fdp: f64,
    pub se_fdp: f64,
    pub mean_l2_sq: f64,
    pub se_l2_sq: f64,
    pub freq_fp_zero: f64,
    pub freq_exact_recovery: f64,
    pub mean_symdiff_ratio: f64,
    pub rows: Vec<ReplicateRow>,
}

impl ExperimentSummary {
    /// `s / p`, the abscissa of rate plots.
    pub fn sparsity_ratio(&self) -> f64 {
        self.s as f64 / self.p as f64
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let m = values.clone().count();
    let mean = values.clone().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

fn run_replicate(exp: &ResolvedExperiment, replicate: usize, timing: bool) -> Result<ReplicateRow> {
    let cfg = &exp.config;
    let mut rng = seeded_substream(cfg.master_seed, replicate as u64);
    let start = timing.then(Instant::now);

    let (estimate, truth, selected_k) = match cfg.model {
        Model::Means => {
            let truth = draw_truth(exp, None, &mut rng)?;
            let y: Vec<f64> = truth
                .entries()
                .iter()
                .map(|b| b + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let Estimator::Means(est) = &exp.estimator else {
                unreachable!("means model resolves to a means estimator")
            };
            let fit = est.apply(&SparseVector::new(y)?)?;
            (fit.beta_hat, truth, fit.selected_k)
        }
        Model::Regression => {
            let x = gaussian_design(cfg.n, exp.p, &mut rng);
            let truth = draw_truth(exp, Some(cfg.n), &mut rng)?;
            let y: DVector<f64> = regression_response(&x, &truth, &mut rng);
            let Estimator::Regression { penalty, method } = &exp.estimator else {
                unreachable!("regression model resolves to the penalized estimator")
            };
            let fit = solve_regression_penalized(&x, &y, penalty, *method)?;
            let k = fit.score.subset.len();
            (fit.beta_hat, truth, k)
        }
    };
    let diagnostics = diagnose(&estimate, &truth)?;
    Ok(ReplicateRow {
        replicate,
        diagnostics,
        selected_k,
        runtime_ms: start.map(|t| t.elapsed().as_secs_f64() * 1e3),
    })
}

fn draw_truth(exp: &ResolvedExperiment, n: Option<usize>, rng: &mut crate::rng::StreamRng) -> Result<SparseVector> {
    use crate::config::TruthRule;
    match &exp.config.truth {
        TruthRule::WorstCase => worst_case_beta(exp.p, exp.s, exp.config.signal_c, n, rng),
        TruthRule::Null => SparseVector::zeros(exp.p),
        TruthRule::Custom(_) => Ok(exp.truth.clone().expect("custom truth resolved")),
    }
}

/// Runs `job` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(Error::config("threads", "must be positive")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentSummary> {
    let exp = config.resolve()?;
    let rows: Vec<Result<ReplicateRow>> = with_threads(options.threads, || {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                run_replicate(&exp, r, options.record_timing).map_err(|e| Error::Replicate {
                    replicate: r,
                    source: Box::new(e),
                })
            })
            .collect()
    })?;
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(&exp, rows))
}

fn summarize(exp: &ResolvedExperiment, rows: Vec<ReplicateRow>) -> ExperimentSummary {
    let m = rows.len() as f64;
    let d = |f: fn(&SelectionDiagnostics) -> f64| rows.iter().map(move |r| f(&r.diagnostics));
    let (mean_fp, se_fp) = mean_and_se(d(|x| x.fp as f64));
    let (mean_fdp, se_fdp) = mean_and_se(d(|x| x.fdp));
    let (mean_l2_sq, se_l2_sq) = mean_and_se(d(|x| x.l2_sq));
    let mean_symdiff_ratio = d(|x| x.symdiff_ratio).sum::<f64>() / m;
    let freq_fp_zero = rows.iter().filter(|r| r.diagnostics.fp == 0).count() as f64 / m;
    let freq_exact_recovery = rows.iter().filter(|r| r.diagnostics.exact_recovery()).count() as f64 / m;
    ExperimentSummary {
        config: exp.config.clone(),
        n: exp.config.n,
        p: exp.p,
        s: exp.s,
        estimator: exp.estimator.name(),
        gamma: exp.estimator.gamma(),
        mean_fp,
        se_fp,
        mean_fdp,
        se_fdp,
        mean_l2_sq,
        se_l2_sq,
        freq_fp_zero,
        freq_exact_recovery,
        mean_symdiff_ratio,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub summaries: Vec<ExperimentSummary>,
    /// Parallel to `summaries`: true where a zero FDR estimate was left out
    /// of the fit.
    pub dropped: Vec<bool>,
    pub fit: RateFit,
    pub points_used: usize,
}

impl Sweep {
    pub fn dropped_count(&self) -> usize {
        self.dropped.iter().filter(|d| **d).count()
    }
}

/// Copy of `base` at sample size `n` (and `p = n` for the means model).
pub fn config_at(base: &ExperimentConfig, n: usize) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.n = n;
    if cfg.model == Model::Means {
        cfg.p = None;
    }
    cfg.n_values = None;
    cfg
}

/// Sweep grid used when a configuration gives no `n_values`: `2^10, ..., 2^16`.
pub fn default_n_grid() -> Vec<usize> {
    (10..=16).map(|k| 1usize << k).collect()
}

pub fn run_sweep(base: &ExperimentConfig, n_values: &[usize]) -> Result<Sweep> {
    run_sweep_with_options(base, n_values, RunOptions::default())
}

pub fn run_sweep_with_options(base: &ExperimentConfig, n_values: &[usize], options: RunOptions) -> Result<Sweep> {
    run_sweep_with(base, n_values, |cfg| run_experiment_with(cfg, options))
}

/// Sweep driver with a pluggable per-point runner.
///
/// Every configuration is validated before the first point runs. Points
/// whose FDR estimate is zero are dropped from the fit and recorded.
pub fn run_sweep_with<F>(base: &ExperimentConfig, n_values: &[usize], mut runner: F) -> Result<Sweep>
where
    F: FnMut(&ExperimentConfig) -> Result<ExperimentSummary>,
{
    if n_values.len() < 3 {
        return Err(Error::config("n_values", "a sweep needs at least 3 values"));
    }
    let configs: Vec<ExperimentConfig> = n_values.iter().map(|&n| config_at(base, n)).collect();
    for cfg in &configs {
        cfg.resolve()
            .map_err(|e| Error::config(format!("n_values[n={}]", cfg.n), e.to_string()))?;
    }
    let summaries = configs.iter().map(&mut runner).collect::<Result<Vec<_>>>()?;
    let dropped: Vec<bool> = summaries.iter().map(|s| s.mean_fdp <= 0.0).collect();
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .zip(&dropped)
        .filter(|(_, d)| !**d)
        .map(|(s, _)| (s.sparsity_ratio(), s.mean_fdp))
        .collect();
    if points.len() < 3 {
        return Err(Error::FitDegenerate {
            usable: points.len(),
            table: crate::report::summary_csv(&summaries, Some(&dropped)),
        });
    }
    let fit = fdr_rate_exponent(&points)?;
    Ok(Sweep {
        points_used: points.len(),
        summaries,
        dropped,
        fit,
    })
}
