//! Sparse estimators for the normal-means and Gaussian-design regression
//! models, with false-discovery diagnostics and seeded Monte Carlo
//! experiments.
//!
//! The estimators cover hard thresholding at `gamma log(n/s)`, a fixed
//! threshold, log-factorial penalized least squares (`pe(k) = gamma sum
//! log(p/i)`), the step-up Benjamini-Hochberg rule in penalized form, a
//! non-monotone counterexample and the top-`s` oracle. [`monotone`] audits
//! estimators for majorization monotonicity and [`montecarlo`] runs
//! reproducible experiments whose results [`report`] writes as CSV and SVG.

pub mod chisq;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod means;
pub mod monotone;
pub mod montecarlo;
mod ortho;
pub mod regression;
pub mod report;
pub mod rng;
pub mod special;
pub mod types;

pub use nalgebra;

pub use chisq::{chi_square_tail, ChiSquareBound};
pub use config::{Estimator, EstimatorConfig, ExperimentConfig, Model, SparsityRule, TruthRule};
pub use diagnostics::{binomial_fp_oracle, diagnose, fdr_rate_exponent, BinomialFpLaw, RateFit};
pub use error::{Error, Result};
pub use means::{
    bh_stepup, counterexample_estimate, fixed_threshold, hard_threshold, solve_means_log_factorial,
    top_s_oracle, MeansEstimate, MeansEstimator,
};
pub use monotone::{audit_monotonicity, majorizes, sample_majorizing_pair, AuditConfig, MonotoneReport};
pub use montecarlo::{run_experiment, run_experiment_with, run_sweep, ExperimentSummary, RunOptions, Sweep};
pub use regression::{
    gaussian_design, rss, solve_regression_penalized, worst_case_beta, ModelScore, RegressionFit, SearchKind,
    SearchMethod,
};
pub use rng::{seeded_substream, StreamRng};
pub use special::{std_normal_cdf, std_normal_quantile};
pub use types::{LogFactorialPenalty, SelectionDiagnostics, SparseVector};
