//! Majorization and a randomized monotonicity audit for means estimators.
//!
//! `y` majorizes `z` when `sign(y_i) sign(z_i) >= 0` and `|y_i| >= |z_i|` at
//! every coordinate. An estimator is monotone when majorizing inputs give
//! majorizing outputs, which in particular forces the selected set to grow.
//! The audit searches for violations; it cannot prove their absence.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::means::MeansEstimator;
use crate::regression::worst_case_beta;
use crate::rng::{seeded_substream, StreamRng};
use crate::types::SparseVector;

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn majorizes(y: &SparseVector, z: &SparseVector) -> Result<bool> {
    if y.len() != z.len() {
        return Err(Error::domain(format!(
            "majorization needs equal lengths, got {} and {}",
            y.len(),
            z.len()
        )));
    }
    Ok(y
        .entries()
        .iter()
        .zip(z.entries())
        .all(|(&a, &b)| sign(a) * sign(b) >= 0.0 && a.abs() >= b.abs()))
}

/// How `y` is inflated from `z`: each coordinate is left alone with
/// probability `1 - inflate_prob`, otherwise multiplied by `1 + E` with
/// `E ~ Exp(mean = inflate_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGenerator {
    pub inflate_prob: f64,
    pub inflate_scale: f64,
}

impl Default for PairGenerator {
    fn default() -> Self {
        Self {
            inflate_prob: 0.5,
            inflate_scale: 0.5,
        }
    }
}

impl PairGenerator {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.inflate_prob) {
            return Err(Error::config("generator.inflate_prob", "must lie in [0, 1]"));
        }
        if !(self.inflate_scale.is_finite() && self.inflate_scale > 0.0) {
            return Err(Error::config("generator.inflate_scale", "must be positive"));
        }
        Ok(())
    }

    /// Draws `z = base_truth + noise` and `y` as a multiplicative inflation of `z`.
    pub fn sample(&self, base_truth: &SparseVector, rng: &mut StreamRng) -> (SparseVector, SparseVector) {
        let exp = Exp::new(1.0 / self.inflate_scale).expect("validated scale");
        let mut z = Vec::with_capacity(base_truth.len());
        let mut y = Vec::with_capacity(base_truth.len());
        for &b in base_truth.entries() {
            let zi = b + rng.sample::<f64, _>(StandardNormal);
            let factor = if rng.random::<f64>() < self.inflate_prob {
                1.0 + rng.sample(exp)
            } else {
                1.0
            };
            z.push(zi);
            y.push(zi * factor);
        }
        (
            SparseVector::new(y).expect("nonempty"),
            SparseVector::new(z).expect("nonempty"),
        )
    }
}

/// A majorizing pair `(y, z)` built around `base_truth` with the default generator.
pub fn sample_majorizing_pair(base_truth: &SparseVector, rng: &mut StreamRng) -> (SparseVector, SparseVector) {
    PairGenerator::default().sample(base_truth, rng)
}

/// `(y1, y2) = ((a1, a2, 0, ...), (a1, a3, 0, ...))` with
/// `a3^2 > gamma log n > a1^2 > a2^2 > gamma (log n + log(n/2)) / 2`.
/// `y2` majorizes `y1`, yet the counterexample estimator drops coordinate 0
/// on `y2` while keeping both on `y1`.
pub fn shrinking_model_pair(n: usize, gamma: f64) -> Result<(SparseVector, SparseVector)> {
    if n < 2 {
        return Err(Error::domain("the shrinking-model pair needs n >= 2"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let ln = (n as f64).ln();
    let hi = gamma * ln;
    let lo = gamma * (ln + (n as f64 / 2.0).ln()) / 2.0;
    let gap = hi - lo;
    let a1 = (hi - gap / 3.0).sqrt();
    let a2 = (hi - 2.0 * gap / 3.0).sqrt();
    let a3 = (hi + gap).sqrt();
    let mut y1 = vec![0.0; n];
    let mut y2 = vec![0.0; n];
    y1[0] = a1;
    y1[1] = a2;
    y2[0] = a1;
    y2[1] = a3;
    Ok((SparseVector::new(y1)?, SparseVector::new(y2)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub y: SparseVector,
    pub z: SparseVector,
    pub beta_y: SparseVector,
    pub beta_z: SparseVector,
}

impl Counterexample {
    /// Plain-text record; every value printed in shortest round-trip form.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trial={}", self.trial);
        for (name, v) in [
            ("y", &self.y),
            ("z", &self.z),
            ("beta_hat_y", &self.beta_y),
            ("beta_hat_z", &self.beta_z),
        ] {
            let vals: Vec<String> = v.entries().iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{name}={}", vals.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub trials: usize,
    /// Pairs where `beta_hat(y)` fails to majorize `beta_hat(z)`.
    pub value_violations: usize,
    /// Pairs where `supp(beta_hat(z))` is not contained in `supp(beta_hat(y))`.
    pub selection_violations: usize,
    /// Lowest-index trial with any violation.
    pub first_counterexample: Option<Counterexample>,
}

impl MonotoneReport {
    pub fn is_clean(&self) -> bool {
        self.value_violations == 0 && self.selection_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub trials: usize,
    pub n: usize,
    pub seed: u64,
    /// Multiplier `c` of the worst-case spikes around which pairs are drawn.
    pub base_signal_c: f64,
    pub generator: PairGenerator,
    /// Replaces trial 0 with this `(y, z)` pair.
    pub inject: Option<(SparseVector, SparseVector)>,
}

impl AuditConfig {
    pub fn new(trials: usize, n: usize, seed: u64) -> Self {
        Self {
            trials,
            n,
            seed,
            base_signal_c: 2.0,
            generator: PairGenerator::default(),
            inject: None,
        }
    }
}

fn trial_pair(config: &AuditConfig, trial: usize) -> Result<(SparseVector, SparseVector)> {
    if trial == 0 {
        if let Some(pair) = &config.inject {
            return Ok(pair.clone());
        }
    }
    let mut rng = seeded_substream(config.seed, trial as u64);
    let n = config.n;
    let s = ((n as f64).sqrt() as usize).clamp(1, n - 1);
    let base = worst_case_beta(n, s, config.base_signal_c, None, &mut rng)?;
    Ok(config.generator.sample(&base, &mut rng))
}

fn subset_of(small: &SparseVector, big: &SparseVector) -> bool {
    (0..small.len()).all(|i| !small.is_selected(i) || big.is_selected(i))
}

pub fn audit_monotonicity(estimator: &MeansEstimator, config: &AuditConfig) -> Result<MonotoneReport> {
    if config.trials == 0 {
        return Err(Error::config("trials", "must be positive"));
    }
    if config.n < 2 {
        return Err(Error::config("n", "must be at least 2"));
    }
    if !(config.base_signal_c.is_finite() && config.base_signal_c > 0.0) {
        return Err(Error::config("base_signal_c", "must be positive"));
    }
    config.generator.validate()?;
    if let Some((y, z)) = &config.inject {
        if y.len() != config.n || z.len() != config.n {
            return Err(Error::config("inject", "injected pair must have length n"));
        }
        if !majorizes(y, z)? {
            return Err(Error::config("inject", "y must majorize z"));
        }
    }
    // Surface parameter problems as configuration errors before any trial runs.
    estimator
        .apply(&SparseVector::zeros(config.n)?)
        .map_err(|e| Error::config("estimator", e.to_string()))?;

    let outcomes: Vec<Result<(bool, bool, Option<Counterexample>)>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (y, z) = trial_pair(config, trial)?;
            let beta_y = estimator.apply(&y)?.beta_hat;
            let beta_z = estimator.apply(&z)?.beta_hat;
            let value = !majorizes(&beta_y, &beta_z)?;
            let selection = !subset_of(&beta_z, &beta_y);
            let cx = (value || selection).then_some(Counterexample {
                trial,
                y,
                z,
                beta_y,
                beta_z,
            });
            Ok((value, selection, cx))
        })
        .collect();

    let mut report = MonotoneReport {
        trials: config.trials,
        value_violations: 0,
        selection_violations: 0,
        first_counterexample: None,
    };
    for outcome in outcomes {
        let (value, selection, cx) = outcome?;
        report.value_violations += value as usize;
        report.selection_violations += selection as usize;
        if report.first_counterexample.is_none() {
            report.first_counterexample = cx;
        }
    }
    debug_assert!(report.value_violations >= report.selection_violations);
    Ok(report)
}
