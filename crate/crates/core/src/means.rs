//! Estimators for the normal means model `y = beta + eps`, `eps ~ N(0, I)`.
//!
//! Every estimator is a deterministic map `y -> beta_hat` that either keeps a
//! coordinate at its observed value or sets it to exactly zero. Orderings by
//! magnitude break ties by ascending index.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::special::std_normal_upper_quantile;
use crate::types::{LogFactorialPenalty, SparseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct MeansEstimate {
    pub beta_hat: SparseVector,
    pub selected_k: usize,
    /// Value of the minimized criterion, for estimators defined by one.
    pub objective_value: Option<f64>,
}

impl MeansEstimate {
    fn keep(y: &SparseVector, keep: &[usize], objective_value: Option<f64>) -> Self {
        let beta_hat = y.restrict(keep);
        let selected_k = beta_hat.support_size();
        Self {
            beta_hat,
            selected_k,
            objective_value,
        }
    }
}

/// Indices sorted by `|y|` descending, ties by ascending index.
pub fn magnitude_order(y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_unstable_by(|&a, &b| by_magnitude_desc(y[a], a, y[b], b));
    idx
}

fn by_magnitude_desc(va: f64, a: usize, vb: f64, b: usize) -> Ordering {
    vb.abs().total_cmp(&va.abs()).then(a.cmp(&b))
}

/// `tail[k] = sum of squares of all but the k largest |y|`, for `k = 0..=n`.
/// Accumulated from the smallest magnitudes upwards.
fn residual_tails(y: &[f64], order: &[usize]) -> Vec<f64> {
    let n = order.len();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let v = y[order[k]];
        tail[k] = tail[k + 1] + v * v;
    }
    tail
}

/// First index of the minimum; `NaN`-free input assumed.
fn first_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = k;
        }
    }
    best
}

/// Keeps `y_i` whenever `y_i^2 >= gamma * log(n / s)`.
pub fn hard_threshold(y: &SparseVector, gamma: f64, s: usize) -> Result<MeansEstimate> {
    let n = y.len();
    if s == 0 || s >= n {
        return Err(Error::domain(format!(
            "hard threshold needs 1 <= s < n, got s={s}, n={n}"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let cut = gamma * (n as f64 / s as f64).ln();
    let keep: Vec<usize> = (0..n).filter(|&i| y.get(i) * y.get(i) >= cut).collect();
    Ok(MeansEstimate::keep(y, &keep, None))
}

/// Keeps `y_i` whenever `|y_i| > t` (strict).
pub fn fixed_threshold(y: &SparseVector, t: f64) -> Result<MeansEstimate> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {t}")));
    }
    let keep: Vec<usize> = (0..y.len()).filter(|&i| y.get(i).abs() > t).collect();
    Ok(MeansEstimate::keep(y, &keep, None))
}

/// The threshold `sqrt(2 log(n - s))` above which no null coordinate is
/// expected to survive.
pub fn no_false_positive_threshold(n: usize, s: usize) -> Result<f64> {
    if s >= n || n - s < 2 {
        return Err(Error::domain(format!(
            "no-false-positive threshold needs n - s >= 2, got n={n}, s={s}"
        )));
    }
    Ok((2.0 * ((n - s) as f64).ln()).sqrt())
}

/// `S'(k) = sum_{l>k} y_(l)^2 + pe(k)` for `k = 0..=p_tilde`, where `y_(l)`
/// is the `l`-th largest coordinate in magnitude.
pub fn log_factorial_objective(y: &SparseVector, penalty: &LogFactorialPenalty) -> Result<Vec<f64>> {
    let n = y.len();
    if penalty.p_ambient() != n {
        return Err(Error::domain(format!(
            "penalty ambient dimension {} does not match n = {n}",
            penalty.p_ambient()
        )));
    }
    if penalty.p_tilde() > n {
        return Err(Error::domain(format!("p_tilde {} exceeds n = {n}", penalty.p_tilde())));
    }
    let order = magnitude_order(y.entries());
    let tail = residual_tails(y.entries(), &order);
    let pe = penalty.cumulative();
    Ok(pe.iter().enumerate().map(|(k, p)| tail[k] + p).collect())
}

/// The log-factorial penalized least-squares estimator on the means model.
///
/// For a fixed model size the best support is the top-`k` coordinates by
/// magnitude, so minimizing over `k` alone is exact. Ties in the objective go
/// to the smallest `k`.
pub fn solve_means_log_factorial(
    y: &SparseVector,
    penalty: &LogFactorialPenalty,
) -> Result<MeansEstimate> {
    let objective = log_factorial_objective(y, penalty)?;
    let k = first_argmin(&objective);
    let order = magnitude_order(y.entries());
    let est = MeansEstimate::keep(y, &order[..k], Some(objective[k]));
    Ok(est)
}

/// Step-up criterion `S(k) = sum_{l>k} y_(l)^2 + sum_{l<=k} z_l^2` with
/// `z_l = Phi^{-1}(1 - q l / 2n)`, for `k = 0..=n`.
pub fn bh_objective(y: &SparseVector, q: f64) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("FDR level must lie in (0, 1), got {q}")));
    }
    let n = y.len();
    let order = magnitude_order(y.entries());
    let tail = residual_tails(y.entries(), &order);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(tail[0]);
    for l in 1..=n {
        let z = std_normal_upper_quantile(q * l as f64 / (2.0 * n as f64))?;
        acc += z * z;
        out.push(tail[l] + acc);
    }
    Ok(out)
}

/// Largest `k` with `S(k) <= S(k-1)` and `S(k) <= S(k+1)`, where
/// `S(-1) = S(n+1) = +inf`.
pub fn rightmost_local_min(values: &[f64]) -> usize {
    let last = values.len() - 1;
    (0..=last)
        .rev()
        .find(|&k| {
            let left = if k == 0 { f64::INFINITY } else { values[k - 1] };
            let right = if k == last { f64::INFINITY } else { values[k + 1] };
            values[k] <= left && values[k] <= right
        })
        .expect("the global minimum is always a local minimum")
}

/// Step-up Benjamini-Hochberg estimator in its penalized form: keeps the
/// `k_hat` largest coordinates, `k_hat` the rightmost local minimum of `S`.
pub fn bh_stepup(y: &SparseVector, q: f64) -> Result<MeansEstimate> {
    let objective = bh_objective(y, q)?;
    let k = rightmost_local_min(&objective);
    let order = magnitude_order(y.entries());
    Ok(MeansEstimate::keep(y, &order[..k], Some(objective[k])))
}

/// Objective of the non-monotone estimator for a candidate that keeps the
/// coordinates flagged in `keep` (and zeroes the rest):
/// `||y - beta||^2 + gamma * pe(m)`, with `pe(m) = sum_{i<=m} log(n/i)` and
/// `m` the number of kept nonzero coordinates with `beta_j^2 < gamma log n`.
///
/// Only selected coordinates enter the count: counting exact zeros as well
/// would make the penalty identical across candidates that differ only in
/// which small coordinates are kept.
pub fn counterexample_objective(y: &SparseVector, gamma: f64, keep: &[bool]) -> f64 {
    let n = y.len() as f64;
    let cut = gamma * n.ln();
    let mut rss = 0.0;
    let mut small = 0usize;
    for (i, &v) in y.entries().iter().enumerate() {
        if keep[i] && v != 0.0 {
            if v * v < cut {
                small += 1;
            }
        } else {
            rss += v * v;
        }
    }
    let pe: f64 = (1..=small).map(|i| (n / i as f64).ln()).sum();
    rss + gamma * pe
}

/// The non-monotone estimator that charges the log-factorial penalty only
/// to kept coordinates below `sqrt(gamma log n)`.
///
/// Each coordinate is restricted to `{0, y_j}`. Coordinates with
/// `y_j^2 >= gamma log n` are free and always kept; among the remaining
/// nonzero ones (by `y^2` descending) the prefix minimizing
/// `T(k) = sum of dropped y^2 + gamma sum_{i<=k} log(n/i)` is kept, smallest
/// `k` on ties.
pub fn counterexample_estimate(y: &SparseVector, gamma: f64) -> Result<MeansEstimate> {
    let n = y.len();
    if n < 2 {
        return Err(Error::domain("counterexample estimator needs n >= 2"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let nf = n as f64;
    let cut = gamma * nf.ln();
    let ys = y.entries();

    let mut keep: Vec<usize> = (0..n).filter(|&i| ys[i] * ys[i] >= cut).collect();
    let mut small: Vec<usize> = (0..n)
        .filter(|&i| ys[i] != 0.0 && ys[i] * ys[i] < cut)
        .collect();
    small.sort_unstable_by(|&a, &b| by_magnitude_desc(ys[a], a, ys[b], b));

    let tail = residual_tails(ys, &small);
    let mut objective = Vec::with_capacity(small.len() + 1);
    let mut pe = 0.0;
    objective.push(tail[0]);
    for k in 1..=small.len() {
        pe += (nf / k as f64).ln();
        objective.push(tail[k] + gamma * pe);
    }
    let k = first_argmin(&objective);
    keep.extend_from_slice(&small[..k]);
    Ok(MeansEstimate::keep(y, &keep, Some(objective[k])))
}

/// Keeps exactly the `s_star` coordinates of largest magnitude.
pub fn top_s_oracle(y: &SparseVector, s_star: usize) -> Result<MeansEstimate> {
    let n = y.len();
    if s_star == 0 || s_star > n {
        return Err(Error::domain(format!(
            "top-s oracle needs 1 <= s* <= n, got s*={s_star}, n={n}"
        )));
    }
    let order = magnitude_order(y.entries());
    let beta_hat = y.restrict(&order[..s_star]);
    // Zero observations in the top s* stay zero, so count the actual support.
    let selected_k = beta_hat.support_size();
    Ok(MeansEstimate {
        beta_hat,
        selected_k,
        objective_value: None,
    })
}

/// A means-model estimator closed over its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MeansEstimator {
    HardThreshold { gamma: f64, s: usize },
    FixedThreshold { t: f64 },
    LogFactorial { gamma: f64, p_tilde: usize },
    BhStepUp { q: f64 },
    Counterexample { gamma: f64 },
    TopS { s: usize },
}

impl MeansEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            MeansEstimator::HardThreshold { .. } => "hard_threshold",
            MeansEstimator::FixedThreshold { .. } => "fixed_threshold",
            MeansEstimator::LogFactorial { .. } => "log_factorial",
            MeansEstimator::BhStepUp { .. } => "bh_stepup",
            MeansEstimator::Counterexample { .. } => "counterexample",
            MeansEstimator::TopS { .. } => "top_s_oracle",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            MeansEstimator::HardThreshold { gamma, .. }
            | MeansEstimator::LogFactorial { gamma, .. }
            | MeansEstimator::Counterexample { gamma } => Some(*gamma),
            _ => None,
        }
    }

    pub fn apply(&self, y: &SparseVector) -> Result<MeansEstimate> {
        match *self {
            MeansEstimator::HardThreshold { gamma, s } => hard_threshold(y, gamma, s),
            MeansEstimator::FixedThreshold { t } => fixed_threshold(y, t),
            MeansEstimator::LogFactorial { gamma, p_tilde } => {
                let pen = LogFactorialPenalty::new(gamma, y.len(), p_tilde)?;
                solve_means_log_factorial(y, &pen)
            }
            MeansEstimator::BhStepUp { q } => bh_stepup(y, q),
            MeansEstimator::Counterexample { gamma } => counterexample_estimate(y, gamma),
            MeansEstimator::TopS { s } => top_s_oracle(y, s),
        }
    }
}
