//! Gaussian-design regression `y = X beta + eps`: instance generation,
//! RSS scoring and the log-factorial penalized subset estimator.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ortho::{validate_subset, OrthoPath};
use crate::rng::StreamRng;
use crate::types::{LogFactorialPenalty, SparseVector};

pub const DEFAULT_GUARD_LIMIT: u64 = 2_000_000;

/// `n x p` design with i.i.d. standard normal entries, filled column by column.
pub fn gaussian_design(n: usize, p: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(n, p, data)
}

/// Least-favorable truth: `s` equal positive spikes on a uniformly random
/// support, of height `sqrt(c log(p/s))` (means scale, `n = None`) or
/// `sqrt(c log(p/s) / n)` (regression scale).
pub fn worst_case_beta(
    p: usize,
    s: usize,
    c: f64,
    n: Option<usize>,
    rng: &mut StreamRng,
) -> Result<SparseVector> {
    if s == 0 || s > p {
        return Err(Error::domain(format!("worst-case truth needs 1 <= s <= p, got s={s}, p={p}")));
    }
    if s == p {
        return Err(Error::domain("degenerate spike magnitude: log(p/s) = 0 when s = p"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("signal multiplier must be positive, got {c}")));
    }
    let mut height = c * (p as f64 / s as f64).ln();
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::domain("regression scale needs n >= 1"));
        }
        height /= n as f64;
    }
    let height = height.sqrt();
    let mut support = sample(rng, p, s).into_vec();
    support.sort_unstable();
    let mut beta = vec![0.0; p];
    for j in support {
        beta[j] = height;
    }
    SparseVector::new(beta)
}

/// `y = X beta + eps` with standard normal noise drawn from `rng`.
pub fn regression_response(x: &DMatrix<f64>, beta: &SparseVector, rng: &mut StreamRng) -> DVector<f64> {
    let b = DVector::from_column_slice(beta.entries());
    let mut y = x * b;
    for v in y.iter_mut() {
        *v += rng.sample::<f64, _>(StandardNormal);
    }
    y
}

/// Residual sum of squares of `y` after projection on the columns in `subset`.
pub fn rss(x: &DMatrix<f64>, y: &DVector<f64>, subset: &[usize]) -> Result<f64> {
    check_shapes(x, y)?;
    validate_subset(x.ncols(), subset)?;
    let mut path = OrthoPath::new(x, y);
    for &j in subset {
        path.push(j)?;
    }
    Ok(path.rss())
}

fn check_shapes(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::domain(format!(
            "design has {} rows but response has length {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::domain("design must be nonempty"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    /// Strictly increasing column indices.
    pub subset: Vec<usize>,
    pub rss: f64,
    pub penalty_value: f64,
    /// `rss + penalty_value`.
    pub sc: f64,
}

impl ModelScore {
    fn new(subset: Vec<usize>, rss: f64, penalty_value: f64) -> Self {
        Self {
            subset,
            rss,
            penalty_value,
            sc: rss + penalty_value,
        }
    }

    /// Total order: criterion, then size, then lexicographic subset.
    fn preference(&self, other: &Self) -> Ordering {
        self.sc
            .total_cmp(&other.sc)
            .then(self.subset.len().cmp(&other.subset.len()))
            .then_with(|| self.subset.cmp(&other.subset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchKind {
    Exhaustive,
    GreedyForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchMethod {
    pub kind: SearchKind,
    /// Most subsets exhaustive search may score.
    pub guard_limit: u64,
}

impl SearchMethod {
    pub fn exhaustive() -> Self {
        Self {
            kind: SearchKind::Exhaustive,
            guard_limit: DEFAULT_GUARD_LIMIT,
        }
    }

    pub fn greedy() -> Self {
        Self {
            kind: SearchKind::GreedyForward,
            guard_limit: DEFAULT_GUARD_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// Least-squares fit on the selected columns, zero elsewhere.
    pub beta_hat: SparseVector,
    pub score: ModelScore,
    /// Set for greedy search, whose result need not be the global minimizer.
    pub heuristic: bool,
}

/// Number of subsets of `{0..p}` with at most `max_size` elements.
pub fn subset_count(p: usize, max_size: usize) -> u128 {
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    for k in 0..=max_size.min(p) {
        total = total.saturating_add(choose);
        choose = choose.saturating_mul((p - k) as u128) / (k as u128 + 1);
    }
    total
}

/// Minimizes `RSS(xi) + pe(|xi|)` over subsets of size at most `p_tilde`.
pub fn solve_regression_penalized(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: &LogFactorialPenalty,
    method: SearchMethod,
) -> Result<RegressionFit> {
    check_shapes(x, y)?;
    let (n, p) = (x.nrows(), x.ncols());
    if penalty.p_ambient() != p {
        return Err(Error::domain(format!(
            "penalty ambient dimension {} does not match p = {p}",
            penalty.p_ambient()
        )));
    }
    if penalty.p_tilde() > n {
        return Err(Error::domain(format!(
            "p_tilde {} exceeds n = {n}; larger models are rank deficient",
            penalty.p_tilde()
        )));
    }
    let pe = penalty.cumulative();
    let (score, heuristic) = match method.kind {
        SearchKind::Exhaustive => {
            let required = subset_count(p, penalty.p_tilde());
            if required > method.guard_limit as u128 {
                return Err(Error::Budget {
                    required,
                    limit: method.guard_limit,
                });
            }
            (exhaustive(x, y, &pe)?, false)
        }
        SearchKind::GreedyForward => (greedy_forward(x, y, &pe)?, true),
    };

    let mut path = OrthoPath::new(x, y);
    for &j in &score.subset {
        path.push(j)?;
    }
    let mut beta = vec![0.0; p];
    for (&j, b) in path.columns().iter().zip(path.coefficients()) {
        beta[j] = b;
    }
    Ok(RegressionFit {
        beta_hat: SparseVector::new(beta)?,
        score,
        heuristic,
    })
}

fn exhaustive(x: &DMatrix<f64>, y: &DVector<f64>, pe: &[f64]) -> Result<ModelScore> {
    let p = x.ncols();
    let max_size = pe.len() - 1;
    let empty = ModelScore::new(Vec::new(), y.norm_squared(), 0.0);
    if max_size == 0 {
        return Ok(empty);
    }
    // One subtree per smallest selected column; the reduction below is a
    // total order, so the winner does not depend on scheduling.
    let branches: Vec<Result<ModelScore>> = (0..p)
        .into_par_iter()
        .map(|first| {
            let mut path = OrthoPath::new(x, y);
            let rss = path.push(first)?;
            let mut best = ModelScore::new(vec![first], rss, pe[1]);
            descend(&mut path, first + 1, pe, &mut best)?;
            Ok(best)
        })
        .collect();
    let mut best = empty;
    for b in branches {
        let b = b?;
        if b.preference(&best) == Ordering::Less {
            best = b;
        }
    }
    Ok(best)
}

fn descend(path: &mut OrthoPath<'_>, start: usize, pe: &[f64], best: &mut ModelScore) -> Result<()> {
    let depth = path.columns().len();
    if depth + 1 >= pe.len() {
        return Ok(());
    }
    let p = path.x_cols();
    for j in start..p {
        let rss = path.push(j)?;
        let cand_sc = rss + pe[depth + 1];
        if cand_sc <= best.sc {
            let cand = ModelScore::new(path.columns().to_vec(), rss, pe[depth + 1]);
            if cand.preference(best) == Ordering::Less {
                *best = cand;
            }
        }
        descend(path, j + 1, pe, best)?;
        path.pop();
    }
    Ok(())
}

fn greedy_forward(x: &DMatrix<f64>, y: &DVector<f64>, pe: &[f64]) -> Result<ModelScore> {
    let p = x.ncols();
    let max_size = pe.len() - 1;
    let mut path = OrthoPath::new(x, y);
    let mut best = ModelScore::new(Vec::new(), path.rss(), 0.0);
    let mut used = vec![false; p];
    for size in 1..=max_size {
        let mut step: Option<(usize, f64)> = None;
        for j in (0..p).filter(|&j| !used[j]) {
            let Ok(rss) = path.rss_with(j) else { continue };
            if step.is_none_or(|(_, r)| rss < r) {
                step = Some((j, rss));
            }
        }
        let Some((j, _)) = step else { break };
        let rss = path.push(j)?;
        used[j] = true;
        let mut subset = path.columns().to_vec();
        subset.sort_unstable();
        let cand = ModelScore::new(subset, rss, pe[size]);
        if cand.sc < best.sc {
            best = cand;
        }
    }
    Ok(best)
}
