//! Domain types shared by every estimator.

use crate::error::{Error, Result};

/// A coefficient vector with an exact-zero support.
///
/// Storage is dense. A coordinate belongs to the support iff it is not
/// exactly `0.0`; no tolerance is ever applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<f64>,
}

impl SparseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("sparse vector must have length >= 1"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries[i]
    }

    pub fn is_selected(&self, i: usize) -> bool {
        self.entries[i] != 0.0
    }

    /// Indices of the nonzero coordinates, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0.0).count()
    }

    /// Copy of `self` with every coordinate outside `keep` set to zero.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut out = vec![0.0; self.len()];
        for &i in keep {
            out[i] = self.entries[i];
        }
        Self { entries: out }
    }
}

impl TryFrom<Vec<f64>> for SparseVector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries)
    }
}

/// The log-factorial model-size penalty `pe(k) = gamma * sum_{i<=k} log(p/i)`,
/// infinite for `k > p_tilde`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFactorialPenalty {
    gamma: f64,
    p_ambient: usize,
    p_tilde: usize,
}

impl LogFactorialPenalty {
    pub fn new(gamma: f64, p_ambient: usize, p_tilde: usize) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
        }
        if p_ambient == 0 {
            return Err(Error::domain("ambient dimension must be positive"));
        }
        if p_tilde == 0 || p_tilde > p_ambient {
            return Err(Error::domain(format!(
                "p_tilde must lie in [1, {p_ambient}], got {p_tilde}"
            )));
        }
        Ok(Self {
            gamma,
            p_ambient,
            p_tilde,
        })
    }

    /// Penalty with the trivial search cap `p_tilde = p_ambient`.
    pub fn uncapped(gamma: f64, p_ambient: usize) -> Result<Self> {
        Self::new(gamma, p_ambient, p_ambient)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p_ambient(&self) -> usize {
        self.p_ambient
    }

    pub fn p_tilde(&self) -> usize {
        self.p_tilde
    }

    /// Marginal cost `gamma * log(p/k)` of growing a model from `k-1` to `k`
    /// variables. Only meaningful for `1 <= k <= p_ambient`.
    pub fn increment(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        self.gamma * (self.p_ambient as f64 / k as f64).ln()
    }

    /// `pe(k)`; `f64::INFINITY` for inadmissible sizes `k > p_tilde`.
    pub fn value(&self, k: usize) -> f64 {
        if k > self.p_tilde {
            return f64::INFINITY;
        }
        (1..=k).map(|i| self.increment(i)).sum()
    }

    /// `[pe(0), pe(1), ..., pe(p_tilde)]`, accumulated left to right.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p_tilde + 1);
        let mut acc = 0.0;
        out.push(acc);
        for k in 1..=self.p_tilde {
            acc += self.increment(k);
            out.push(acc);
        }
        out
    }
}

/// Selection and estimation error of one estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionDiagnostics {
    pub fp: usize,
    pub tp: usize,
    pub fn_count: usize,
    /// `fp / (fp + tp)`, and 0 when nothing is selected.
    pub fdp: f64,
    pub l2_sq: f64,
    /// `|supp(est) symdiff supp(truth)| / max(1, |supp(truth)|)`.
    pub symdiff_ratio: f64,
}

impl SelectionDiagnostics {
    pub fn exact_recovery(&self) -> bool {
        self.fp == 0 && self.fn_count == 0
    }
}
