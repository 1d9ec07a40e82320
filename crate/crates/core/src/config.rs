//! Experiment configuration: the on-disk TOML schema and its validation.
//!
//! ```toml
//! model = "means"
//! n = 1024
//! sparsity_rule = "sqrt_n"          # or { fixed = 10 }, { poly = 0.5 }, { linear = 0.1 }
//! signal_c = 2.0
//! replicates = 100
//! master_seed = 42
//! n_values = [1024, 2048, 4096]     # sweeps only
//!
//! [estimator]
//! name = "log_factorial"
//! gamma = 2.1
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::{no_false_positive_threshold, MeansEstimator};
use crate::regression::{SearchKind, SearchMethod, DEFAULT_GUARD_LIMIT};
use crate::types::{LogFactorialPenalty, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Means,
    Regression,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Means => "means",
            Model::Regression => "regression",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityRule {
    Fixed(usize),
    /// `floor(sqrt(n))`.
    SqrtN,
    /// `floor(p^alpha)`, `alpha` in (0, 1).
    Poly(f64),
    /// `floor(delta p)`, `delta` in (0, 0.9].
    Linear(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruthRule {
    /// Equal spikes `sqrt(c log(p/s))` (divided by `sqrt(n)` for regression).
    #[default]
    WorstCase,
    /// All-zero truth; `s` still parameterizes the estimator.
    Null,
    /// A fixed coefficient vector of length `p`.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_tilde: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_limit: Option<u64>,
}

impl EstimatorConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            gamma: None,
            s: None,
            t: None,
            q: None,
            p_tilde: None,
            method: None,
            guard_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub n: usize,
    /// Defaults to `n` for the means model; required for regression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity_rule: Option<SparsityRule>,
    pub signal_c: f64,
    pub estimator: EstimatorConfig,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub truth: TruthRule,
    /// Grid of `n` values for sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
}

/// A concrete estimator ready to run on one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Means(MeansEstimator),
    Regression {
        penalty: LogFactorialPenalty,
        method: SearchMethod,
    },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Means(m) => m.name(),
            Estimator::Regression { .. } => "log_factorial",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Estimator::Means(m) => m.gamma(),
            Estimator::Regression { penalty, .. } => Some(penalty.gamma()),
        }
    }
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExperiment {
    pub config: ExperimentConfig,
    pub p: usize,
    pub s: usize,
    pub truth: Option<SparseVector>,
    pub estimator: Estimator,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|sp| format!("bytes {}..{}", sp.start, sp.end))
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().to_string())
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every field and resolves defaults, before any sampling.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        if self.n == 0 {
            return Err(Error::config("n", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be positive"));
        }
        if !(self.signal_c.is_finite() && self.signal_c > 0.0) {
            return Err(Error::config("signal_c", "must be positive"));
        }
        let p = match (self.model, self.p) {
            (Model::Means, None) => self.n,
            (Model::Means, Some(p)) if p == self.n => p,
            (Model::Means, Some(_)) => return Err(Error::config("p", "must equal n for the means model")),
            (Model::Regression, Some(p)) if p > 0 => p,
            (Model::Regression, _) => return Err(Error::config("p", "regression model needs p >= 1")),
        };

        let (s, truth) = match &self.truth {
            TruthRule::Custom(values) => {
                if values.len() != p {
                    return Err(Error::config("truth.custom", format!("must have length p = {p}")));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("truth.custom", "entries must be finite"));
                }
                let v = SparseVector::new(values.clone())?;
                (v.support_size(), Some(v))
            }
            _ => {
                let rule = self
                    .sparsity_rule
                    .ok_or_else(|| Error::config("sparsity_rule", "required unless truth is custom"))?;
                (resolve_sparsity(rule, self.n, p)?, None)
            }
        };

        let estimator = self.resolve_estimator(p, s)?;
        Ok(ResolvedExperiment {
            config: self.clone(),
            p,
            s,
            truth,
            estimator,
        })
    }

    fn resolve_estimator(&self, p: usize, s: usize) -> Result<Estimator> {
        let e = &self.estimator;
        let n = self.n;
        let gamma = || {
            let g = e.gamma.ok_or_else(|| Error::config("estimator.gamma", "required"))?;
            if g.is_finite() && g > 0.0 {
                Ok(g)
            } else {
                Err(Error::config("estimator.gamma", "must be positive"))
            }
        };
        let wrap = |field: &str| {
            let field = field.to_string();
            move |err: Error| Error::config(field.clone(), err.to_string())
        };

        if self.model == Model::Regression {
            if e.name != "log_factorial" {
                return Err(Error::config(
                    "estimator.name",
                    format!("`{}` is not available for the regression model; use log_factorial", e.name),
                ));
            }
            let p_tilde = e.p_tilde.unwrap_or(n.min(p));
            if p_tilde > n.min(p) || p_tilde == 0 {
                return Err(Error::config("estimator.p_tilde", format!("must lie in [1, {}]", n.min(p))));
            }
            let penalty = LogFactorialPenalty::new(gamma()?, p, p_tilde).map_err(wrap("estimator"))?;
            let kind = match e.method.as_deref() {
                None | Some("exhaustive") => SearchKind::Exhaustive,
                Some("greedy") | Some("greedy_forward") => SearchKind::GreedyForward,
                Some(other) => {
                    return Err(Error::config(
                        "estimator.method",
                        format!("unknown search method `{other}`"),
                    ))
                }
            };
            let guard_limit = e.guard_limit.unwrap_or(DEFAULT_GUARD_LIMIT);
            if guard_limit == 0 {
                return Err(Error::config("estimator.guard_limit", "must be positive"));
            }
            return Ok(Estimator::Regression {
                penalty,
                method: SearchMethod { kind, guard_limit },
            });
        }

        let est = match e.name.as_str() {
            "hard_threshold" => {
                let s_est = e.s.unwrap_or(s);
                if s_est == 0 || s_est >= n {
                    return Err(Error::config("estimator.s", "must lie in [1, n)"));
                }
                MeansEstimator::HardThreshold {
                    gamma: gamma()?,
                    s: s_est,
                }
            }
            "fixed_threshold" => {
                let t = match e.t {
                    Some(t) => t,
                    None => no_false_positive_threshold(n, s).map_err(wrap("estimator.t"))?,
                };
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::config("estimator.t", "must be positive"));
                }
                MeansEstimator::FixedThreshold { t }
            }
            "log_factorial" => {
                let p_tilde = e.p_tilde.unwrap_or(n);
                if p_tilde == 0 || p_tilde > n {
                    return Err(Error::config("estimator.p_tilde", "must lie in [1, n]"));
                }
                MeansEstimator::LogFactorial {
                    gamma: gamma()?,
                    p_tilde,
                }
            }
            "bh_stepup" => {
                let q = e.q.ok_or_else(|| Error::config("estimator.q", "required"))?;
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::config("estimator.q", "must lie in (0, 1)"));
                }
                MeansEstimator::BhStepUp { q }
            }
            "counterexample" => {
                if n < 2 {
                    return Err(Error::config("n", "counterexample estimator needs n >= 2"));
                }
                MeansEstimator::Counterexample { gamma: gamma()? }
            }
            "top_s_oracle" => {
                let s_est = e.s.unwrap_or(s);
                if s_est == 0 || s_est > n {
                    return Err(Error::config("estimator.s", "must lie in [1, n]"));
                }
                MeansEstimator::TopS { s: s_est }
            }
            other => {
                return Err(Error::config(
                    "estimator.name",
                    format!("unknown estimator `{other}`"),
                ))
            }
        };
        Ok(Estimator::Means(est))
    }
}

pub fn resolve_sparsity(rule: SparsityRule, n: usize, p: usize) -> Result<usize> {
    let s = match rule {
        SparsityRule::Fixed(s) => s,
        SparsityRule::SqrtN => (n as f64).sqrt().floor() as usize,
        SparsityRule::Poly(alpha) => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::config("sparsity_rule.poly", "alpha must lie in (0, 1)"));
            }
            (p as f64).powf(alpha).floor() as usize
        }
        SparsityRule::Linear(delta) => {
            if !(delta > 0.0 && delta <= 0.9) {
                return Err(Error::config("sparsity_rule.linear", "delta must lie in (0, 0.9]"));
            }
            (delta * p as f64).floor() as usize
        }
    };
    if s == 0 {
        return Err(Error::config("sparsity_rule", "resolves to s = 0"));
    }
    if s as f64 > 0.9 * p as f64 {
        return Err(Error::config(
            "sparsity_rule",
            format!("resolves to s = {s}, above 0.9 p = {}", 0.9 * p as f64),
        ));
    }
    Ok(s)
}
