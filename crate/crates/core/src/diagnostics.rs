//! Selection metrics for one (estimate, truth) pair and closed forms for the
//! threshold estimators.

use crate::error::{Error, Result};
use crate::special::std_normal_sf;
use crate::types::{SelectionDiagnostics, SparseVector};

pub fn diagnose(estimate: &SparseVector, truth: &SparseVector) -> Result<SelectionDiagnostics> {
    if estimate.len() != truth.len() {
        return Err(Error::domain(format!(
            "estimate has length {} but truth has length {}",
            estimate.len(),
            truth.len()
        )));
    }
    let (mut fp, mut tp, mut fn_count) = (0usize, 0usize, 0usize);
    let mut l2_sq = 0.0;
    for (&e, &t) in estimate.entries().iter().zip(truth.entries()) {
        match (e != 0.0, t != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_count += 1,
            (false, false) => {}
        }
        l2_sq += (e - t) * (e - t);
    }
    let fdp = if fp + tp > 0 {
        fp as f64 / (fp + tp) as f64
    } else {
        0.0
    };
    let s = tp + fn_count;
    let out = SelectionDiagnostics {
        fp,
        tp,
        fn_count,
        fdp,
        l2_sq,
        symdiff_ratio: (fp + fn_count) as f64 / s.max(1) as f64,
    };
    debug_assert!(out.fdp >= out.fp as f64 / estimate.len() as f64);
    Ok(out)
}

/// Law of the false-positive count of the hard threshold at
/// `gamma log(n/s)` on a truth with `s` nonzeros: `Bin(n - s, 2 Phi(-sqrt(gamma log(n/s))))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialFpLaw {
    pub trial_count: usize,
    pub success_prob: f64,
    pub mean_fp: f64,
}

impl BinomialFpLaw {
    pub fn variance(&self) -> f64 {
        self.trial_count as f64 * self.success_prob * (1.0 - self.success_prob)
    }

    /// `P(FP = k)`, evaluated in log space.
    pub fn pmf(&self, k: usize) -> f64 {
        binomial_pmf(self.trial_count, self.success_prob, k)
    }
}

pub fn binomial_fp_oracle(n: usize, s: usize, gamma: f64) -> Result<BinomialFpLaw> {
    if s >= n {
        return Err(Error::domain(format!("binomial FP law needs s < n, got s={s}, n={n}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    // s = 0 makes log(n/s) infinite: nothing survives.
    let success_prob = if s == 0 {
        0.0
    } else {
        2.0 * std_normal_sf((gamma * (n as f64 / s as f64).ln()).sqrt())
    };
    let trial_count = n - s;
    Ok(BinomialFpLaw {
        trial_count,
        success_prob,
        mean_fp: trial_count as f64 * success_prob,
    })
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

pub fn binomial_pmf(trials: usize, p: f64, k: usize) -> f64 {
    if k > trials {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == trials { 1.0 } else { 0.0 };
    }
    let ln_choose = ln_factorial(trials) - ln_factorial(k) - ln_factorial(trials - k);
    (ln_choose + k as f64 * p.ln() + (trials - k) as f64 * (-p).ln_1p()).exp()
}

/// Least-squares line through `(log ratio, log fdr)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log(fdr)` on `log(ratio)`.
pub fn fdr_rate_exponent(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(r, f) in points {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(format!("sparsity ratio must lie in (0, 1), got {r}")));
        }
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(format!("FDR estimate must be positive, got {f}")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    ols_line(&xs, &ys)
}

pub(crate) fn ols_line(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("rate fit needs at least two distinct ratios"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SparseVector {
        SparseVector::new(v.to_vec()).unwrap()
    }

    fn with_support(n: usize, support: &[usize], value: f64) -> SparseVector {
        let mut v = vec![0.0; n];
        for &i in support {
            v[i] = value;
        }
        sv(&v)
    }

    #[test]
    fn identical_vectors() {
        let t = with_support(10, &[1, 4], 2.0);
        let d = diagnose(&t, &t).unwrap();
        assert_eq!((d.fp, d.tp, d.fn_count), (0, 2, 0));
        assert_eq!(d.fdp, 0.0);
        assert_eq!(d.l2_sq, 0.0);
        assert!(d.exact_recovery());
    }

    #[test]
    fn empty_estimate_uses_zero_fdp() {
        let t = with_support(10, &[0, 1, 2, 3, 4], 1.0);
        let d = diagnose(&SparseVector::zeros(10).unwrap(), &t).unwrap();
        assert_eq!((d.fp, d.tp, d.fn_count), (0, 0, 5));
        assert_eq!(d.fdp, 0.0);
        assert_eq!(d.l2_sq, 5.0);
    }

    #[test]
    fn direct_counts() {
        let e = with_support(6, &[1, 2, 3], 1.0);
        let t = with_support(6, &[3, 4], 1.0);
        let d = diagnose(&e, &t).unwrap();
        assert_eq!((d.fp, d.tp, d.fn_count), (2, 1, 1));
        assert!((d.fdp - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.symdiff_ratio, 1.5);
    }

    #[test]
    fn swapping_roles_swaps_fp_and_fn() {
        let a = sv(&[0.0, 1.0, -2.0, 0.5, 0.0, 3.0]);
        let b = sv(&[1.0, 0.0, -1.0, 0.0, 0.0, 2.0]);
        let ab = diagnose(&a, &b).unwrap();
        let ba = diagnose(&b, &a).unwrap();
        assert_eq!(ab.fp, ba.fn_count);
        assert_eq!(ab.fn_count, ba.fp);
        assert_eq!(ab.l2_sq, ba.l2_sq);
        assert_eq!(ab.fp + ab.fn_count, ba.fp + ba.fn_count);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(diagnose(&SparseVector::zeros(3).unwrap(), &SparseVector::zeros(4).unwrap()).is_err());
    }

    #[test]
    fn oracle_large_gamma_is_negligible() {
        let law = binomial_fp_oracle(100, 10, 400.0).unwrap();
        assert!(law.mean_fp < 1e-100);
        assert!(binomial_fp_oracle(100, 100, 2.0).is_err());
    }

    #[test]
    fn oracle_matches_direct_evaluation() {
        let law = binomial_fp_oracle(100, 10, 2.0).unwrap();
        let t = (2.0 * 10f64.ln()).sqrt();
        // Phi(-t) from the tail via erfc, independently of the crate helper.
        let p = libm::erfc(t / std::f64::consts::SQRT_2);
        assert_eq!(law.trial_count, 90);
        assert!((law.success_prob - p).abs() <= 1e-12 * p);
        assert!((law.mean_fp - 90.0 * p).abs() <= 1e-12 * 90.0 * p);
    }

    #[test]
    fn oracle_monotone_in_gamma_and_s() {
        let mut prev = f64::INFINITY;
        for g in [1.0, 1.5, 2.0, 2.5, 3.0, 5.0] {
            let p = binomial_fp_oracle(1000, 20, g).unwrap().success_prob;
            assert!(p < prev);
            prev = p;
        }
        let mut prev = 0.0;
        for s in [1, 5, 20, 100, 500] {
            let p = binomial_fp_oracle(1000, s, 2.0).unwrap().success_prob;
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        let law = binomial_fp_oracle(500, 20, 2.0).unwrap();
        let total: f64 = (0..=500).map(|k| law.pmf(k)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let mean: f64 = (0..=500).map(|k| k as f64 * law.pmf(k)).sum();
        assert!((mean - law.mean_fp).abs() < 1e-8);
    }

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<(f64, f64)> = [0.01, 0.05, 0.1, 0.3]
            .iter()
            .map(|&r: &f64| (r, (2.0 * r.ln() + 1.0).exp()))
            .collect();
        let fit = fdr_rate_exponent(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_rejects_bad_input() {
        assert!(fdr_rate_exponent(&[(0.1, 0.2), (0.2, 0.3)]).is_err());
        assert!(fdr_rate_exponent(&[(0.1, 0.2), (0.2, 0.0), (0.3, 0.1)]).is_err());
        assert!(fdr_rate_exponent(&[(0.1, 0.2), (0.2, -1.0), (0.3, 0.1)]).is_err());
    }
}
