//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{ChiSquared as ChiSquaredSampler, Distribution, StandardNormal};
use sparse_fdr::config::EstimatorConfig;
use sparse_fdr::means::{counterexample_estimate, no_false_positive_threshold};
use sparse_fdr::monotone::shrinking_model_pair;
use sparse_fdr::nalgebra::{DMatrix, DVector};
use sparse_fdr::regression::{gaussian_design, regression_response};
use sparse_fdr::{
    audit_monotonicity, chi_square_tail, run_experiment, run_sweep, seeded_substream, solve_means_log_factorial,
    solve_regression_penalized, worst_case_beta, AuditConfig, ExperimentConfig, LogFactorialPenalty, MeansEstimator,
    Model, SearchMethod, SparseVector, SparsityRule, TruthRule,
};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

fn means_config(n: usize, rule: SparsityRule, estimator: EstimatorConfig, replicates: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model: Model::Means,
        n,
        p: None,
        sparsity_rule: Some(rule),
        signal_c: 2.0,
        estimator,
        replicates,
        master_seed: seed,
        truth: TruthRule::WorstCase,
        n_values: None,
    }
}

fn phi(t: f64) -> f64 {
    Normal::standard().cdf(t)
}

fn binomial_fp_law() -> Outcome {
    let start = Instant::now();
    let (n, s, gamma, reps) = (10_000usize, 100usize, 2.5, 1000usize);
    let mut est = EstimatorConfig::named("hard_threshold");
    est.gamma = Some(gamma);
    // s spikes with zeros elsewhere: FP is counted over exactly n - s nulls.
    let cfg = means_config(n, SparsityRule::Fixed(s), est, reps, 101);
    let summary = run_experiment(&cfg).unwrap();

    let prob = 2.0 * phi(-(gamma * (n as f64 / s as f64).ln()).sqrt());
    let law = Binomial::new(prob, (n - s) as u64).unwrap();
    let expected_mean = (n - s) as f64 * prob;
    let z = (summary.mean_fp - expected_mean) / summary.se_fp;

    let max_fp = summary.rows.iter().map(|r| r.diagnostics.fp).max().unwrap();
    let mut observed = vec![0usize; max_fp + 1];
    for r in &summary.rows {
        observed[r.diagnostics.fp] += 1;
    }
    // Pool adjacent counts until every cell expects at least 5; the upper
    // tail beyond the last observed count joins the final cell.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for k in 0..=max_fp {
        o_acc += observed[k] as f64;
        e_acc += reps as f64 * law.pmf(k as u64);
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    e_acc += reps as f64 * law.sf(max_fp as u64);
    match cells.last_mut() {
        Some(last) if e_acc < 5.0 => {
            last.0 += o_acc;
            last.1 += e_acc;
        }
        _ => cells.push((o_acc, e_acc)),
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (cells.len() - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    let elapsed = start.elapsed();
    outcome(
        z.abs() <= 3.0 && stat < critical && within(elapsed, 30),
        format!(
            "mean FP {:.4} vs {expected_mean:.4} (z = {z:.2}); GOF {stat:.2} < {critical:.2} on {df} df; {:.1}s",
            summary.mean_fp,
            elapsed.as_secs_f64()
        ),
    )
}

fn rate_sweep() -> Outcome {
    let start = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/fig1.cfg");
    let cfg = ExperimentConfig::from_toml_str(&fs::read_to_string(path).unwrap()).unwrap();
    let grid = cfg.n_values.clone().unwrap();
    let sweep = run_sweep(&cfg, &grid).unwrap();
    let elapsed = start.elapsed();
    outcome(
        sweep.fit.r_squared >= 0.95 && sweep.fit.slope > 0.0 && within(elapsed, 600),
        format!(
            "R^2 = {:.4}, slope = {:.4}, {} points ({} dropped); {:.1}s",
            sweep.fit.r_squared,
            sweep.fit.slope,
            sweep.points_used,
            sweep.dropped_count(),
            elapsed.as_secs_f64()
        ),
    )
}

fn rate_probe_config() -> ExperimentConfig {
    let mut est = EstimatorConfig::named("log_factorial");
    est.gamma = Some(3.0);
    means_config(1 << 14, SparsityRule::SqrtN, est, 500, 55)
}

fn fp_tp_probe() -> Outcome {
    let start = Instant::now();
    let summary = run_experiment(&rate_probe_config()).unwrap();
    let n = summary.n as f64;
    let hits = summary
        .rows
        .iter()
        .filter(|r| {
            let (fp, tp) = (r.diagnostics.fp as f64, r.diagnostics.tp as f64);
            (tp == 0.0 && fp == 0.0) || (tp > 0.0 && fp / tp <= (tp / n).powf(0.5))
        })
        .count();
    let freq = hits as f64 / summary.rows.len() as f64;
    let elapsed = start.elapsed();
    outcome(
        freq >= 0.9 && within(elapsed, 120),
        format!("event held in {hits}/{} = {freq:.3}; {:.1}s", summary.rows.len(), elapsed.as_secs_f64()),
    )
}

fn l2_probe() -> Outcome {
    let summary = run_experiment(&rate_probe_config()).unwrap();
    let (n, s) = (summary.n as f64, summary.s as f64);
    let bound = (3.0 + 1.0) * s * (n / s).ln();
    let hits = summary.rows.iter().filter(|r| r.diagnostics.l2_sq <= bound).count();
    let freq = hits as f64 / summary.rows.len() as f64;
    outcome(
        freq >= 0.95,
        format!("bound {bound:.1} held in {hits}/{} = {freq:.3}", summary.rows.len()),
    )
}

fn means_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let instances = 1000;
    for i in 0..instances {
        let mut rng = seeded_substream(505, i);
        let n = rng.random_range(1..=12usize);
        let p_tilde = rng.random_range(1..=n);
        let gamma = rng.random_range(0.5..4.0);
        let y: Vec<f64> = (0..n)
            .map(|_| {
                let spike = if rng.random::<f64>() < 0.3 { rng.random_range(-4.0..4.0) } else { 0.0 };
                spike + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();

        let pe = |k: usize| -> f64 { (1..=k).map(|j| gamma * (n as f64 / j as f64).ln()).sum() };
        let mut best = (f64::INFINITY, usize::MAX, 0u32);
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k > p_tilde {
                continue;
            }
            let rss: f64 = (0..n).filter(|j| mask & (1 << j) == 0).map(|j| y[j] * y[j]).sum();
            let obj = rss + pe(k);
            if obj < best.0 || (obj == best.0 && k < best.1) {
                best = (obj, k, mask);
            }
        }
        let oracle: Vec<usize> = (0..n).filter(|j| best.2 & (1 << j) != 0).collect();

        let pen = LogFactorialPenalty::new(gamma, n, p_tilde).unwrap();
        let est = solve_means_log_factorial(&SparseVector::new(y).unwrap(), &pen).unwrap();
        if est.beta_hat.support() != oracle {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, 60),
        format!("{mismatches} support mismatches in {instances} instances; {:.1}s", elapsed.as_secs_f64()),
    )
}

fn svd_rss(x: &DMatrix<f64>, y: &DVector<f64>, subset: &[usize]) -> f64 {
    if subset.is_empty() {
        return y.norm_squared();
    }
    let xs = x.select_columns(subset);
    let coef = xs.clone().svd(true, true).solve(y, 1e-12).unwrap();
    (y - xs * coef).norm_squared()
}

fn regression_oracle() -> Outcome {
    let (n, p, p_tilde, gamma) = (30usize, 10usize, 4usize, 2.5);
    let pen = LogFactorialPenalty::new(gamma, p, p_tilde).unwrap();
    let pe = |k: usize| -> f64 { (1..=k).map(|j| gamma * (p as f64 / j as f64).ln()).sum() };
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << p) {
        if mask.count_ones() as usize <= p_tilde {
            subsets.push((0..p).filter(|j| mask & (1 << j) != 0).collect());
        }
    }
    let (mut subset_mismatch, mut worst_rel) = (0, 0.0f64);
    for i in 0..100 {
        let mut rng = seeded_substream(606, i);
        let x = gaussian_design(n, p, &mut rng);
        let s = rng.random_range(1..=3usize);
        let beta = worst_case_beta(p, s, 4.0, Some(n), &mut rng).unwrap();
        let y = regression_response(&x, &beta, &mut rng);

        let mut best: Option<(f64, &Vec<usize>, f64)> = None;
        for sub in &subsets {
            let rss = svd_rss(&x, &y, sub);
            let sc = rss + pe(sub.len());
            let better = match best {
                None => true,
                Some((b, bs, _)) => sc < b || (sc == b && (sub.len(), sub) < (bs.len(), bs)),
            };
            if better {
                best = Some((sc, sub, rss));
            }
        }
        let (_, oracle_subset, oracle_rss) = best.unwrap();
        let fit = solve_regression_penalized(&x, &y, &pen, SearchMethod::exhaustive()).unwrap();
        if &fit.score.subset != oracle_subset {
            subset_mismatch += 1;
        }
        let rel = (fit.score.rss - oracle_rss).abs() / oracle_rss.max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(rel);
    }
    outcome(
        subset_mismatch == 0 && worst_rel <= 1e-8,
        format!("{subset_mismatch} subset mismatches in 100 instances; worst relative RSS gap {worst_rel:.2e}"),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-fdr"))
}

fn counterexample_pair() -> Outcome {
    let (n, gamma) = (50usize, 2.5);
    let (y1, y2) = shrinking_model_pair(n, gamma).unwrap();
    let ln = (n as f64).ln();
    let (a1, a2, a3) = (y1.get(0).powi(2), y1.get(1).powi(2), y2.get(1).powi(2));
    let ordered = a3 > gamma * ln && gamma * ln > a1 && a1 > a2 && a2 > gamma * (ln + (n as f64 / 2.0).ln()) / 2.0;

    let s1 = counterexample_estimate(&y1, gamma).unwrap().beta_hat.support();
    let s2 = counterexample_estimate(&y2, gamma).unwrap().beta_hat.support();

    let mut cfg = AuditConfig::new(1000, n, 77);
    cfg.inject = Some((y2.clone(), y1.clone()));
    let report = audit_monotonicity(&MeansEstimator::Counterexample { gamma }, &cfg).unwrap();
    let flagged = report.selection_violations >= 1 && report.first_counterexample.as_ref().is_some_and(|c| c.trial == 0);

    let dir = tempfile::tempdir().unwrap();
    let cli = bin()
        .args(["audit", "counterexample", "--gamma", "2.5", "--trials", "10000", "--inject-paper-pair", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let cli_code = cli.status.code();
    let dumped = String::from_utf8_lossy(&cli.stdout).contains("trial=0\ny=");

    outcome(
        ordered && s1 == vec![0, 1] && s2 == vec![1] && flagged && cli_code == Some(1) && dumped,
        format!(
            "supports {{{}}} and {{{}}} (1-based); in-process selection violations {}; CLI exit {:?}, pair dumped: {dumped}",
            s1.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","),
            s2.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","),
            report.selection_violations,
            cli_code
        ),
    )
}

fn monotone_estimators() -> Outcome {
    let n = 50;
    let s = 7;
    let estimators = [
        MeansEstimator::HardThreshold { gamma: 2.0, s },
        MeansEstimator::FixedThreshold {
            t: no_false_positive_threshold(n, s).unwrap(),
        },
        MeansEstimator::LogFactorial { gamma: 2.1, p_tilde: n },
        MeansEstimator::TopS { s },
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for est in &estimators {
        let report = audit_monotonicity(est, &AuditConfig::new(10_000, n, 88)).unwrap();
        pass &= report.selection_violations == 0;
        parts.push(format!("{} {}", est.name(), report.selection_violations));
    }
    outcome(pass, format!("selection violations over 10^4 pairs: {}", parts.join(", ")))
}

fn no_false_positive_threshold_rate() -> Outcome {
    let (n, s, reps) = (10_000usize, 100usize, 10_000usize);
    let cfg = means_config(n, SparsityRule::Fixed(s), EstimatorConfig::named("fixed_threshold"), reps, 909);
    let summary = run_experiment(&cfg).unwrap();
    let t = (2.0 * ((n - s) as f64).ln()).sqrt();
    let p0 = 1.0 - (1.0 - 2.0 * phi(-t)).powi((n - s) as i32);
    let observed = 1.0 - summary.freq_fp_zero;
    let se = (p0 * (1.0 - p0) / reps as f64).sqrt();
    let z = (observed - p0) / se;
    outcome(
        z.abs() <= 3.0,
        format!("P(FP > 0) = {observed:.4} vs {p0:.4} (z = {z:.2}) at t = {t:.4}"),
    )
}

fn chi_square_concentration() -> Outcome {
    let draws = 1_000_000usize;
    let mut pass = true;
    let mut parts = Vec::new();
    for (idx, &(d, kappa, x)) in [(10.0, 0.0, 1.0), (100.0, 5.0, 3.0), (1.0, 0.0, 9.0)].iter().enumerate() {
        let bound = chi_square_tail(d, kappa, x).unwrap();
        let mut rng = seeded_substream(1010, idx as u64);
        let rest = (d > 1.0).then(|| ChiSquaredSampler::new(d - 1.0).unwrap());
        let shift = f64::sqrt(kappa);
        let mut exceed = 0usize;
        for _ in 0..draws {
            let z: f64 = rng.sample(StandardNormal);
            let v = (z + shift).powi(2) + rest.as_ref().map_or(0.0, |c| c.sample(&mut rng));
            if v >= bound.upper_tail_point {
                exceed += 1;
            }
        }
        let rate = exceed as f64 / draws as f64;
        let se = (rate * (1.0 - rate) / draws as f64).sqrt();
        let limit = (-x).exp() + 3.0 * se;
        pass &= rate <= limit;
        parts.push(format!("({d}, {kappa}, {x}): {rate:.2e} <= {limit:.2e}"));
    }
    outcome(pass, parts.join("; "))
}

fn cli_thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "means.toml",
            "experiment",
            r#"
model = "means"
n = 3000
sparsity_rule = "sqrt_n"
signal_c = 2.0
replicates = 60
master_seed = 1111

[estimator]
name = "log_factorial"
gamma = 2.1
"#,
        ),
        (
            "regression.toml",
            "experiment",
            r#"
model = "regression"
n = 40
p = 12
sparsity_rule = { fixed = 2 }
signal_c = 6.0
replicates = 20
master_seed = 1212

[estimator]
name = "log_factorial"
gamma = 2.1
p_tilde = 4
"#,
        ),
        (
            "sweep.toml",
            "sweep",
            r#"
model = "means"
n = 512
sparsity_rule = "sqrt_n"
signal_c = 2.0
replicates = 40
master_seed = 1313
n_values = [512, 1024, 2048, 4096]

[estimator]
name = "bh_stepup"
q = 0.2
"#,
        ),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for (file, cmd, body) in configs {
        let cfg = dir.path().join(file);
        fs::write(&cfg, body).unwrap();
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = dir.path().join(format!("{file}-{threads}"));
            let run = bin()
                .args([cmd, cfg.to_str().unwrap(), "--threads", threads, "--out"])
                .arg(&out)
                .output()
                .unwrap();
            if !run.status.success() {
                return outcome(false, format!("{cmd} {file} --threads {threads} exited with {}", run.status));
            }
            outputs.push(out);
        }
        let mut names: Vec<_> = fs::read_dir(&outputs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .filter(|n| n.to_string_lossy().ends_with(".csv"))
            .collect();
        names.sort();
        for name in names {
            compared += 1;
            let a = fs::read(outputs[0].join(&name)).unwrap();
            let b = fs::read(outputs[1].join(&name)).ok();
            if b.as_deref() != Some(a.as_slice()) {
                differing.push(format!("{file}/{}", name.to_string_lossy()));
            }
        }
    }
    outcome(
        differing.is_empty() && compared >= 7,
        format!("{compared} CSV files compared across --threads 1 and 4; differing: {differing:?}"),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 11] = [
        ("binomial false-positive law", binomial_fp_law),
        ("log(FDR) against log(s/n) sweep", rate_sweep),
        ("FP/TP polynomial rate probe", fp_tp_probe),
        ("L2 risk probe", l2_probe),
        ("means solver equals brute force", means_oracle),
        ("regression solver equals enumeration oracle", regression_oracle),
        ("shrinking-model counterexample", counterexample_pair),
        ("monotone estimators audit clean", monotone_estimators),
        ("no-false-positive threshold rate", no_false_positive_threshold_rate),
        ("chi-square tail bound", chi_square_concentration),
        ("thread-count determinism", cli_thread_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
