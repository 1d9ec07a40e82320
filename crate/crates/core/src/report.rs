//! CSV and SVG renderings of experiment results.
//!
//! Numbers are written in Rust's shortest round-trip form, so identical
//! results always produce identical bytes.

use std::fmt::Write as _;

use crate::diagnostics::RateFit;
use crate::montecarlo::{ExperimentSummary, Sweep};

pub const REPLICATE_HEADER: &str = "replicate,model,n,p,s,gamma,estimator,fp,tp,fn,fdp,l2_sq,runtime_ms";
pub const SUMMARY_HEADER: &str = "n,p,s,estimator,mean_fp,se_fp,fdr,se_fdr,mean_l2_sq,freq_fp_zero,freq_exact_recovery,dropped_zero_fdr_points";
pub const FIT_HEADER: &str = "slope,intercept,r_squared,points_used";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per replicate, for every summary in order.
pub fn replicates_csv(summaries: &[ExperimentSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPLICATE_HEADER}");
    for s in summaries {
        for r in &s.rows {
            let d = &r.diagnostics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.replicate,
                s.config.model.as_str(),
                s.n,
                s.p,
                s.s,
                opt(s.gamma),
                s.estimator,
                d.fp,
                d.tp,
                d.fn_count,
                d.fdp,
                d.l2_sq,
                opt(r.runtime_ms),
            );
        }
    }
    out
}

/// One row per summary. `dropped[i]` marks a point left out of a sweep fit;
/// single experiments pass `None` and report 0.
pub fn summary_csv(summaries: &[ExperimentSummary], dropped: Option<&[bool]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SUMMARY_HEADER}");
    for (i, s) in summaries.iter().enumerate() {
        let d = dropped.map(|d| d[i] as u8).unwrap_or(0);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.p,
            s.s,
            s.estimator,
            s.mean_fp,
            s.se_fp,
            s.mean_fdp,
            s.se_fdp,
            s.mean_l2_sq,
            s.freq_fp_zero,
            s.freq_exact_recovery,
            d
        );
    }
    out
}

pub fn fit_csv(fit: &RateFit, points_used: usize) -> String {
    format!(
        "{FIT_HEADER}\n{},{},{},{}\n",
        fit.slope, fit.intercept, fit.r_squared, points_used
    )
}

/// A single line series, optionally with a fitted straight line.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)`.
    pub fitted_line: Option<(f64, f64)>,
}

impl PlotSeries {
    /// `log FDR` against `log(s/p)` for the points kept in the fit.
    pub fn from_sweep(sweep: &Sweep) -> Self {
        let points = sweep
            .summaries
            .iter()
            .zip(&sweep.dropped)
            .filter(|(_, d)| !**d)
            .map(|(s, _)| (s.sparsity_ratio().ln(), s.mean_fdp.ln()))
            .collect();
        Self {
            x_label: "log(s/n)".into(),
            y_label: "log(FDR)".into(),
            points,
            fitted_line: Some((sweep.fit.slope, sweep.fit.intercept)),
        }
    }

    /// Static SVG 1.1 line chart. Returns `None` when there are no points.
    pub fn to_svg(&self) -> Option<String> {
        if self.points.is_empty() {
            return None;
        }
        const W: f64 = 640.0;
        const H: f64 = 480.0;
        const M: f64 = 60.0;

        let (mut x0, mut x1) = bounds(self.points.iter().map(|p| p.0));
        let (mut y0, mut y1) = bounds(self.points.iter().map(|p| p.1));
        if let Some((a, b)) = self.fitted_line {
            let (f0, f1) = bounds([a * x0 + b, a * x1 + b].into_iter());
            y0 = y0.min(f0);
            y1 = y1.max(f1);
        }
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<line x1="{M}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
            b = H - M,
            r = W - M
        );
        let _ = writeln!(svg, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{b}" stroke="black"/>"#, b = H - M);
        for (i, (v, px)) in [(x0, sx(x0)), (x1, sx(x1))].into_iter().enumerate() {
            let anchor = if i == 0 { "start" } else { "end" };
            let _ = writeln!(
                svg,
                r#"<text x="{px:.2}" y="{y:.2}" font-size="12" text-anchor="{anchor}">{v:.3}</text>"#,
                y = H - M + 16.0
            );
        }
        for (v, py) in [(y0, sy(y0)), (y1, sy(y1))] {
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{py:.2}" font-size="12" text-anchor="end">{v:.3}</text>"#,
                x = M - 6.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            escape(&self.x_label),
            x = W / 2.0,
            y = H - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{y:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {y:.2})">{}</text>"#,
            escape(&self.y_label),
            y = H / 2.0
        );
        if let Some((a, b)) = self.fitted_line {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
                sx(x0),
                sy(a * x0 + b),
                sx(x1),
                sy(a * x1 + b)
            );
        }
        let mut sorted = self.points.clone();
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
        let path: Vec<String> = sorted.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, y) in &sorted {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#,
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(svg, "</svg>");
        Some(svg)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = *hi - *lo;
    let margin = if span > 0.0 { 0.05 * span } else { 0.5 };
    *lo -= margin;
    *hi += margin;
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
