use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use super::fig1::Fig1Result;
use super::montecarlo::MonteCarloSummary;
use super::run::RunRecord;
use super::HarnessError;
use crate::analysis::MetricSample;
use crate::objectives::BilinearLogisticData;

pub const METRICS_HEADER: &str = "k,consensus_error,avg_grad_norm,objective,dist_to_targets";

/// 17 significant digits; NaN and missing values become empty cells.
fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn metrics_csv(series: &[MetricSample]) -> String {
    let mut s = String::with_capacity(80 * (series.len() + 1));
    s.push_str(METRICS_HEADER);
    s.push('\n');
    for r in series {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.k,
            num(r.consensus_error),
            num(r.avg_grad_norm),
            num(r.objective),
            opt(r.dist_to_targets)
        );
    }
    s
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn prepare(dir: &Path, files: &[&str], overwrite: bool) -> Result<Vec<PathBuf>, HarnessError> {
    let paths: Vec<PathBuf> = files.iter().map(|f| dir.join(f)).collect();
    if !overwrite {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(HarnessError::Exists(p.clone()));
        }
    }
    fs::create_dir_all(dir).map_err(io(dir))?;
    Ok(paths)
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io(path))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes `metrics.csv`, `meta.json` and, when the series is non-empty,
/// `chart.svg` under `dir`.
pub fn emit_outputs(record: &RunRecord, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>, HarnessError> {
    let paths = prepare(dir, &["metrics.csv", "meta.json", "chart.svg"], overwrite)?;
    write(&paths[0], &metrics_csv(&record.series))?;
    write(&paths[1], &json(record))?;
    if record.series.is_empty() {
        return Ok(paths[..2].to_vec());
    }
    let pick = |f: fn(&MetricSample) -> Option<f64>| -> Vec<(f64, f64)> {
        record.series.iter().filter_map(|s| f(s).map(|v| (s.k as f64, v))).collect()
    };
    let mut series = vec![
        ChartSeries { name: "consensus error".into(), points: pick(|s| Some(s.consensus_error)) },
        ChartSeries { name: "avg gradient norm".into(), points: pick(|s| Some(s.avg_grad_norm)) },
    ];
    let dist = pick(|s| s.dist_to_targets);
    if !dist.is_empty() {
        series.push(ChartSeries {
            name: format!("agent {} distance to minimizers", record.config.metrics.track_agent),
            points: dist,
        });
    }
    write(&paths[2], &svg_line_chart("run metrics", "k", &series))?;
    Ok(paths)
}

pub fn emit_monte_carlo(summary: &MonteCarloSummary, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>, HarnessError> {
    let paths = prepare(dir, &["summary.json", "trials.csv"], overwrite)?;
    write(&paths[0], &json(summary))?;
    let mut csv = String::from("trial,outcome,dist_saddle,dist_second_order,saddle_trapped,second_order_converged\n");
    for t in &summary.per_trial {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            t.trial,
            t.outcome,
            opt(t.dist_saddle),
            opt(t.dist_second_order),
            t.saddle_trapped,
            t.second_order_converged
        );
    }
    write(&paths[1], &csv)?;
    Ok(paths)
}

#[derive(Serialize)]
struct Fig1Meta<'a> {
    spec: &'a super::config::Fig1Spec,
    seed: u64,
    iters: usize,
    agent: usize,
    saddle: &'a [f64],
    stable_direction: &'a [f64],
    x0: &'a crate::point::StackedPoint,
    bad_x0: &'a crate::point::StackedPoint,
    extra_final_distance: Option<f64>,
    dgd_final_distance: Option<f64>,
    bad_final_distance: Option<f64>,
}

pub fn emit_fig1(result: &Fig1Result, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>, HarnessError> {
    let paths = prepare(dir, &["fig1.csv", "fig1.svg", "meta.json"], overwrite)?;
    let mut csv = String::from("k,extra_dist,dgd_dist,bad_init_dist\n");
    for ((e, d), b) in result.extra.iter().zip(&result.dgd).zip(&result.bad) {
        let _ = writeln!(csv, "{},{},{},{}", e.k, opt(e.dist_to_targets), opt(d.dist_to_targets), opt(b.dist_to_targets));
    }
    write(&paths[0], &csv)?;
    let line = |name: &str, s: &[MetricSample]| ChartSeries {
        name: name.into(),
        points: s.iter().filter_map(|r| r.dist_to_targets.map(|v| (r.k as f64, v))).collect(),
    };
    let series = [
        line("EXTRA, constant step", &result.extra),
        line("DGD, diminishing step", &result.dgd),
        line("EXTRA, start near the saddle", &result.bad),
    ];
    let title = format!("agent {} distance to the minimizer set", result.agent);
    write(&paths[1], &svg_line_chart(&title, "k", &series))?;
    let meta = Fig1Meta {
        spec: &result.spec,
        seed: result.seed,
        iters: result.iters,
        agent: result.agent,
        saddle: &result.saddle,
        stable_direction: &result.stable_direction,
        x0: &result.x0,
        bad_x0: &result.bad_x0,
        extra_final_distance: Fig1Result::final_distance(&result.extra),
        dgd_final_distance: Fig1Result::final_distance(&result.dgd),
        bad_final_distance: Fig1Result::final_distance(&result.bad),
    };
    write(&paths[2], &json(&meta))?;
    Ok(paths)
}

/// `i,zeta,xi` with 1-based agent indices.
pub fn export_dataset_csv(data: &BilinearLogisticData, path: &Path) -> Result<(), HarnessError> {
    let mut csv = String::from("i,zeta,xi\n");
    for (i, (z, x)) in data.labels.iter().zip(&data.features).enumerate() {
        let _ = writeln!(csv, "{},{},{}", i + 1, z, num(*x));
    }
    write(path, &csv)
}

/// Dense, row-major, no header.
pub fn export_matrix_csv(a: &DMatrix<f64>, path: &Path) -> Result<(), HarnessError> {
    let mut csv = String::new();
    for r in a.row_iter() {
        let row: Vec<String> = r.iter().map(|v| num(*v)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write(path, &csv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static line chart with a log10 y axis. Non-positive values are dropped.
pub fn svg_line_chart(title: &str, x_label: &str, series: &[ChartSeries]) -> String {
    let (w, h) = (760.0, 460.0);
    let (left, right, top, bottom) = (80.0, 220.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let pts = series.iter().flat_map(|s| s.points.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let decades = (y1 - y0) as i64;
    let step = (decades / 8).max(1);
    let mut e = y0 as i64;
    while e <= y1 as i64 {
        let y = sy(10f64.powi(e as i32));
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0);
        e += step;
    }
    for t in 0..=4 {
        let x = x0 + (x1 - x0) * t as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, sx(x), top + ph + 16.0, x.round());
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 12.0, escape(x_label));
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
