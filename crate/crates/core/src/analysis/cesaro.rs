use serde::{Deserialize, Serialize};

use super::{AnalysisError, MetricSample};

pub const CESARO_MIN_SAMPLES: usize = 50;

/// Partial-sum plateau test and log-log slope of the running average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesaroRate {
    pub partial_sums_bounded: bool,
    /// `-∞` when the running average is identically zero on the fit window.
    pub loglog_slope: f64,
    pub final_partial_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    pub consensus: CesaroRate,
    pub gradient: CesaroRate,
}

/// Rates of `consensus_error²` and `avg_grad_norm²` along a series.
pub fn cesaro_rates(series: &[MetricSample]) -> Result<CesaroReport, AnalysisError> {
    let ks: Vec<usize> = series.iter().map(|s| s.k).collect();
    let c: Vec<f64> = series.iter().map(|s| s.consensus_error * s.consensus_error).collect();
    let g: Vec<f64> = series.iter().map(|s| s.avg_grad_norm * s.avg_grad_norm).collect();
    Ok(CesaroReport { consensus: cesaro_rate(&ks, &c)?, gradient: cesaro_rate(&ks, &g)? })
}

/// `values[t]` is the (already squared) metric at iteration `ks[t]`; `ks`
/// must be strictly increasing and positive.
pub fn cesaro_rate(ks: &[usize], values: &[f64]) -> Result<CesaroRate, AnalysisError> {
    if ks.len() != values.len() {
        return Err(AnalysisError::Shape(format!("{} iterations vs {} values", ks.len(), values.len())));
    }
    if ks.len() < CESARO_MIN_SAMPLES {
        return Err(AnalysisError::Parameter(format!(
            "need at least {CESARO_MIN_SAMPLES} samples, got {}",
            ks.len()
        )));
    }
    if ks[0] == 0 || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::Parameter("iterations must be positive and strictly increasing".into()));
    }
    let mut partial = Vec::with_capacity(values.len());
    let mut s = 0.0;
    for v in values {
        s += v;
        partial.push(s);
    }
    let k_final = *ks.last().unwrap();
    let s_final = s;
    let s_half = ks.iter().zip(&partial).take_while(|(k, _)| **k <= k_final / 2).last().map_or(0.0, |(_, p)| *p);
    let partial_sums_bounded = s_final == 0.0 || s_final - s_half < 0.05 * s_final;

    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, p) in ks.iter().zip(&partial).skip(ks.len() / 2) {
        let avg = p / *k as f64;
        if avg <= 0.0 {
            continue;
        }
        let (lx, ly) = ((*k as f64).ln(), avg.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        cnt += 1.0;
    }
    let denom = cnt * sxx - sx * sx;
    let loglog_slope = if cnt < 2.0 || denom <= 0.0 { f64::NEG_INFINITY } else { (cnt * sxy - sx * sy) / denom };
    Ok(CesaroRate { partial_sums_bounded, loglog_slope, final_partial_sum: s_final })
}
