//! Growth-rate diagnostics and empirical-vs-bound reporting.
//!
//! Fits run on the tail of a series (early rounds are distorted by window
//! zero-padding). Degenerate series with no variance report `r^2 = 0`
//! instead of erroring; zero-gradient runs are legitimate fixtures.

use crate::error::{Error, Result};
use crate::regret::RegretSeries;

/// Tolerance on the pass criterion of [`bound_report`].
pub const BOUND_REPORT_TOL: f64 = 1e-9;

/// Power-law fit of a cumulative series: slope of `ln cumulative` vs `ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub tail_start: usize,
}

fn check_tail(series: &RegretSeries, tail_start: usize) -> Result<()> {
    if tail_start < 1 {
        return Err(Error::InvalidParameter {
            name: "tail_start",
            reason: "must be at least 1 (rounds are 1-based)".into(),
        });
    }
    if series.len() < tail_start + 10 {
        return Err(Error::TooShort {
            needed: tail_start + 10,
            have: series.len(),
        });
    }
    Ok(())
}

/// Simple least squares with the degenerate-variance convention.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    // a constant series still shows ~ulp scatter around its rounded mean;
    // treat variance at that level as zero
    let y_floor = (1e-12 * mean_y.abs().max(1e-300)).powi(2) * n;
    if sxx == 0.0 || syy <= y_floor {
        return (0.0, mean_y, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = (sxy * sxy) / (sxx * syy);
    (slope, intercept, r_squared)
}

/// Least-squares fit of `ln cumulative[t]` against `ln t` over `t >= tail_start`.
pub fn growth_exponent(series: &RegretSeries, tail_start: usize) -> Result<GrowthFit> {
    check_tail(series, tail_start)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, &c) in series.cumulative().iter().enumerate() {
        let t = idx + 1;
        if t < tail_start {
            continue;
        }
        if c <= 0.0 {
            return Err(Error::NonPositiveSeries { t });
        }
        xs.push((t as f64).ln());
        ys.push(c.ln());
    }
    let (exponent, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(GrowthFit {
        exponent,
        intercept,
        r_squared,
        tail_start,
    })
}

fn fit_quality_against<F>(series: &RegretSeries, tail_start: usize, regressor: F) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    check_tail(series, tail_start)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, &c) in series.cumulative().iter().enumerate() {
        let t = idx + 1;
        if t < tail_start {
            continue;
        }
        xs.push(regressor(t));
        ys.push(c);
    }
    let (_, _, r_squared) = least_squares(&xs, &ys);
    Ok(r_squared)
}

/// `r^2` of fitting `cumulative[t]` against `1 + ln t` linearly; near 1
/// indicates logarithmic growth.
pub fn log_fit_quality(series: &RegretSeries, tail_start: usize) -> Result<f64> {
    fit_quality_against(series, tail_start, |t| 1.0 + (t as f64).ln())
}

/// `r^2` of fitting `cumulative[t]` against `t` linearly, for comparison
/// with [`log_fit_quality`] on the same tail.
pub fn linear_fit_quality(series: &RegretSeries, tail_start: usize) -> Result<f64> {
    fit_quality_against(series, tail_start, |t| t as f64)
}

/// One row of an envelope report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub t: usize,
    pub cumulative: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Per-round comparison of a cumulative series against bound values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub max_ratio: f64,
    pub pass: bool,
    /// First round where the bound was exceeded, if any.
    pub first_violation: Option<usize>,
}

/// Compares `cumulative[t]` to `bound_values[t]` per round; passes when the
/// maximum ratio stays at or below `1 + 1e-9`.
pub fn bound_report(series: &RegretSeries, bound_values: &[f64]) -> Result<BoundReport> {
    if series.len() != bound_values.len() {
        return Err(Error::LengthMismatch {
            left: series.len(),
            right: bound_values.len(),
        });
    }
    let mut rows = Vec::with_capacity(bound_values.len());
    let mut max_ratio = 0.0_f64;
    let mut first_violation = None;
    for (idx, (&cumulative, &bound)) in series.cumulative().iter().zip(bound_values).enumerate() {
        let t = idx + 1;
        let ratio = if cumulative == 0.0 {
            0.0
        } else if bound > 0.0 {
            cumulative / bound
        } else {
            f64::INFINITY
        };
        if ratio > 1.0 + BOUND_REPORT_TOL && first_violation.is_none() {
            first_violation = Some(t);
        }
        max_ratio = max_ratio.max(ratio);
        rows.push(BoundRow {
            t,
            cumulative,
            bound,
            ratio,
        });
    }
    Ok(BoundReport {
        rows,
        max_ratio,
        pass: max_ratio <= 1.0 + BOUND_REPORT_TOL,
        first_violation,
    })
}
