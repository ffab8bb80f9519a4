//! Workload forecasting.
//!
//! The low and high bounds of the last batch of queries are treated as two
//! univariate series. Every registered method is fitted on the first 80% of
//! a series and scored by MASE on the remaining 20%. The winner is refitted on
//! the whole series and extrapolated over the next batch.

use std::fmt;

use crate::engine::LaiEngine;
use crate::error::{LaiError, Result};
use crate::types::{Key, RangeQuery};

/// Shortest history [`predict_workload`] accepts.
pub const MIN_HISTORY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBatch {
    pub batch_index: usize,
    pub queries: Vec<RangeQuery>,
}

impl QueryBatch {
    pub fn new(batch_index: usize, queries: Vec<RangeQuery>) -> Self {
        QueryBatch {
            batch_index,
            queries,
        }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.low as f64).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.high as f64).collect()
    }
}

/// A univariate point forecaster.
pub trait ForecastMethod: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// `horizon` values following `history`. `history` is never empty.
    fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64>;
}

/// Repeats the last observation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveLast;

impl ForecastMethod for NaiveLast {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        vec![history[history.len() - 1]; horizon]
    }
}

/// Extends the line through the first and last observations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Drift;

impl ForecastMethod for Drift {
    fn name(&self) -> &'static str {
        "drift"
    }

    fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        let n = history.len();
        let last = history[n - 1];
        let slope = if n > 1 {
            (last - history[0]) / (n - 1) as f64
        } else {
            0.0
        };
        (1..=horizon).map(|k| last + slope * k as f64).collect()
    }
}

/// Linear runs separated by level jumps, e.g. groups of zooming queries.
///
/// A difference is a jump when its magnitude exceeds `jump_factor` times the
/// median absolute difference. The forecast continues the current run with
/// the slope of the latest run, then repeats the typical jump once the run
/// reaches the typical run length.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseLinear {
    pub jump_factor: f64,
}

impl Default for PiecewiseLinear {
    fn default() -> Self {
        PiecewiseLinear { jump_factor: 5.0 }
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl ForecastMethod for PiecewiseLinear {
    fn name(&self) -> &'static str {
        "piecewise"
    }

    fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        if history.len() < 3 {
            return Drift.forecast(history, horizon);
        }
        let diffs: Vec<f64> = history.windows(2).map(|w| w[1] - w[0]).collect();
        let mut mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
        let threshold = self.jump_factor * median(&mut mags);
        let is_jump: Vec<bool> = diffs.iter().map(|d| d.abs() > threshold).collect();
        let jumps: Vec<usize> = (0..diffs.len()).filter(|&i| is_jump[i]).collect();

        let last_jump = jumps.last().copied();
        let trailing: Vec<f64> = diffs[last_jump.map_or(0, |j| j + 1)..].to_vec();
        let slope = if trailing.len() >= 2 {
            mean(&trailing)
        } else {
            let smooth: Vec<f64> = diffs
                .iter()
                .zip(&is_jump)
                .filter(|(_, j)| !**j)
                .map(|(d, _)| *d)
                .collect();
            if smooth.is_empty() {
                0.0
            } else {
                mean(&smooth)
            }
        };

        // Run lengths between consecutive jumps. With fewer than two jumps the
        // period is unknown and the current run is extended indefinitely.
        let mut runs: Vec<f64> = jumps.windows(2).map(|w| (w[1] - w[0] - 1) as f64).collect();
        let (run_len, jump) = if runs.is_empty() {
            (usize::MAX, 0.0)
        } else {
            let mut jump_sizes: Vec<f64> = jumps.iter().map(|&j| diffs[j]).collect();
            (median(&mut runs).round() as usize, median(&mut jump_sizes))
        };

        let mut value = history[history.len() - 1];
        let mut run = trailing.len();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            if run < run_len {
                value += slope;
                run += 1;
            } else {
                value += jump;
                run = 0;
            }
            out.push(value);
        }
        out
    }
}

/// Repeats the last season, with the period taken as the lag of highest
/// autocorrelation.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeasonalNaive;

impl SeasonalNaive {
    pub fn period(history: &[f64]) -> Option<usize> {
        let n = history.len();
        if n < 4 {
            return None;
        }
        let mu = mean(history);
        let var: f64 = history.iter().map(|x| (x - mu).powi(2)).sum();
        if var == 0.0 {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for lag in 2..=n / 2 {
            let r: f64 = (0..n - lag)
                .map(|t| (history[t] - mu) * (history[t + lag] - mu))
                .sum::<f64>()
                / var;
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((lag, r));
            }
        }
        best.map(|(lag, _)| lag)
    }
}

impl ForecastMethod for SeasonalNaive {
    fn name(&self) -> &'static str {
        "seasonal"
    }

    fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        let Some(p) = Self::period(history) else {
            return NaiveLast.forecast(history, horizon);
        };
        let season = &history[history.len() - p..];
        (0..horizon).map(|k| season[k % p]).collect()
    }
}

/// The method set used by the engine, in tie-breaking order.
pub fn default_methods() -> Vec<Box<dyn ForecastMethod>> {
    vec![
        Box::new(NaiveLast),
        Box::new(Drift),
        Box::new(PiecewiseLinear::default()),
        Box::new(SeasonalNaive),
    ]
}

/// Mean absolute scaled error of `predicted` against `actual`, scaled by the
/// in-sample one-step naive error on `training`.
///
/// A constant training series gives a zero scale; the score is then 0 for a
/// perfect forecast and infinite otherwise.
pub fn mase(actual: &[f64], predicted: &[f64], training: &[f64]) -> Result<f64> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(LaiError::precondition(format!(
            "mase needs equal non-empty series, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    if training.len() < 2 {
        return Err(LaiError::precondition(
            "mase needs at least two training points",
        ));
    }
    let scale = training
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum::<f64>()
        / (training.len() - 1) as f64;
    let err = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum::<f64>()
        / actual.len() as f64;
    if scale == 0.0 {
        return Ok(if err == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(err / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Low,
    High,
}

impl Series {
    pub fn as_str(self) -> &'static str {
        match self {
            Series::Low => "l",
            Series::High => "h",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub series: Series,
    pub method: &'static str,
    pub mase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub predicted: Vec<RangeQuery>,
    pub chosen_method_l: &'static str,
    pub chosen_method_h: &'static str,
    pub mase_scores: Vec<MethodScore>,
}

impl ForecastResult {
    /// Audit rows `batch_index,series,method,mase,chosen`, without header.
    pub fn audit_rows(&self, batch_index: usize) -> Vec<String> {
        self.mase_scores
            .iter()
            .map(|s| {
                let chosen = match s.series {
                    Series::Low => self.chosen_method_l,
                    Series::High => self.chosen_method_h,
                };
                format!(
                    "{batch_index},{},{},{},{}",
                    s.series.as_str(),
                    s.method,
                    s.mase,
                    s.method == chosen
                )
            })
            .collect()
    }
}

fn to_key(x: f64, max_key: Key) -> Key {
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= max_key as f64 {
        max_key
    } else {
        x.round() as Key
    }
}

fn select_and_forecast(
    series: Series,
    history: &[f64],
    methods: &[Box<dyn ForecastMethod>],
    horizon: usize,
    max_key: Key,
    scores: &mut Vec<MethodScore>,
) -> Result<(&'static str, Vec<Key>)> {
    let split = history.len() * 4 / 5;
    let (train, valid) = history.split_at(split);
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in methods.iter().enumerate() {
        let pred: Vec<f64> = m
            .forecast(train, valid.len())
            .into_iter()
            .map(|x| to_key(x, max_key) as f64)
            .collect();
        let score = mase(valid, &pred, train)?;
        scores.push(MethodScore {
            series,
            method: m.name(),
            mase: score,
        });
        let key = if score.is_nan() { f64::INFINITY } else { score };
        if best.is_none_or(|(_, b)| key < b) {
            best = Some((i, key));
        }
    }
    let (idx, _) = best.expect("method set is non-empty");
    let chosen = &methods[idx];
    let values = chosen
        .forecast(history, horizon)
        .into_iter()
        .map(|x| to_key(x, max_key))
        .collect();
    Ok((chosen.name(), values))
}

/// Forecasts the next `horizon` queries from `history`.
///
/// Predicted bounds are rounded and clamped into `[0, max_key]`; a predicted
/// pair with `l > h` is swapped.
pub fn predict_workload(
    history: &QueryBatch,
    methods: &[Box<dyn ForecastMethod>],
    horizon: usize,
    max_key: Key,
) -> Result<ForecastResult> {
    if methods.is_empty() {
        return Err(LaiError::Config("no forecasting methods registered".into()));
    }
    if history.len() < MIN_HISTORY {
        return Err(LaiError::precondition(format!(
            "forecasting needs at least {MIN_HISTORY} queries of history, got {}",
            history.len()
        )));
    }
    let mut scores = Vec::with_capacity(2 * methods.len());
    let (chosen_l, lows) = select_and_forecast(
        Series::Low,
        &history.lows(),
        methods,
        horizon,
        max_key,
        &mut scores,
    )?;
    let (chosen_h, highs) = select_and_forecast(
        Series::High,
        &history.highs(),
        methods,
        horizon,
        max_key,
        &mut scores,
    )?;
    let predicted = lows
        .into_iter()
        .zip(highs)
        .map(|(l, h)| RangeQuery {
            low: l.min(h),
            high: l.max(h),
        })
        .collect();
    Ok(ForecastResult {
        predicted,
        chosen_method_l: chosen_l,
        chosen_method_h: chosen_h,
        mase_scores: scores,
    })
}

/// Runs every predicted query through the engine without recording
/// statistics. Returns how many of them changed the column or the table.
pub fn apply_forecast(engine: &mut LaiEngine, forecast: &ForecastResult) -> Result<usize> {
    let mut changed = 0;
    for q in &forecast.predicted {
        let before = (engine.writes(), engine.table().len());
        engine.execute(q.low, q.high)?;
        if (engine.writes(), engine.table().len()) != before {
            changed += 1;
        }
    }
    Ok(changed)
}
