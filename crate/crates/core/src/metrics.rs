//! Delay series, validity durations, delay deltas, and bad-change counts
//! derived from a route schedule.

use crate::constants::SPEED_OF_LIGHT_KM_S;
use crate::selection::RouteSchedule;
use crate::topology::{DelayModel, IslGraph};
use crate::{Error, Result};

/// A route change at an entry boundary. `delta` is the new one-way delay
/// minus the old; a negative delta lets packets overtake and counts as bad.
#[derive(Clone, Copy, Debug)]
pub struct RouteChangeEvent {
    pub t_s: f64,
    pub owd_old_s: f64,
    pub owd_new_s: f64,
    pub delta_s: f64,
    pub bad: bool,
}

/// Everything derived from one schedule under one delay model.
#[derive(Clone, Debug)]
pub struct ScheduleMetrics {
    /// One-way delay at every sample, using each entry's fixed route with
    /// time-varying link lengths.
    pub delay_series: Vec<(f64, f64)>,
    /// Lifetime of each schedule entry [s]; sums to the horizon.
    pub validity_durations_s: Vec<f64>,
    pub changes: Vec<RouteChangeEvent>,
    pub median_owd_s: f64,
    pub mean_owd_s: f64,
    pub change_count: usize,
    pub bad_change_count: usize,
    /// Exclusive end of the evaluated horizon.
    pub horizon_end_s: f64,
}

/// Evaluate a schedule: per-sample delays, boundary deltas, and aggregates.
///
/// The delta at a boundary compares the last sample strictly before it (old
/// route) with the first sample at it (new route).
pub fn evaluate(schedule: &RouteSchedule, graph: &IslGraph, model: &DelayModel) -> ScheduleMetrics {
    evaluate_with_speed(schedule, graph, model, SPEED_OF_LIGHT_KM_S)
}

pub(crate) fn evaluate_with_speed(
    schedule: &RouteSchedule,
    graph: &IslGraph,
    model: &DelayModel,
    propagation_speed_km_s: f64,
) -> ScheduleMetrics {
    let grid = &schedule.grid;
    let mut series = Vec::with_capacity(grid.steps());
    let mut bounds = Vec::with_capacity(schedule.entries.len());
    for e in &schedule.entries {
        bounds.push((e.start_idx, e.end_idx));
        for k in e.start_idx..e.end_idx {
            let t = grid.time(k);
            series.push(graph.route_delay_with_speed(&e.route, model, t, propagation_speed_km_s));
        }
    }
    from_series(grid, &bounds, &series)
}

/// Pure aggregation over a precomputed delay series; separated out so the
/// boundary conventions are testable in isolation.
fn from_series(
    grid: &crate::grid::TimeGrid,
    entry_bounds: &[(usize, usize)],
    series: &[f64],
) -> ScheduleMetrics {
    let delay_series: Vec<(f64, f64)> = series
        .iter()
        .enumerate()
        .map(|(k, &d)| (grid.time(k), d))
        .collect();
    let validity_durations_s: Vec<f64> = entry_bounds
        .iter()
        .map(|&(a, b)| (b - a) as f64 * grid.step())
        .collect();
    let mut changes = Vec::new();
    for &(start, _) in entry_bounds.iter().skip(1) {
        let owd_old = series[start - 1];
        let owd_new = series[start];
        let delta = owd_new - owd_old;
        changes.push(RouteChangeEvent {
            t_s: grid.time(start),
            owd_old_s: owd_old,
            owd_new_s: owd_new,
            delta_s: delta,
            bad: delta < 0.0,
        });
    }
    let mut sorted: Vec<f64> = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median_owd_s = if sorted.is_empty() {
        0.0
    } else {
        lower_quantile(&sorted, 0.5)
    };
    let mean_owd_s = if series.is_empty() {
        0.0
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    };
    let bad_change_count = changes.iter().filter(|c| c.bad).count();
    ScheduleMetrics {
        change_count: changes.len(),
        bad_change_count,
        delay_series,
        validity_durations_s,
        changes,
        median_owd_s,
        mean_owd_s,
        horizon_end_s: grid.end(),
    }
}

/// Lower order statistic at fraction `p` of a sorted slice.
pub(crate) fn lower_quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).floor() as usize;
    sorted[idx]
}

/// Sorted values paired with cumulative fractions `i/n`, ready for plotting.
pub fn cdf_points(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cdf over no values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}
