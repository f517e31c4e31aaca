//! Abstract TCP in-flight-window simulation.
//!
//! Instead of packet-level discrete events, the window advances one RTT round
//! at a time: slow start doubles it up to the slow-start threshold, congestion
//! avoidance adds one segment per round, and every reordering event halves it
//! (fast-retransmit abstraction; there is no timeout path). The window is
//! capped by the instantaneous bandwidth-delay product.

use crate::metrics::ScheduleMetrics;
use crate::{Error, Result};

/// Reno-style abstraction constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcpParams {
    pub mss_bytes: u32,
    /// Initial window [segments].
    pub initial_window: u64,
    /// Initial slow-start threshold [segments]; `None` means unbounded.
    pub initial_ssthresh: Option<u64>,
    /// Bottleneck rate used for the BDP cap [bit/s].
    pub bottleneck_rate_bps: f64,
}

impl Default for TcpParams {
    fn default() -> Self {
        Self {
            mss_bytes: 1500,
            initial_window: 10,
            initial_ssthresh: None,
            bottleneck_rate_bps: 1e9,
        }
    }
}

impl TcpParams {
    pub fn validate(&self) -> Result<()> {
        if self.mss_bytes == 0
            || self.initial_window == 0
            || self.initial_ssthresh == Some(0)
            || !(self.bottleneck_rate_bps > 0.0)
        {
            return Err(Error::InvalidParameter(
                "tcp parameters must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Input to the window simulation: an RTT series sampled on the schedule grid
/// and the times of reordering events.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportTrace {
    /// `(t, rtt)` samples; rtt holds until the next sample.
    pub rtt_series: Vec<(f64, f64)>,
    /// Sorted times of route changes that reorder packets.
    pub reordering_events: Vec<f64>,
    /// Exclusive end of the simulated horizon.
    pub end_s: f64,
}

impl TransportTrace {
    pub fn validate(&self) -> Result<()> {
        if self.rtt_series.is_empty() {
            return Err(Error::EmptyInput("rtt series".into()));
        }
        let start = self.rtt_series[0].0;
        if !(self.end_s > start) {
            return Err(Error::InvalidParameter("trace horizon is empty".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(t, rtt) in &self.rtt_series {
            if !(rtt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rtt {rtt} at t={t} not positive"
                )));
            }
            if t < prev {
                return Err(Error::InvalidParameter("rtt series not sorted".into()));
            }
            prev = t;
        }
        for &e in &self.reordering_events {
            if e < start || e > self.end_s {
                return Err(Error::InvalidParameter(format!(
                    "reordering event at t={e} outside the trace span"
                )));
            }
        }
        Ok(())
    }

    fn rtt_at(&self, t: f64) -> f64 {
        // Piecewise-constant: last sample at or before t.
        match self
            .rtt_series
            .binary_search_by(|&(ts, _)| ts.partial_cmp(&t).unwrap())
        {
            Ok(i) => self.rtt_series[i].1,
            Err(0) => self.rtt_series[0].1,
            Err(i) => self.rtt_series[i - 1].1,
        }
    }
}

/// One window sample: the in-flight window during the RTT round starting at
/// `t_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSample {
    pub t_s: f64,
    pub window_segments: u64,
    pub rtt_s: f64,
}

/// Window evolution and aggregate rate over a trace.
#[derive(Clone, Debug)]
pub struct WindowTrace {
    pub samples: Vec<WindowSample>,
    /// Time-weighted average data rate [bit/s].
    pub average_rate_bps: f64,
    /// Time-weighted mean window [segments].
    pub mean_window_segments: f64,
    /// Time-weighted mean BDP cap [segments].
    pub mean_bdp_segments: f64,
}

/// Bandwidth-delay product in whole segments.
pub fn bdp_segments(rtt_s: f64, params: &TcpParams) -> u64 {
    let raw = params.bottleneck_rate_bps * rtt_s / (8.0 * params.mss_bytes as f64);
    // Absolute slack keeps exact integer products from flooring one short.
    (raw + 1e-9).floor().max(0.0) as u64
}

/// Build the transport trace of a schedule: RTT is twice the one-way delay
/// (symmetric reverse route) and every bad route change is one reordering
/// event. Positive deltas stay far below the minimum retransmission timeout
/// and contribute nothing.
pub fn derive_trace(metrics: &ScheduleMetrics) -> TransportTrace {
    TransportTrace {
        rtt_series: metrics
            .delay_series
            .iter()
            .map(|&(t, owd)| (t, 2.0 * owd))
            .collect(),
        reordering_events: metrics
            .changes
            .iter()
            .filter(|c| c.bad)
            .map(|c| c.t_s)
            .collect(),
        end_s: metrics.horizon_end_s,
    }
}

const MIN_WINDOW_AFTER_LOSS: u64 = 2;

/// Run the per-RTT window recursion over a trace.
///
/// Rounds are aligned to the RTT series only, so two traces differing just in
/// events step through identical round boundaries. Events are applied at the
/// end of the round containing them; a round with events halves once per
/// event instead of growing.
pub fn simulate_window(trace: &TransportTrace, params: &TcpParams) -> Result<WindowTrace> {
    trace.validate()?;
    params.validate()?;
    let mut events = trace.reordering_events.clone();
    events.sort_by(f64::total_cmp);

    let start = trace.rtt_series[0].0;
    let end = trace.end_s;
    let mut window = params.initial_window;
    let mut ssthresh = params.initial_ssthresh.unwrap_or(u64::MAX);
    let mut samples = Vec::new();
    let mut rate_time = 0.0;
    let mut window_time = 0.0;
    let mut bdp_time = 0.0;
    let mut next_event = 0;
    let mut t = start;
    let mut last_rtt = trace.rtt_at(start);

    while t < end {
        let rtt = trace.rtt_at(t);
        last_rtt = rtt;
        let cap = bdp_segments(rtt, params).max(1);
        window = window.min(cap);
        samples.push(WindowSample {
            t_s: t,
            window_segments: window,
            rtt_s: rtt,
        });
        let round_end = t + rtt;
        let dur = (end - t).min(rtt);
        rate_time += window as f64 * params.mss_bytes as f64 * 8.0 / rtt * dur;
        window_time += window as f64 * dur;
        bdp_time += cap as f64 * dur;

        if round_end > end + 1e-9 * rtt {
            // Partial final round: no growth or loss handling.
            break;
        }
        let mut losses = 0;
        while next_event < events.len() && events[next_event] < round_end {
            if events[next_event] >= t {
                losses += 1;
            }
            next_event += 1;
        }
        if losses > 0 {
            for _ in 0..losses {
                ssthresh = (window / 2).max(MIN_WINDOW_AFTER_LOSS);
                window = ssthresh;
            }
        } else if window < ssthresh {
            window = window.saturating_mul(2).min(ssthresh);
        } else {
            window += 1;
        }
        t = round_end;
    }

    let total = end - start;
    window = window.min(bdp_segments(last_rtt, params).max(1));
    samples.push(WindowSample {
        t_s: end,
        window_segments: window,
        rtt_s: last_rtt,
    });
    Ok(WindowTrace {
        samples,
        average_rate_bps: rate_time / total,
        mean_window_segments: window_time / total,
        mean_bdp_segments: bdp_time / total,
    })
}
