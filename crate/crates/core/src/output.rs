//! CSV emission and parsing for all artifacts the CLI produces.
//!
//! Every file starts with a `# schema=1` comment followed by a header row;
//! numbers use `.` as the decimal separator and no grouping.

use std::io::{BufRead, Write};

use crate::experiments::{BenchmarkReport, PairResult};
use crate::grid::TimeGrid;
use crate::metrics::ScheduleMetrics;
use crate::orbital::{SatelliteId, VisibilityWindow};
use crate::selection::{AccessPair, Algorithm, RouteSchedule};
use crate::tcpsim::{TransportTrace, WindowTrace};
use crate::topology::{DelayModel, IslGraph};
use crate::{Error, Result};

const SCHEMA_LINE: &str = "# schema=1";

fn parse_err(what: &str, line: usize, detail: impl std::fmt::Display) -> Error {
    Error::Config {
        path: what.to_string(),
        line,
        message: detail.to_string(),
    }
}

/// schedule CSV: one row per entry.
pub fn write_schedule_csv<W: Write>(
    mut w: W,
    schedule: &RouteSchedule,
    graph: &IslGraph,
    model: &DelayModel,
) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(
        w,
        "t_start_s,t_end_s,src_plane,src_slot,dst_plane,dst_slot,hop_count,owd_start_ms"
    )?;
    for e in &schedule.entries {
        let (sa, sb) = e.route.access_satellites();
        let t = schedule.start_s(e);
        let owd = graph.one_way_delay_s(&e.route, model, t)?;
        writeln!(
            w,
            "{:.3},{:.3},{},{},{},{},{},{:.6}",
            t,
            schedule.end_s(e),
            sa.plane,
            sa.slot,
            sb.plane,
            sb.slot,
            e.route.isl_hop_count(),
            owd * 1e3
        )?;
    }
    Ok(())
}

/// Read back a schedule CSV as access pairs (the in-orbit part is rebuilt by
/// the caller).
pub fn read_schedule_csv<R: BufRead>(r: R, source: &str) -> Result<Vec<AccessPair>> {
    let mut pairs = Vec::new();
    let mut header_seen = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if !trimmed.starts_with("t_start_s,") {
                return Err(parse_err(source, line_no, "missing schedule header"));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 8 {
            return Err(parse_err(
                source,
                line_no,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| parse_err(source, line_no, format!("bad number '{}'", fields[i])))
        };
        pairs.push(AccessPair {
            src_sat: SatelliteId::new(num(2)? as usize, num(3)? as usize),
            dst_sat: SatelliteId::new(num(4)? as usize, num(5)? as usize),
            start_s: num(0)?,
            end_s: num(1)?,
        });
    }
    if pairs.is_empty() {
        return Err(parse_err(source, 0, "schedule has no entries"));
    }
    Ok(pairs)
}

/// metrics CSV: the delay series, one column per algorithm.
pub fn write_metrics_csv<W: Write>(
    mut w: W,
    grid: &TimeGrid,
    per_algorithm: &[(Algorithm, &ScheduleMetrics)],
) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    let header: Vec<String> = std::iter::once("t_s".to_string())
        .chain(per_algorithm.iter().map(|(a, _)| format!("{a}_owd_ms")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (k, t) in grid.times() {
        let mut row = format!("{t:.3}");
        for (_, m) in per_algorithm {
            row.push_str(&format!(",{:.6}", m.delay_series[k].1 * 1e3));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// changes CSV: every route change of every algorithm.
pub fn write_changes_csv<W: Write>(
    mut w: W,
    per_algorithm: &[(Algorithm, &ScheduleMetrics)],
) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "t_s,algorithm,delta_ms,bad")?;
    for (alg, m) in per_algorithm {
        for c in &m.changes {
            writeln!(w, "{:.3},{alg},{:.6},{}", c.t_s, c.delta_s * 1e3, c.bad)?;
        }
    }
    Ok(())
}

/// transport trace CSV: RTT series plus reordering markers.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &TransportTrace) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "# end_s={:.3}", trace.end_s)?;
    writeln!(w, "t_s,rtt_ms,reorder")?;
    let mut events = trace.reordering_events.iter().peekable();
    for &(t, rtt) in &trace.rtt_series {
        let mut reorder = 0;
        while let Some(&&e) = events.peek() {
            if (e - t).abs() < 1e-9 {
                reorder += 1;
                events.next();
            } else {
                break;
            }
        }
        writeln!(w, "{:.3},{:.6},{}", t, rtt * 1e3, reorder)?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R, source: &str) -> Result<TransportTrace> {
    let mut rtt_series = Vec::new();
    let mut events = Vec::new();
    let mut end_s: Option<f64> = None;
    let mut header_seen = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# end_s=") {
            end_s = rest.trim().parse().ok();
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if !trimmed.starts_with("t_s,") {
                return Err(parse_err(source, line_no, "missing trace header"));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(source, line_no, "expected t_s,rtt_ms,reorder"));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(source, line_no, "bad time"))?;
        let rtt_ms: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(source, line_no, "bad rtt"))?;
        let reorder: u32 = fields[2]
            .parse()
            .map_err(|_| parse_err(source, line_no, "bad reorder count"))?;
        rtt_series.push((t, rtt_ms / 1e3));
        for _ in 0..reorder {
            events.push(t);
        }
    }
    if rtt_series.is_empty() {
        return Err(parse_err(source, 0, "trace has no samples"));
    }
    let end = end_s.unwrap_or_else(|| {
        let last = rtt_series[rtt_series.len() - 1].0;
        let step = if rtt_series.len() > 1 {
            rtt_series[1].0 - rtt_series[0].0
        } else {
            1.0
        };
        last + step
    });
    Ok(TransportTrace {
        rtt_series,
        reordering_events: events,
        end_s: end,
    })
}

/// window CSV: in-flight window evolution.
pub fn write_window_csv<W: Write>(mut w: W, trace: &WindowTrace, mss_bytes: u32) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "t_s,window_segments,rtt_ms,rate_mbps")?;
    for s in &trace.samples {
        let rate = s.window_segments as f64 * mss_bytes as f64 * 8.0 / s.rtt_s / 1e6;
        writeln!(
            w,
            "{:.3},{},{:.6},{:.6}",
            s.t_s,
            s.window_segments,
            s.rtt_s * 1e3,
            rate
        )?;
    }
    Ok(())
}

/// grid CSV: one row per pair and algorithm.
pub fn write_grid_csv<W: Write>(mut w: W, results: &[PairResult]) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(
        w,
        "src_lat,src_lon,dst_lat,dst_lon,algorithm,mean_owd_ms,mean_validity_s,changes,bad_changes,avg_rate_mbps,wall_time_s"
    )?;
    for r in results {
        for a in &r.algorithms {
            writeln!(
                w,
                "{},{},{},{},{},{:.6},{:.3},{},{},{:.6},{:.6}",
                r.src.latitude_deg,
                r.src.longitude_deg,
                r.dst.latitude_deg,
                r.dst.longitude_deg,
                a.algorithm,
                a.mean_owd_s * 1e3,
                a.mean_validity_s,
                a.change_count,
                a.bad_change_count,
                a.avg_rate_bps / 1e6,
                a.wall_time_s
            )?;
        }
    }
    Ok(())
}

/// CDF table CSV: `algorithm,value,fraction` rows.
pub fn write_cdf_csv<W: Write>(
    mut w: W,
    value_name: &str,
    tables: &[(Algorithm, &[(f64, f64)])],
) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "algorithm,{value_name},fraction")?;
    for (alg, points) in tables {
        for &(v, f) in *points {
            writeln!(w, "{alg},{v:.9},{f:.9}")?;
        }
    }
    Ok(())
}

/// visibility windows CSV.
pub fn write_windows_csv<W: Write>(
    mut w: W,
    station: &str,
    windows: &[VisibilityWindow],
) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "station,plane,slot,start_s,end_s,direction")?;
    for win in windows {
        writeln!(
            w,
            "{station},{},{},{:.3},{:.3},{}",
            win.satellite.plane,
            win.satellite.slot,
            win.start_s,
            win.end_s,
            win.direction_at_start
        )?;
    }
    Ok(())
}

/// benchmark CSVs: raw samples and the quartile summary.
pub fn write_bench_raw_csv<W: Write>(mut w: W, report: &BenchmarkReport) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "pair_index,algorithm,seconds")?;
    for s in &report.raw {
        writeln!(w, "{},{},{:.6}", s.pair_index, s.algorithm, s.seconds)?;
    }
    Ok(())
}

pub fn write_bench_summary_csv<W: Write>(mut w: W, report: &BenchmarkReport) -> Result<()> {
    writeln!(w, "{SCHEMA_LINE}")?;
    writeln!(w, "algorithm,min_s,q1_s,median_s,q3_s,max_s")?;
    for s in &report.summary {
        writeln!(
            w,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            s.algorithm, s.min, s.q1, s.median, s.q3, s.max
        )?;
    }
    Ok(())
}
