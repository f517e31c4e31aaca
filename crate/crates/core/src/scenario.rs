//! Scenario files: a UTF-8 key-value format describing the constellation, the
//! named ground stations, the delay model, the TCP parameters, and the
//! simulation horizon.
//!
//! ```text
//! # comment
//! constellation.inclination_deg = 53
//! constellation.total_sats = 1584
//! constellation.planes = 72
//! constellation.phasing = 39
//! constellation.altitude_km = 550
//! constellation.min_elevation_deg = 40
//! station.Bariloche = -41.133, -71.310
//! sim.step_s = 1
//! sim.horizon = period
//! ```
//!
//! The constellation block is mandatory; everything else has defaults
//! (1 Gbit/s links, 1500-byte packets, 1 ms queueing, 1 s step, one orbital
//! period horizon). Unknown keys are rejected.

use std::collections::HashMap;
use std::path::Path;

use crate::grid::TimeGrid;
use crate::orbital::{GroundStation, WalkerParameters};
use crate::tcpsim::TcpParams;
use crate::topology::DelayModel;
use crate::{Error, Result};

/// Horizon specification: an explicit duration or one orbital period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HorizonSpec {
    Period,
    Seconds(f64),
}

impl HorizonSpec {
    /// Concrete horizon in seconds, rounded up to a whole step.
    pub fn resolve(&self, params: &WalkerParameters, step_s: f64) -> f64 {
        let raw = match self {
            HorizonSpec::Period => params.orbital_period_s(),
            HorizonSpec::Seconds(s) => *s,
        };
        (raw / step_s).ceil() * step_s
    }
}

/// A fully parsed and validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub constellation: WalkerParameters,
    pub stations: Vec<GroundStation>,
    pub model: DelayModel,
    pub tcp: TcpParams,
    pub step_s: f64,
    /// Simulation window start [s past the epoch]. Separating the window
    /// from the epoch avoids the degenerate alignment where the Greenwich
    /// meridian, plane 0's ascending node, and the window start coincide.
    pub start_s: f64,
    pub horizon: HorizonSpec,
}

impl ScenarioConfig {
    pub fn station(&self, name: &str) -> Result<&GroundStation> {
        self.stations
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown station '{name}' (defined: {})",
                    self.stations
                        .iter()
                        .map(|s| s.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    /// Sampling grid for this scenario, with optional overrides.
    pub fn time_grid(&self, step_override: Option<f64>, horizon_override: Option<HorizonSpec>) -> Result<TimeGrid> {
        let step = step_override.unwrap_or(self.step_s);
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("step {step} not positive")));
        }
        let horizon = horizon_override.unwrap_or(self.horizon);
        let duration = horizon.resolve(&self.constellation, step);
        TimeGrid::new(self.start_s, self.start_s + duration, step)
    }
}

/// Parse a scenario file from disk.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        line: 0,
        message: format!("cannot read file: {e}"),
    })?;
    parse_scenario_str(&text, &path.display().to_string())
}

/// Parse scenario text; `source` names the origin in error messages.
pub fn parse_scenario_str(text: &str, source: &str) -> Result<ScenarioConfig> {
    let fail = |line: usize, message: String| -> Error {
        Error::Config {
            path: source.to_string(),
            line,
            message,
        }
    };

    let mut values: HashMap<&str, (f64, usize)> = HashMap::new();
    let mut horizon: Option<(HorizonSpec, usize)> = None;
    let mut stations: Vec<GroundStation> = Vec::new();
    let mut ssthresh: Option<u64> = None;

    const NUMERIC_KEYS: [&str; 15] = [
        "constellation.inclination_deg",
        "constellation.total_sats",
        "constellation.planes",
        "constellation.phasing",
        "constellation.altitude_km",
        "constellation.min_elevation_deg",
        "model.data_rate_bps",
        "model.packet_size_bytes",
        "model.queueing_per_hop_s",
        "tcp.mss_bytes",
        "tcp.initial_window",
        "tcp.initial_ssthresh",
        "tcp.bottleneck_rate_bps",
        "sim.step_s",
        "sim.start_s",
    ];

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(fail(line_no, format!("expected 'key = value', got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        if let Some(name) = key.strip_prefix("station.") {
            let name = name.trim();
            if name.is_empty() {
                return Err(fail(line_no, "station name is empty".into()));
            }
            if stations.iter().any(|s| s.name == name) {
                return Err(fail(line_no, format!("station '{name}' defined twice")));
            }
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(fail(
                    line_no,
                    format!("station '{name}' needs 'lat, lon', got '{value}'"),
                ));
            }
            let lat: f64 = parts[0]
                .parse()
                .map_err(|_| fail(line_no, format!("bad latitude '{}'", parts[0])))?;
            let lon: f64 = parts[1]
                .parse()
                .map_err(|_| fail(line_no, format!("bad longitude '{}'", parts[1])))?;
            let station = GroundStation::new(name, lat, lon)
                .map_err(|e| fail(line_no, e.to_string()))?;
            stations.push(station);
            continue;
        }
        if key == "sim.horizon" {
            if horizon.is_some() {
                return Err(fail(line_no, "sim.horizon defined twice".into()));
            }
            let spec = if value.eq_ignore_ascii_case("period") {
                HorizonSpec::Period
            } else {
                let secs: f64 = value
                    .parse()
                    .map_err(|_| fail(line_no, format!("bad horizon '{value}'")))?;
                if !(secs > 0.0) {
                    return Err(fail(line_no, format!("horizon {secs} not positive")));
                }
                HorizonSpec::Seconds(secs)
            };
            horizon = Some((spec, line_no));
            continue;
        }
        let Some(&canonical) = NUMERIC_KEYS.iter().find(|&&k| k == key) else {
            return Err(fail(line_no, format!("unknown key '{key}'")));
        };
        if values.contains_key(canonical) {
            return Err(fail(line_no, format!("key '{key}' defined twice")));
        }
        let number: f64 = value
            .parse()
            .map_err(|_| fail(line_no, format!("bad number '{value}' for '{key}'")))?;
        values.insert(canonical, (number, line_no));
    }

    let get = |key: &str| values.get(key).copied();
    let require = |key: &str| -> Result<(f64, usize)> {
        get(key).ok_or_else(|| fail(0, format!("missing mandatory key '{key}'")))
    };
    let as_count = |key: &str, v: f64, line: usize| -> Result<usize> {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(fail(line, format!("'{key}' must be a non-negative integer")));
        }
        Ok(v as usize)
    };

    let (incl, _) = require("constellation.inclination_deg")?;
    let (total, total_line) = require("constellation.total_sats")?;
    let (planes, planes_line) = require("constellation.planes")?;
    let (phasing, phasing_line) = require("constellation.phasing")?;
    let (altitude, _) = require("constellation.altitude_km")?;
    let (min_el, _) = require("constellation.min_elevation_deg")?;
    let constellation = WalkerParameters {
        inclination_deg: incl,
        total_sats: as_count("constellation.total_sats", total, total_line)?,
        planes: as_count("constellation.planes", planes, planes_line)?,
        phasing: as_count("constellation.phasing", phasing, phasing_line)?,
        altitude_km: altitude,
        min_elevation_deg: min_el,
    };
    if let Err(e) = constellation.validate() {
        // Validation messages start with the offending field name; point the
        // error at that key's line.
        let msg = match e {
            Error::InvalidParameter(m) => m,
            other => other.to_string(),
        };
        let line = [
            ("total_sats:", "constellation.total_sats"),
            ("planes:", "constellation.planes"),
            ("phasing:", "constellation.phasing"),
            ("inclination_deg:", "constellation.inclination_deg"),
            ("altitude_km:", "constellation.altitude_km"),
            ("min_elevation_deg:", "constellation.min_elevation_deg"),
        ]
        .iter()
        .find(|(needle, _)| msg.starts_with(needle))
        .and_then(|(_, key)| values.get(*key))
        .map(|&(_, l)| l)
        .unwrap_or(0);
        return Err(fail(line, msg));
    }

    let model = DelayModel::new(
        get("model.data_rate_bps").map_or(1e9, |(v, _)| v),
        get("model.packet_size_bytes").map_or(1500.0, |(v, _)| v),
        get("model.queueing_per_hop_s").map_or(1e-3, |(v, _)| v),
    )
    .map_err(|e| fail(0, e.to_string()))?;

    if let Some((v, line)) = get("tcp.initial_ssthresh") {
        ssthresh = Some(as_count("tcp.initial_ssthresh", v, line)? as u64);
    }
    let tcp = TcpParams {
        mss_bytes: get("tcp.mss_bytes").map_or(1500, |(v, _)| v as u32),
        initial_window: get("tcp.initial_window").map_or(10, |(v, _)| v as u64),
        initial_ssthresh: ssthresh,
        bottleneck_rate_bps: get("tcp.bottleneck_rate_bps").map_or(1e9, |(v, _)| v),
    };
    tcp.validate().map_err(|e| fail(0, e.to_string()))?;

    let step_s = get("sim.step_s").map_or(1.0, |(v, _)| v);
    if !(step_s > 0.0) {
        let line = get("sim.step_s").map_or(0, |(_, l)| l);
        return Err(fail(line, format!("sim.step_s {step_s} not positive")));
    }
    let start_s = get("sim.start_s").map_or(0.0, |(v, _)| v);
    if start_s < 0.0 {
        let line = get("sim.start_s").map_or(0, |(_, l)| l);
        return Err(fail(line, format!("sim.start_s {start_s} negative")));
    }

    Ok(ScenarioConfig {
        constellation,
        stations,
        model,
        tcp,
        step_s,
        start_s,
        horizon: horizon.map_or(HorizonSpec::Period, |(h, _)| h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STARLINK: &str = include_str!("../scenarios/starlink.scenario");

    #[test]
    fn bundled_starlink_scenario() {
        let cfg = parse_scenario_str(STARLINK, "starlink.scenario").unwrap();
        assert_eq!(cfg.constellation.total_sats, 1584);
        assert_eq!(cfg.constellation.planes, 72);
        assert_eq!(cfg.constellation.phasing, 39);
        assert_eq!(cfg.constellation.inclination_deg, 53.0);
        assert_eq!(cfg.constellation.altitude_km, 550.0);
        assert_eq!(cfg.constellation.min_elevation_deg, 40.0);
        assert!(cfg.station("Bariloche").is_ok());
        assert!(cfg.station("Beijing").is_ok());
        assert!(cfg.station("Nowhere").is_err());
        assert_eq!(cfg.horizon, HorizonSpec::Period);
        assert_eq!(cfg.step_s, 1.0);
        assert_eq!(cfg.model.data_rate_bps, 1e9);
        // One period at 1 s resolves to 5731 whole steps.
        let grid = cfg.time_grid(None, None).unwrap();
        assert_eq!(grid.steps(), 5731);
    }

    #[test]
    fn empty_file_misses_the_constellation() {
        let err = parse_scenario_str("", "empty").unwrap_err();
        assert!(err.to_string().contains("constellation"), "{err}");
    }

    #[test]
    fn phasing_out_of_range_reports_its_line() {
        let text = "\
constellation.inclination_deg = 53
constellation.total_sats = 12
constellation.planes = 3
constellation.phasing = 3
constellation.altitude_km = 550
constellation.min_elevation_deg = 40
";
        let err = parse_scenario_str(text, "bad").unwrap_err();
        match err {
            Error::Config { line, ref message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("phasing"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let text = "constellation.inclination_deg = 53\nwarp.factor = 9\n";
        match parse_scenario_str(text, "bad") {
            Err(Error::Config { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("warp.factor"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn horizon_overrides() {
        let cfg = parse_scenario_str(STARLINK, "starlink").unwrap();
        let grid = cfg
            .time_grid(Some(2.0), Some(HorizonSpec::Seconds(101.0)))
            .unwrap();
        assert_eq!(grid.step(), 2.0);
        assert_eq!(grid.steps(), 51);
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        let text = "constellation.planes = 3\nconstellation.planes = 4\n";
        assert!(matches!(
            parse_scenario_str(text, "dup"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            parse_scenario_str("just words\n", "syntax"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_scenario_str("station.X = 1, 2, 3\n", "station"),
            Err(Error::Config { line: 1, .. })
        ));
    }
}
