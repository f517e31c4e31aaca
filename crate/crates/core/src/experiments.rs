//! Scenario orchestration: single-pair runs, globe-grid sweeps with the
//! Walker symmetry reduction, CDF aggregation, and a wall-clock benchmark of
//! the four algorithms.

use std::time::Instant;

use rayon::prelude::*;

use crate::grid::TimeGrid;
use crate::metrics::{self, lower_quantile};
use crate::orbital::GroundStation;
use crate::selection::{select, Algorithm};
use crate::tcpsim::{self, TcpParams};
use crate::topology::{DelayModel, IslGraph};
use crate::{Error, Result};

/// Globe grid: the first station walks up the prime meridian, the second
/// visits every grid point between the latitude bounds.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub lat_step_deg: f64,
    pub lon_step_deg: f64,
    /// Usually the constellation inclination.
    pub lat_bound_deg: f64,
}

impl GridSpec {
    pub fn validate(&self, inclination_deg: f64) -> Result<()> {
        if !(self.lat_step_deg > 0.0 && self.lon_step_deg > 0.0) {
            return Err(Error::InvalidParameter("grid steps must be positive".into()));
        }
        if self.lat_bound_deg > inclination_deg + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "latitude bound {} exceeds inclination {}",
                self.lat_bound_deg, inclination_deg
            )));
        }
        Ok(())
    }

    /// `{0, lat_step, 2*lat_step, ...}` up to the bound. Symmetry makes
    /// negative first-station latitudes and other longitudes redundant.
    pub fn first_station_latitudes(&self) -> Vec<f64> {
        let mut lats = Vec::new();
        let mut k = 0;
        loop {
            let lat = k as f64 * self.lat_step_deg;
            if lat > self.lat_bound_deg + 1e-9 {
                break;
            }
            lats.push(lat.min(self.lat_bound_deg));
            k += 1;
        }
        lats
    }

    /// Full `(lat, lon)` grid for the second station.
    pub fn second_station_points(&self) -> Vec<(f64, f64)> {
        let k_max = ((self.lat_bound_deg + 1e-9) / self.lat_step_deg).floor() as i64;
        let mut lons = Vec::new();
        let mut lon = -180.0;
        while lon < 180.0 - 1e-9 {
            lons.push(lon);
            lon += self.lon_step_deg;
        }
        let mut points = Vec::new();
        for k in -k_max..=k_max {
            let lat = (k as f64 * self.lat_step_deg).clamp(-90.0, 90.0);
            for &lon in &lons {
                points.push((lat, lon));
            }
        }
        points
    }

    /// All station pairs of the sweep, identical locations skipped.
    pub fn pairs(&self) -> Vec<(GroundStation, GroundStation)> {
        let mut pairs = Vec::new();
        for lat1 in self.first_station_latitudes() {
            let first = GroundStation::new(format!("grid({lat1:.1},0.0)"), lat1, 0.0)
                .expect("grid latitude in range");
            for (lat2, lon2) in self.second_station_points() {
                if (lat2 - lat1).abs() < 1e-9 && lon2.abs() < 1e-9 {
                    continue;
                }
                let second = GroundStation::new(format!("grid({lat2:.1},{lon2:.1})"), lat2, lon2)
                    .expect("grid point in range");
                pairs.push((first.clone(), second));
            }
        }
        pairs
    }
}

/// Per-algorithm outcome of a pair run.
#[derive(Clone, Debug)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub mean_owd_s: f64,
    pub median_owd_s: f64,
    pub mean_validity_s: f64,
    pub change_count: usize,
    pub bad_change_count: usize,
    pub avg_rate_bps: f64,
    pub mean_window_segments: f64,
    pub mean_bdp_segments: f64,
    /// Selection time only; metrics and the TCP run are excluded.
    pub wall_time_s: f64,
}

/// Results of all four algorithms on one ground-station pair.
#[derive(Clone, Debug)]
pub struct PairResult {
    pub src: GroundStation,
    pub dst: GroundStation,
    pub algorithms: Vec<AlgorithmResult>,
}

impl PairResult {
    pub fn result(&self, algorithm: Algorithm) -> &AlgorithmResult {
        self.algorithms
            .iter()
            .find(|r| r.algorithm == algorithm)
            .expect("all four algorithms present")
    }
}

/// Run the full pipeline (selection, metrics, window simulation) for one pair.
pub fn run_pair(
    graph: &IslGraph,
    src: &GroundStation,
    dst: &GroundStation,
    model: &DelayModel,
    tcp: &TcpParams,
    grid: &TimeGrid,
) -> Result<PairResult> {
    let mut algorithms = Vec::with_capacity(Algorithm::ALL.len());
    for alg in Algorithm::ALL {
        let started = Instant::now();
        let schedule = select(alg, graph, src, dst, model, grid).map_err(|e| match e {
            Error::NoRoute { t, reason } => Error::NoRoute {
                t,
                reason: format!("{alg}: {reason}"),
            },
            other => other,
        })?;
        let wall_time_s = started.elapsed().as_secs_f64();
        let m = metrics::evaluate(&schedule, graph, model);
        let trace = tcpsim::derive_trace(&m);
        let window = tcpsim::simulate_window(&trace, tcp)?;
        algorithms.push(AlgorithmResult {
            algorithm: alg,
            mean_owd_s: m.mean_owd_s,
            median_owd_s: m.median_owd_s,
            mean_validity_s: m.validity_durations_s.iter().sum::<f64>()
                / m.validity_durations_s.len() as f64,
            change_count: m.change_count,
            bad_change_count: m.bad_change_count,
            avg_rate_bps: window.average_rate_bps,
            mean_window_segments: window.mean_window_segments,
            mean_bdp_segments: window.mean_bdp_segments,
            wall_time_s,
        });
    }
    Ok(PairResult {
        src: src.clone(),
        dst: dst.clone(),
        algorithms,
    })
}

/// Evaluate every pair of the grid sweep. Pairs run in parallel; the result
/// order matches the deterministic pair enumeration regardless of scheduling.
pub fn run_grid(
    graph: &IslGraph,
    spec: &GridSpec,
    model: &DelayModel,
    tcp: &TcpParams,
    grid: &TimeGrid,
) -> Result<Vec<PairResult>> {
    spec.validate(graph.params().inclination_deg)?;
    let pairs = spec.pairs();
    pairs
        .par_iter()
        .map(|(a, b)| run_pair(graph, a, b, model, tcp, grid))
        .collect()
}

/// Per-algorithm CDF tables over a set of pair results.
#[derive(Clone, Debug)]
pub struct AlgorithmCdfs {
    pub algorithm: Algorithm,
    /// Mean one-way delay [s] vs cumulative fraction.
    pub delay: Vec<(f64, f64)>,
    /// Mean route validity [s] vs cumulative fraction.
    pub validity: Vec<(f64, f64)>,
    /// Average data rate [bit/s] vs cumulative fraction.
    pub rate: Vec<(f64, f64)>,
}

pub fn aggregate_cdf(results: &[PairResult]) -> Result<Vec<AlgorithmCdfs>> {
    if results.is_empty() {
        return Err(Error::EmptyInput("no pair results to aggregate".into()));
    }
    Algorithm::ALL
        .iter()
        .map(|&alg| {
            let collect = |f: &dyn Fn(&AlgorithmResult) -> f64| -> Vec<f64> {
                results.iter().map(|r| f(r.result(alg))).collect()
            };
            Ok(AlgorithmCdfs {
                algorithm: alg,
                delay: metrics::cdf_points(&collect(&|r| r.mean_owd_s))?,
                validity: metrics::cdf_points(&collect(&|r| r.mean_validity_s))?,
                rate: metrics::cdf_points(&collect(&|r| r.avg_rate_bps))?,
            })
        })
        .collect()
}

/// One timed selection run.
#[derive(Clone, Copy, Debug)]
pub struct BenchSample {
    pub algorithm: Algorithm,
    pub pair_index: usize,
    pub seconds: f64,
}

/// Order statistics of the run times of one algorithm.
#[derive(Clone, Copy, Debug)]
pub struct BenchSummary {
    pub algorithm: Algorithm,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Clone, Debug)]
pub struct BenchmarkReport {
    pub raw: Vec<BenchSample>,
    pub summary: Vec<BenchSummary>,
}

impl BenchSummary {
    pub fn interquartile_range(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Time the four algorithms on each pair, sequentially for clean numbers.
/// Constellation and graph construction happen outside the timers.
pub fn benchmark(
    graph: &IslGraph,
    pairs: &[(GroundStation, GroundStation)],
    model: &DelayModel,
    grid: &TimeGrid,
) -> Result<BenchmarkReport> {
    if pairs.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "benchmark needs at least 5 pairs, got {}",
            pairs.len()
        )));
    }
    let mut raw = Vec::with_capacity(pairs.len() * Algorithm::ALL.len());
    for (i, (a, b)) in pairs.iter().enumerate() {
        for alg in Algorithm::ALL {
            let started = Instant::now();
            let schedule = select(alg, graph, a, b, model, grid)?;
            let seconds = started.elapsed().as_secs_f64();
            std::hint::black_box(&schedule);
            raw.push(BenchSample {
                algorithm: alg,
                pair_index: i,
                seconds,
            });
        }
    }
    let summary = Algorithm::ALL
        .iter()
        .map(|&alg| {
            let mut times: Vec<f64> = raw
                .iter()
                .filter(|s| s.algorithm == alg)
                .map(|s| s.seconds)
                .collect();
            times.sort_by(f64::total_cmp);
            BenchSummary {
                algorithm: alg,
                min: times[0],
                q1: lower_quantile(&times, 0.25),
                median: lower_quantile(&times, 0.5),
                q3: lower_quantile(&times, 0.75),
                max: *times.last().unwrap(),
            }
        })
        .collect();
    Ok(BenchmarkReport { raw, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::WalkerParameters;

    fn desk() -> WalkerParameters {
        WalkerParameters {
            inclination_deg: 60.0,
            total_sats: 40,
            planes: 5,
            phasing: 1,
            altitude_km: 6000.0,
            min_elevation_deg: 5.0,
        }
    }

    fn gs(name: &str, lat: f64, lon: f64) -> GroundStation {
        GroundStation::new(name, lat, lon).unwrap()
    }

    #[test]
    fn starlink_grid_enumeration() {
        let spec = GridSpec {
            lat_step_deg: 10.6,
            lon_step_deg: 10.0,
            lat_bound_deg: 53.0,
        };
        let lats = spec.first_station_latitudes();
        let expected = [0.0, 10.6, 21.2, 31.8, 42.4, 53.0];
        assert_eq!(lats.len(), expected.len());
        for (a, b) in lats.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let points = spec.second_station_points();
        assert_eq!(points.len(), 36 * 11);
        // One skipped identical-location pair per first latitude.
        assert_eq!(spec.pairs().len(), 6 * 36 * 11 - 6);
    }

    #[test]
    fn colocated_stations_use_two_link_routes() {
        let graph = IslGraph::build(desk()).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 1.0).unwrap();
        let result = run_pair(
            &graph,
            &gs("a", 20.0, 30.0),
            &gs("b", 20.0, 30.0),
            &DelayModel::default(),
            &TcpParams::default(),
            &grid,
        )
        .unwrap();
        let dijkstra = result.result(Algorithm::Dijkstra);
        for r in &result.algorithms {
            assert!(r.mean_owd_s >= dijkstra.mean_owd_s - 1e-12);
        }
        // With both stations at the same spot every algorithm can serve the
        // pair through a single satellite.
        let schedule = select(
            Algorithm::Dijkstra,
            &graph,
            &gs("a", 20.0, 30.0),
            &gs("b", 20.0, 30.0),
            &DelayModel::default(),
            &grid,
        )
        .unwrap();
        for e in &schedule.entries {
            assert_eq!(e.route.link_count(), 2);
        }
    }

    #[test]
    fn pair_results_are_reproducible() {
        let graph = IslGraph::build(desk()).unwrap();
        let grid = TimeGrid::new(0.0, 600.0, 2.0).unwrap();
        let a = gs("a", 35.0, -10.0);
        let b = gs("b", -25.0, 95.0);
        let x = run_pair(&graph, &a, &b, &DelayModel::default(), &TcpParams::default(), &grid)
            .unwrap();
        let y = run_pair(&graph, &a, &b, &DelayModel::default(), &TcpParams::default(), &grid)
            .unwrap();
        for (rx, ry) in x.algorithms.iter().zip(&y.algorithms) {
            assert_eq!(rx.mean_owd_s, ry.mean_owd_s);
            assert_eq!(rx.change_count, ry.change_count);
            assert_eq!(rx.bad_change_count, ry.bad_change_count);
            assert_eq!(rx.avg_rate_bps, ry.avg_rate_bps);
        }
    }

    #[test]
    fn aggregate_cdf_shapes() {
        let graph = IslGraph::build(desk()).unwrap();
        let grid = TimeGrid::new(0.0, 60.0, 2.0).unwrap();
        let r = run_pair(
            &graph,
            &gs("a", 10.0, 0.0),
            &gs("b", -10.0, 60.0),
            &DelayModel::default(),
            &TcpParams::default(),
            &grid,
        )
        .unwrap();
        // Single result: every CDF is a single step at 1.0.
        let single = aggregate_cdf(std::slice::from_ref(&r)).unwrap();
        for alg in &single {
            assert_eq!(alg.delay.len(), 1);
            assert_eq!(alg.delay[0].1, 1.0);
        }
        // Identical results: degenerate CDF, still monotone.
        let twice = aggregate_cdf(&[r.clone(), r.clone()]).unwrap();
        for alg in &twice {
            assert_eq!(alg.rate[0].0, alg.rate[1].0);
            assert!(alg.rate[0].1 <= alg.rate[1].1);
        }
        assert!(aggregate_cdf(&[]).is_err());
    }

    #[test]
    fn benchmark_order_statistics() {
        let graph = IslGraph::build(desk()).unwrap();
        let grid = TimeGrid::new(0.0, 30.0, 1.0).unwrap();
        let pair = (gs("a", 15.0, 20.0), gs("b", -15.0, -40.0));
        let pairs = vec![pair.clone(), pair.clone(), pair.clone(), pair.clone(), pair];
        let report = benchmark(&graph, &pairs, &DelayModel::default(), &grid).unwrap();
        assert_eq!(report.raw.len(), 20);
        for s in &report.summary {
            assert!(s.min <= s.q1 && s.q1 <= s.median);
            assert!(s.median <= s.q3 && s.q3 <= s.max);
            // Quartiles are order statistics: they appear in the raw sample.
            let times: Vec<f64> = report
                .raw
                .iter()
                .filter(|x| x.algorithm == s.algorithm)
                .map(|x| x.seconds)
                .collect();
            for v in [s.min, s.q1, s.median, s.q3, s.max] {
                assert!(times.contains(&v));
            }
        }
        assert!(benchmark(&graph, &pairs[..3], &DelayModel::default(), &grid).is_err());
    }

    #[test]
    fn mirrored_equatorial_pairs_match_under_time_reversal() {
        // Rotating the whole system by pi about the x-axis maps station
        // (0, lon) to (0, -lon) and runs the dynamics backwards. Satellites
        // are periodic over T, so running the mirrored pair forward equals
        // running the original pair with its longitudes advanced by the Earth
        // rotation over one period. Counts may differ by one boundary event.
        let period_s = 14400.0;
        let a_km = (crate::constants::MU_EARTH_KM3_S2
            * (period_s / std::f64::consts::TAU).powi(2))
        .cbrt();
        let params = WalkerParameters {
            inclination_deg: 60.0,
            total_sats: 40,
            planes: 5,
            phasing: 1,
            altitude_km: a_km - crate::constants::EARTH_RADIUS_KM,
            min_elevation_deg: 5.0,
        };
        let graph = IslGraph::build(params).unwrap();
        let model = DelayModel::default();
        let grid = TimeGrid::new(0.0, period_s, 1.0).unwrap();
        let shift_deg = (crate::constants::EARTH_ROTATION_RAD_S * period_s).to_degrees();

        let lon1 = 30.0;
        let lon2 = 100.0;
        let wrap = |l: f64| {
            let mut x = l;
            while x > 180.0 {
                x -= 360.0;
            }
            while x < -180.0 {
                x += 360.0;
            }
            x
        };
        let mirrored = (
            gs("m1", 0.0, wrap(-lon1)),
            gs("m2", 0.0, wrap(-lon2)),
        );
        let compensated = (
            gs("c1", 0.0, wrap(lon1 - shift_deg)),
            gs("c2", 0.0, wrap(lon2 - shift_deg)),
        );
        for alg in [Algorithm::Dijkstra, Algorithm::SetCover] {
            let m = select(alg, &graph, &mirrored.0, &mirrored.1, &model, &grid).unwrap();
            let c = select(alg, &graph, &compensated.0, &compensated.1, &model, &grid).unwrap();
            let diff = (m.change_count() as i64 - c.change_count() as i64).abs();
            assert!(
                diff <= 1,
                "{alg}: mirrored {} vs compensated {} changes",
                m.change_count(),
                c.change_count()
            );
        }
    }
}
