//! Command-line interface: scenario loading, subcommand dispatch, and file
//! emission.
//!
//! Exit codes: 0 success, 1 usage, 2 scenario/validation problem,
//! 3 infeasible routing (no route or uncoverable horizon).

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::experiments::{self, GridSpec};
use crate::metrics;
use crate::output;
use crate::scenario::{self, HorizonSpec, ScenarioConfig};
use crate::selection::{self, Algorithm};
use crate::setcover;
use crate::tcpsim;
use crate::topology::IslGraph;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "leo-routing",
    version,
    about = "Walker Delta constellation routing and abstract TCP co-simulation",
    disable_help_subcommand = true
)]
struct Cli {
    /// Scenario file (key-value format, see the bundled scenarios/).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for emitted CSV files.
    #[arg(long, global = true, default_value = ".")]
    output: PathBuf,

    /// Override the scenario sampling step [s].
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Override the horizon: seconds or `period`.
    #[arg(long, global = true)]
    horizon: Option<String>,

    /// Reserved; the pipeline is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Source station name from the scenario.
    #[arg(long)]
    src: String,
    /// Destination station name from the scenario.
    #[arg(long)]
    dst: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm (or all) on a station pair; emits schedule, metrics,
    /// changes, and trace CSVs.
    Route {
        #[command(flatten)]
        pair: PairArgs,
        /// dijkstra | stubborn | tenacious | setcover | all
        #[arg(long, default_value = "all")]
        algorithm: String,
    },
    /// Run the window simulation over a schedule CSV or a trace CSV.
    Simulate {
        /// Schedule CSV produced by `route` (needs --config, --src, --dst).
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Transport trace CSV produced by `route`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        src: Option<String>,
        #[arg(long)]
        dst: Option<String>,
    },
    /// Sweep ground-station pairs over a latitude/longitude grid.
    Grid {
        /// Latitude step [deg]; default inclination / 5.
        #[arg(long)]
        lat_step: Option<f64>,
        /// Longitude step [deg].
        #[arg(long, default_value_t = 10.0)]
        lon_step: f64,
        /// Latitude bound [deg]; default the constellation inclination.
        #[arg(long)]
        lat_bound: Option<f64>,
    },
    /// Time the four algorithms over grid pairs and summarize quartiles.
    Bench {
        /// Number of grid pairs to time.
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        /// Latitude step of the pair-picking grid [deg].
        #[arg(long)]
        lat_step: Option<f64>,
        /// Longitude step of the pair-picking grid [deg].
        #[arg(long, default_value_t = 10.0)]
        lon_step: f64,
    },
    /// Export the interval set-cover instance of a pair in LP format.
    ExportIlp {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Emit the visibility windows of one station.
    Windows {
        /// Station name from the scenario.
        #[arg(long)]
        station: String,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs, not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoRoute { .. } | Error::InfeasibleCover { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn parse_horizon(raw: &str) -> Result<HorizonSpec> {
    if raw.eq_ignore_ascii_case("period") {
        return Ok(HorizonSpec::Period);
    }
    let secs: f64 = raw
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad horizon '{raw}'")))?;
    if !(secs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon {secs} not positive"
        )));
    }
    Ok(HorizonSpec::Seconds(secs))
}

struct Session {
    config: ScenarioConfig,
    grid: crate::grid::TimeGrid,
    output_dir: PathBuf,
}

impl Session {
    fn open(cli: &Cli) -> Result<Self> {
        let path = cli.config.as_ref().ok_or_else(|| {
            Error::InvalidParameter("this subcommand needs --config <scenario>".into())
        })?;
        let config = scenario::parse_config(path)?;
        let horizon = cli.horizon.as_deref().map(parse_horizon).transpose()?;
        let grid = config.time_grid(cli.step, horizon)?;
        std::fs::create_dir_all(&cli.output)?;
        Ok(Self {
            config,
            grid,
            output_dir: cli.output.clone(),
        })
    }

    fn writer(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.output_dir.join(name);
        Ok(BufWriter::new(File::create(path)?))
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Route { pair, algorithm } => {
            let session = Session::open(&cli)?;
            let algorithms: Vec<Algorithm> = if algorithm.eq_ignore_ascii_case("all") {
                Algorithm::ALL.to_vec()
            } else {
                vec![algorithm.parse()?]
            };
            cmd_route(&session, &pair.src, &pair.dst, &algorithms)
        }
        Command::Simulate {
            schedule,
            trace,
            src,
            dst,
        } => cmd_simulate(&cli, schedule.as_deref(), trace.as_deref(), src.as_ref(), dst.as_ref()),
        Command::Grid {
            lat_step,
            lon_step,
            lat_bound,
        } => {
            let session = Session::open(&cli)?;
            cmd_grid(&session, *lat_step, *lon_step, *lat_bound)
        }
        Command::Bench {
            pairs,
            lat_step,
            lon_step,
        } => {
            let session = Session::open(&cli)?;
            cmd_bench(&session, *pairs, *lat_step, *lon_step)
        }
        Command::ExportIlp { pair } => {
            let session = Session::open(&cli)?;
            cmd_export_ilp(&session, &pair.src, &pair.dst)
        }
        Command::Windows { station } => {
            let session = Session::open(&cli)?;
            cmd_windows(&session, station)
        }
    }
}

fn cmd_route(session: &Session, src: &str, dst: &str, algorithms: &[Algorithm]) -> Result<()> {
    let cfg = &session.config;
    let graph = IslGraph::build(cfg.constellation)?;
    let src = cfg.station(src)?.clone();
    let dst = cfg.station(dst)?.clone();
    let mut evaluated = Vec::new();
    for &alg in algorithms {
        let schedule = selection::select(alg, &graph, &src, &dst, &cfg.model, &session.grid)?;
        let m = metrics::evaluate(&schedule, &graph, &cfg.model);
        let trace = tcpsim::derive_trace(&m);
        let window = tcpsim::simulate_window(&trace, &cfg.tcp)?;
        output::write_schedule_csv(
            session.writer(&format!("schedule_{alg}.csv"))?,
            &schedule,
            &graph,
            &cfg.model,
        )?;
        output::write_trace_csv(session.writer(&format!("trace_{alg}.csv"))?, &trace)?;
        output::write_window_csv(
            session.writer(&format!("window_{alg}.csv"))?,
            &window,
            cfg.tcp.mss_bytes,
        )?;
        println!(
            "{alg}: {} entries, {} changes ({} bad), median owd {:.3} ms, avg rate {:.3} Mbit/s",
            schedule.entries.len(),
            m.change_count,
            m.bad_change_count,
            m.median_owd_s * 1e3,
            window.average_rate_bps / 1e6
        );
        evaluated.push((alg, m));
    }
    let views: Vec<(Algorithm, &metrics::ScheduleMetrics)> =
        evaluated.iter().map(|(a, m)| (*a, m)).collect();
    output::write_metrics_csv(session.writer("metrics.csv")?, &session.grid, &views)?;
    output::write_changes_csv(session.writer("changes.csv")?, &views)?;
    Ok(())
}

fn cmd_simulate(
    cli: &Cli,
    schedule: Option<&Path>,
    trace: Option<&Path>,
    src: Option<&String>,
    dst: Option<&String>,
) -> Result<()> {
    match (schedule, trace) {
        (Some(schedule_path), None) => {
            let session = Session::open(cli)?;
            let cfg = &session.config;
            let src = cfg
                .station(src.ok_or_else(|| {
                    Error::InvalidParameter("--schedule needs --src and --dst".into())
                })?)?
                .clone();
            let dst = cfg
                .station(dst.ok_or_else(|| {
                    Error::InvalidParameter("--schedule needs --src and --dst".into())
                })?)?
                .clone();
            let file = std::io::BufReader::new(File::open(schedule_path)?);
            let pairs =
                output::read_schedule_csv(file, &schedule_path.display().to_string())?;
            let graph = IslGraph::build(cfg.constellation)?;
            // Rebuild each entry's in-orbit route from its access pair; exact
            // for the pair-based algorithms, an approximation for the others.
            let mut rebuilt = selection::RouteSchedule {
                grid: session.grid,
                entries: Vec::new(),
            };
            for p in &pairs {
                let route = selection::route_for_pair(&graph, p, &src, &dst, &cfg.model, &session.grid);
                rebuilt.entries.push(selection::ScheduleEntry {
                    start_idx: session.grid.index_at_or_after(p.start_s),
                    end_idx: session.grid.index_at_or_after(p.end_s),
                    route,
                });
            }
            let m = metrics::evaluate(&rebuilt, &graph, &cfg.model);
            let t = tcpsim::derive_trace(&m);
            let window = tcpsim::simulate_window(&t, &cfg.tcp)?;
            output::write_window_csv(session.writer("window.csv")?, &window, cfg.tcp.mss_bytes)?;
            println!(
                "simulated {} entries: avg rate {:.3} Mbit/s, mean window {:.1} segments",
                pairs.len(),
                window.average_rate_bps / 1e6,
                window.mean_window_segments
            );
            Ok(())
        }
        (None, Some(trace_path)) => {
            // Trace-driven simulation runs without a scenario; TCP parameters
            // come from the config when given, defaults otherwise.
            let (tcp, out_dir) = match &cli.config {
                Some(path) => (scenario::parse_config(path)?.tcp, cli.output.clone()),
                None => (tcpsim::TcpParams::default(), cli.output.clone()),
            };
            std::fs::create_dir_all(&out_dir)?;
            let file = std::io::BufReader::new(File::open(trace_path)?);
            let trace = output::read_trace_csv(file, &trace_path.display().to_string())?;
            let window = tcpsim::simulate_window(&trace, &tcp)?;
            let path = out_dir.join("window.csv");
            output::write_window_csv(BufWriter::new(File::create(path)?), &window, tcp.mss_bytes)?;
            println!(
                "simulated trace of {} samples: avg rate {:.3} Mbit/s",
                trace.rtt_series.len(),
                window.average_rate_bps / 1e6
            );
            Ok(())
        }
        _ => Err(Error::InvalidParameter(
            "simulate needs exactly one of --schedule or --trace".into(),
        )),
    }
}

fn default_grid_spec(cfg: &ScenarioConfig, lat_step: Option<f64>, lon_step: f64, lat_bound: Option<f64>) -> GridSpec {
    GridSpec {
        lat_step_deg: lat_step.unwrap_or(cfg.constellation.inclination_deg / 5.0),
        lon_step_deg: lon_step,
        lat_bound_deg: lat_bound.unwrap_or(cfg.constellation.inclination_deg),
    }
}

fn cmd_grid(session: &Session, lat_step: Option<f64>, lon_step: f64, lat_bound: Option<f64>) -> Result<()> {
    let cfg = &session.config;
    let spec = default_grid_spec(cfg, lat_step, lon_step, lat_bound);
    let graph = IslGraph::build(cfg.constellation)?;
    let results = experiments::run_grid(&graph, &spec, &cfg.model, &cfg.tcp, &session.grid)?;
    output::write_grid_csv(session.writer("grid.csv")?, &results)?;
    let cdfs = experiments::aggregate_cdf(&results)?;
    let tables = |f: &dyn Fn(&experiments::AlgorithmCdfs) -> &[(f64, f64)]| {
        cdfs.iter().map(|c| (c.algorithm, f(c))).collect::<Vec<_>>()
    };
    output::write_cdf_csv(
        session.writer("cdf_delay.csv")?,
        "mean_owd_s",
        &tables(&|c| &c.delay),
    )?;
    output::write_cdf_csv(
        session.writer("cdf_validity.csv")?,
        "mean_validity_s",
        &tables(&|c| &c.validity),
    )?;
    output::write_cdf_csv(
        session.writer("cdf_rate.csv")?,
        "avg_rate_bps",
        &tables(&|c| &c.rate),
    )?;
    println!("evaluated {} pairs", results.len());
    Ok(())
}

fn cmd_bench(session: &Session, pairs: usize, lat_step: Option<f64>, lon_step: f64) -> Result<()> {
    let cfg = &session.config;
    let spec = default_grid_spec(cfg, lat_step, lon_step, None);
    let all = spec.pairs();
    if all.is_empty() {
        return Err(Error::InvalidParameter("grid produced no pairs".into()));
    }
    // Deterministic spread over the grid enumeration.
    let take = pairs.min(all.len());
    let stride = (all.len() / take.max(1)).max(1);
    let chosen: Vec<_> = all.iter().step_by(stride).take(take).cloned().collect();
    let graph = IslGraph::build(cfg.constellation)?;
    let report = experiments::benchmark(&graph, &chosen, &cfg.model, &session.grid)?;
    output::write_bench_raw_csv(session.writer("bench_raw.csv")?, &report)?;
    output::write_bench_summary_csv(session.writer("bench_summary.csv")?, &report)?;
    for s in &report.summary {
        println!(
            "{:>9}: min {:.3}s q1 {:.3}s median {:.3}s q3 {:.3}s max {:.3}s",
            s.algorithm.to_string(),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max
        );
    }
    Ok(())
}

fn cmd_export_ilp(session: &Session, src: &str, dst: &str) -> Result<()> {
    let cfg = &session.config;
    let constellation = crate::orbital::Constellation::build(cfg.constellation)?;
    let src = cfg.station(src)?;
    let dst = cfg.station(dst)?;
    let instance = setcover::build_instance(&constellation, src, dst, &session.grid);
    let text = setcover::export_ilp(&instance);
    let path = session.output_dir.join("cover.lp");
    std::fs::write(&path, text)?;
    println!(
        "wrote {} ({} variables, {} constraints)",
        path.display(),
        instance.elements.len(),
        session.grid.steps()
    );
    Ok(())
}

fn cmd_windows(session: &Session, station: &str) -> Result<()> {
    let cfg = &session.config;
    let constellation = crate::orbital::Constellation::build(cfg.constellation)?;
    let gs = cfg.station(station)?;
    let windows = constellation.visibility_windows(gs, &session.grid);
    output::write_windows_csv(session.writer("windows.csv")?, &gs.name, &windows)?;
    println!("{}: {} windows", gs.name, windows.len());
    Ok(())
}
