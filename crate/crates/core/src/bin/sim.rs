use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spacesim::comms;
use spacesim::runtime::EventLog;
use spacesim::scenarios::{
    per_satellite_spread, run_constellation, run_custom, run_fedavg, run_overhead_benchmark, run_scaling,
    ScenarioConfig, ScenarioKind,
};

const OVERHEAD_CONFIG: &str = include_str!("../../configs/overhead.json");
const CONSTELLATION_CONFIG: &str = include_str!("../../configs/constellation.json");

#[derive(Parser)]
#[command(name = "sim", version, about = "Spacecraft operations simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config.
    Run {
        config: PathBuf,
        /// CSV event log destination; overrides the config.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        duration_s: Option<f64>,
        #[command(flatten)]
        out: CsvOut,
    },
    /// List communication windows between two actors of a scenario.
    Windows {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 24.0)]
        hours: f64,
        #[command(flatten)]
        out: CsvOut,
    },
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        which: Bench,
    },
}

#[derive(Subcommand)]
enum Bench {
    /// Engine overhead next to a CPU-bound activity in real-time mode.
    Overhead {
        /// Check interval(s) in seconds; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        interval: Vec<f64>,
        /// Overhead config; the built-in one if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: CsvOut,
    },
    /// Per-satellite cost of a short constellation run at several sizes.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "16,32,128")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Constellation config; the built-in one if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: CsvOut,
    },
}

#[derive(Args)]
struct CsvOut {
    /// Also write the printed table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn print(&self) {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", line(self.header.clone()));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
    }

    fn emit(&self, out: &CsvOut) -> Result<()> {
        self.print();
        if let Some(path) = &out.csv {
            let write = || -> Result<()> {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
                Ok(())
            };
            write().with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

fn metrics(pairs: Vec<(&str, String)>) -> Table {
    let mut t = Table::new(&["metric", "value"]);
    for (k, v) in pairs {
        t.push(vec![k.to_owned(), v]);
    }
    t
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("cannot load config {}", path.display()))
}

fn load_or(path: Option<&Path>, builtin: &str) -> Result<ScenarioConfig> {
    match path {
        Some(p) => load(p),
        None => Ok(ScenarioConfig::from_json(builtin)?),
    }
}

fn write_log(log: &EventLog, path: Option<&Path>) -> Result<()> {
    if let Some(path) = path {
        log.write_log(path)
            .with_context(|| format!("cannot write log {}", path.display()))?;
        eprintln!("wrote {} log rows to {}", log.len(), path.display());
    }
    Ok(())
}

fn run(config_path: &Path, log: Option<PathBuf>, seed: Option<u64>, duration: Option<f64>, out: &CsvOut) -> Result<()> {
    let mut config = load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(d) = duration {
        config.duration_s = Some(d);
    }
    if let Some(l) = log {
        config.log = Some(l);
    }
    config.validate()?;
    let log_path = config.log.clone();
    match config.kind {
        ScenarioKind::Constellation => {
            let r = run_constellation(&config)?;
            let s = &r.summary;
            write_log(&r.log, log_path.as_deref())?;
            metrics(vec![
                ("satellites", s.satellites.to_string()),
                ("period_s", format!("{:.3}", s.period_s)),
                ("mean_fraction_processing", format!("{:.4}", s.mean_fraction_processing)),
                ("mean_fraction_in_eclipse", format!("{:.4}", s.mean_fraction_in_eclipse)),
                ("mean_fraction_without_los", format!("{:.4}", s.mean_fraction_without_los)),
                ("min_soc_after_first_revolution", format!("{:.4}", s.soc_range_after_first_revolution.0)),
                ("max_soc_after_first_revolution", format!("{:.4}", s.soc_range_after_first_revolution.1)),
                ("max_temperature_K", format!("{:.2}", s.max_temperature_k)),
            ])
            .emit(out)
        }
        ScenarioKind::Fedavg => {
            let r = run_fedavg(&config)?;
            let s = &r.summary;
            write_log(&r.log, log_path.as_deref())?;
            let mut t = Table::new(&["time_s", "event", "satellite", "accuracy_before", "accuracy_after"]);
            for e in &s.exchanges {
                for k in 0..2 {
                    t.push(vec![
                        format!("{:.3}", e.time_s),
                        "exchange".into(),
                        s.satellite_ids[k].clone(),
                        format!("{:.4}", e.accuracy_before[k]),
                        format!("{:.4}", e.accuracy_after[k]),
                    ]);
                }
            }
            for k in 0..2 {
                t.push(vec![
                    String::new(),
                    "final".into(),
                    s.satellite_ids[k].clone(),
                    String::new(),
                    format!("{:.4}", s.final_accuracy[k]),
                ]);
            }
            t.emit(out)?;
            println!(
                "windows: {}  exchanges: {}  epochs: {} / {}",
                s.windows.len(),
                s.exchanges.len(),
                s.epochs_trained[0],
                s.epochs_trained[1]
            );
            Ok(())
        }
        ScenarioKind::Overhead => overhead(&config, &[config.constraint_check_interval], out),
        ScenarioKind::Custom => {
            let log = run_custom(&config)?;
            write_log(&log, log_path.as_deref())?;
            println!("{} log rows", log.len());
            Ok(())
        }
    }
}

fn windows(config_path: &Path, from: &str, to: &str, hours: f64, out: &CsvOut) -> Result<()> {
    if !(hours > 0.0) {
        bail!("--hours must be positive");
    }
    let config = load(config_path)?;
    let actors = config.all_actors()?;
    let find = |id: &str| {
        actors
            .iter()
            .find(|a| a.id() == id)
            .with_context(|| format!("no actor `{id}` in {}", config_path.display()))
    };
    let (a, b) = (find(from)?, find(to)?);
    let t0 = config.start_epoch()?;
    let mut t = Table::new(&["start_s", "end_s", "duration_s", "from", "to"]);
    for w in comms::find_windows(a, b, t0, t0 + hours * 3600.0)? {
        t.push(vec![
            w.start.j2000_seconds().to_string(),
            w.end.j2000_seconds().to_string(),
            format!("{:.1}", w.duration()),
            w.from_actor.clone(),
            w.to_actor.clone(),
        ]);
    }
    t.emit(out)
}

fn overhead(config: &ScenarioConfig, intervals: &[f64], out: &CsvOut) -> Result<()> {
    let mut t = Table::new(&[
        "interval_s",
        "activity_s",
        "constraint_s",
        "geometry_s",
        "thermal_s",
        "power_s",
        "radiation_s",
        "logging_s",
        "model_update_s",
        "total_s",
        "update_share",
    ]);
    for &i in intervals {
        let r = run_overhead_benchmark(config, i)?;
        let f = |x: f64| format!("{x:.6}");
        t.push(vec![
            i.to_string(),
            f(r.activity_s),
            f(r.constraint_s),
            f(r.geometry_s),
            f(r.thermal_s),
            f(r.power_s),
            f(r.radiation_s),
            f(r.logging_s),
            f(r.model_update_s),
            f(r.total_s),
            format!("{:.4}%", 100.0 * r.model_update_share()),
        ]);
    }
    t.emit(out)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            log,
            seed,
            duration_s,
            out,
        } => run(&config, log, seed, duration_s, &out),
        Command::Windows {
            config,
            from,
            to,
            hours,
            out,
        } => windows(&config, &from, &to, hours, &out),
        Command::Bench { which } => match which {
            Bench::Overhead { interval, config, out } => {
                let config = load_or(config.as_deref(), OVERHEAD_CONFIG)?;
                let intervals = if interval.is_empty() {
                    config.overhead.intervals_s.clone()
                } else {
                    interval
                };
                overhead(&config, &intervals, &out)
            }
            Bench::Scaling {
                sizes,
                repeats,
                config,
                out,
            } => {
                let config = load_or(config.as_deref(), CONSTELLATION_CONFIG)?;
                let rows = run_scaling(&config, &sizes, repeats)?;
                let mut t = Table::new(&["satellites", "wall_s", "per_satellite_s"]);
                for r in &rows {
                    t.push(vec![
                        r.satellites.to_string(),
                        format!("{:.4}", r.wall_s),
                        format!("{:.6}", r.per_satellite_s),
                    ]);
                }
                t.emit(&out)?;
                println!("per-satellite spread: {:.1}%", 100.0 * per_satellite_spread(&rows));
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
