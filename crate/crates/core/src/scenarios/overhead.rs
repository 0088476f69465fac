//! Wall-clock profiling of the engine's own cost next to a CPU-bound user
//! activity that must stop when a ground-station pass begins.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::comms;
use crate::runtime::{Activity, ActivityOutcome, Mode, Profile, Progress, Simulation, SimulationConfig};
use crate::{Error, Result};

use super::config::{ScenarioConfig, ScenarioKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverheadParams {
    /// The run starts this many seconds before the first pass.
    pub lead_time_s: f64,
    pub intervals_s: Vec<f64>,
    pub runs: usize,
    pub warmup_runs: usize,
    /// Length of one busy-work slice of the synthetic activity.
    pub work_slice_ms: f64,
}

impl Default for OverheadParams {
    fn default() -> Self {
        Self {
            lead_time_s: 29.0,
            intervals_s: vec![0.25, 0.5, 1.0],
            runs: 3,
            warmup_runs: 2,
            work_slice_ms: 1.0,
        }
    }
}

impl OverheadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lead_time_s > 0.0) || !(self.work_slice_ms > 0.0) {
            return Err(Error::invalid("overhead params", "lead time and slice length must be positive"));
        }
        if self.intervals_s.is_empty() || self.intervals_s.iter().any(|i| !(*i > 0.0)) {
            return Err(Error::invalid("overhead params", "intervals must be positive"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("overhead params", "at least one run is needed"));
        }
        Ok(())
    }
}

/// Mean wall seconds per run spent in each part of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OverheadRow {
    pub interval_s: f64,
    pub activity_s: f64,
    pub constraint_s: f64,
    pub geometry_s: f64,
    pub thermal_s: f64,
    pub power_s: f64,
    pub radiation_s: f64,
    pub logging_s: f64,
    /// Sum of the engine's model-update components.
    pub model_update_s: f64,
    pub total_s: f64,
    pub model_updates: f64,
    pub constraint_checks: f64,
    /// Model time the activity ran for.
    pub simulated_s: f64,
    /// How the activity ended in the last run.
    pub interrupted_by_pass: bool,
}

impl OverheadRow {
    pub fn model_update_share(&self) -> f64 {
        self.model_update_s / self.total_s
    }
}

/// Cheap floating-point churn the optimizer cannot drop.
fn busy_work(duration: Duration, state: &mut f64) {
    let start = Instant::now();
    while start.elapsed() < duration {
        for _ in 0..256 {
            *state = (*state * 1.000_001 + 0.5).sin();
        }
    }
    std::hint::black_box(*state);
}

/// One real-time run at a given check interval.
pub fn run_overhead_once(config: &ScenarioConfig, interval_s: f64) -> Result<(Profile, Duration, f64, ActivityOutcome)> {
    let p = &config.overhead;
    let sat = config
        .spacecraft_actors()?
        .into_iter()
        .next()
        .ok_or_else(|| Error::invalid("overhead", "one spacecraft is required"))?;
    let station = config
        .ground_station_actors()?
        .into_iter()
        .next()
        .ok_or_else(|| Error::invalid("overhead", "one ground station is required"))?;
    let t0 = config.start_epoch()?;
    let first = comms::find_windows(&sat, &station, t0, t0 + 86_400.0)?
        .into_iter()
        .find(|w| w.start - t0 >= p.lead_time_s)
        .ok_or_else(|| Error::invalid("overhead", "no pass within a day of the epoch"))?;
    let start = first.start - p.lead_time_s;

    let sim_config = SimulationConfig {
        physics_dt: config.physics_dt,
        constraint_check_interval: interval_s,
        mode: Mode::RealTime,
        seed: config.seed,
        snapshot_interval: Some(interval_s),
        profile: true,
    };
    let mut sim = Simulation::new(sim_config, start)?;
    let (sat_id, gs_id) = (sat.id().to_owned(), station.id().to_owned());
    sim.add_actor(sat)?;
    sim.add_actor(station)?;
    sim.disable_snapshots(&gs_id)?;

    let slice = Duration::from_secs_f64(p.work_slice_ms / 1e3);
    // safety stop well past the expected pass start
    let limit = Duration::from_secs_f64(p.lead_time_s * 2.0 + 10.0);
    let mut state = 0.1;
    let mut began = None::<Instant>;
    let activity = Activity::new("processing", 10.0, move |_| {
        let t = *began.get_or_insert_with(Instant::now);
        if t.elapsed() >= limit {
            return Progress::Done(0.0);
        }
        busy_work(slice, &mut state);
        Progress::Continue
    })
    .with_constraint(move |v| !v.is_visible_to(&gs_id).unwrap_or(true));
    sim.register_activity(&sat_id, activity)?;

    let wall = Instant::now();
    let outcome = sim.perform_activity(&sat_id, "processing")?;
    let total = wall.elapsed();
    Ok((*sim.profile(), total, sim.now() - start, outcome))
}

/// Profiles the engine at one check interval, averaging `runs` measured
/// runs after `warmup_runs` discarded ones.
pub fn run_overhead_benchmark(config: &ScenarioConfig, interval_s: f64) -> Result<OverheadRow> {
    if config.kind != ScenarioKind::Overhead {
        return Err(Error::invalid("scenario", "not an overhead config"));
    }
    config.validate()?;
    let p = &config.overhead;
    for _ in 0..p.warmup_runs {
        run_overhead_once(config, interval_s)?;
    }
    let mut row = OverheadRow {
        interval_s,
        ..Default::default()
    };
    for _ in 0..p.runs {
        let (prof, total, simulated, outcome) = run_overhead_once(config, interval_s)?;
        row.activity_s += prof.activity.as_secs_f64();
        row.constraint_s += prof.constraint.as_secs_f64();
        row.geometry_s += prof.geometry.as_secs_f64();
        row.thermal_s += prof.thermal.as_secs_f64();
        row.power_s += prof.power.as_secs_f64();
        row.radiation_s += prof.radiation.as_secs_f64();
        row.logging_s += prof.logging.as_secs_f64();
        row.model_update_s += prof.model_update_total().as_secs_f64();
        row.total_s += total.as_secs_f64();
        row.model_updates += prof.model_updates as f64;
        row.constraint_checks += prof.constraint_checks as f64;
        row.simulated_s += simulated;
        row.interrupted_by_pass = outcome == ActivityOutcome::ConstraintViolated;
    }
    let n = p.runs as f64;
    for v in [
        &mut row.activity_s,
        &mut row.constraint_s,
        &mut row.geometry_s,
        &mut row.thermal_s,
        &mut row.power_s,
        &mut row.radiation_s,
        &mut row.logging_s,
        &mut row.model_update_s,
        &mut row.total_s,
        &mut row.model_updates,
        &mut row.constraint_checks,
        &mut row.simulated_s,
    ] {
        *v /= n;
    }
    Ok(row)
}
