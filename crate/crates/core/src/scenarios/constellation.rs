//! Walker constellation with a Processing/Standby duty cycle, monitored
//! against a ground station and a geosynchronous relay.

use std::cell::{Cell, RefCell};
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actor::Actor;
use crate::astro::{greenwich_sidereal_angle, OrbitState};
use crate::comms;
use crate::epoch::Epoch;
use crate::power::Battery;
use crate::runtime::{Activity, ActivityOutcome, EventLog, Progress, Simulation, View};
use crate::thermal::{ThermalProperties, ThermalState};
use crate::{Error, Result};

use super::config::{ScenarioConfig, ScenarioKind};

pub const DEFAULT_DURATION_S: f64 = 8.0 * 3600.0;
pub const GEOSAT_ID: &str = "geosat";
pub const PROCESSING: &str = "processing";
pub const STANDBY: &str = "standby";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationParams {
    pub battery_capacity_j: f64,
    pub initial_soc_min: f64,
    pub initial_soc_max: f64,
    pub charging_rate_w: f64,
    #[serde(rename = "initial_temperature_K")]
    pub initial_temperature_k: f64,
    pub thermal: ThermalProperties,
    pub standby_power_w: f64,
    pub processing_power_w: f64,
    pub decision_interval_s: f64,
    pub min_state_of_charge: f64,
    #[serde(rename = "max_temperature_K")]
    pub max_temperature_k: f64,
    /// Raise the Processing SoC floor by the energy Standby needs to get
    /// through the longest eclipse, so the floor itself is never crossed.
    pub eclipse_reserve: bool,
    pub geosat_radius_m: f64,
    /// Sub-satellite longitude of the relay; defaults to the first ground
    /// station's longitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geosat_longitude_deg: Option<f64>,
}

impl Default for ConstellationParams {
    fn default() -> Self {
        Self {
            battery_capacity_j: 1e6,
            initial_soc_min: 0.1,
            initial_soc_max: 1.0,
            charging_rate_w: 50.0,
            initial_temperature_k: 273.15,
            thermal: ThermalProperties {
                mass_kg: 50.0,
                thermal_capacity: 1000.0,
                solar_absorptance: 1.0,
                infrared_absorptance: 1.0,
                area_facing_sun_m2: 2.0,
                area_facing_albedo_m2: 2.0,
                area_facing_body_m2: 2.0,
                emissive_area_m2: 4.0,
                power_to_heat_ratio: 0.5,
                solar_irradiance: 1360.0,
            },
            standby_power_w: 2.0,
            processing_power_w: 100.0,
            decision_interval_s: 600.0,
            min_state_of_charge: 0.2,
            max_temperature_k: 330.0,
            eclipse_reserve: true,
            geosat_radius_m: 42_164e3,
            geosat_longitude_deg: None,
        }
    }
}

impl ConstellationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(Error::invalid("constellation params", r.to_owned()));
        if !(0.0 <= self.initial_soc_min && self.initial_soc_min <= self.initial_soc_max && self.initial_soc_max <= 1.0) {
            return bad("initial SoC range must satisfy 0 <= min <= max <= 1");
        }
        if !(self.decision_interval_s > 0.0) {
            return bad("decision interval must be positive");
        }
        if !(self.standby_power_w >= 0.0 && self.processing_power_w >= 0.0) {
            return bad("mode powers must be non-negative");
        }
        if !(self.geosat_radius_m > 0.0) {
            return bad("geosat radius must be positive");
        }
        self.thermal.validate()?;
        Battery::new(self.battery_capacity_j, 0.0, self.charging_rate_w)?;
        Ok(())
    }

    /// SoC below which Processing is not started or continued.
    pub fn processing_soc_floor(&self, orbit: &OrbitState, check_interval_s: f64) -> f64 {
        if !self.eclipse_reserve {
            return self.min_state_of_charge;
        }
        let ratio = (orbit.central_body.radius_m / orbit.semi_major_axis).min(1.0);
        let longest_eclipse = orbit.period() * ratio.asin() / std::f64::consts::PI;
        let reserve = self.standby_power_w * longest_eclipse + self.processing_power_w * check_interval_s;
        self.min_state_of_charge + reserve / self.battery_capacity_j
    }
}

/// Geosynchronous equatorial relay placed above the configured longitude.
pub fn geosat(config: &ScenarioConfig) -> Result<Actor> {
    let t0 = config.start_epoch()?;
    let p = &config.constellation;
    let lon = p
        .geosat_longitude_deg
        .or_else(|| config.ground_stations.first().map(|g| g.longitude_deg))
        .unwrap_or(0.0);
    let nu = greenwich_sidereal_angle(t0) + lon.to_radians();
    let orbit = OrbitState::new(p.geosat_radius_m, 0.0, 0.0, 0.0, 0.0, nu, t0, config.body.clone())?;
    Actor::spacecraft(GEOSAT_ID, t0, orbit)
}

/// Constellation-wide state at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationSample {
    /// Seconds since the scenario start.
    pub time_s: f64,
    pub fraction_processing: f64,
    pub fraction_in_eclipse: f64,
    pub fraction_without_los: f64,
    /// Minimum, quartiles and maximum across satellites.
    pub soc_quantiles: [f64; 5],
    pub temperature_quantiles: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSummary {
    pub satellites: usize,
    pub period_s: f64,
    pub samples: Vec<ConstellationSample>,
    pub mean_fraction_processing: f64,
    pub mean_fraction_in_eclipse: f64,
    pub mean_fraction_without_los: f64,
    /// Extremes of any satellite's SoC after the first revolution.
    pub soc_range_after_first_revolution: (f64, f64),
    pub max_temperature_k: f64,
}

pub struct ConstellationRun {
    pub log: EventLog,
    pub summary: ConstellationSummary,
    /// Wall time spent simulating each satellite.
    pub wall_time_per_satellite: Vec<Duration>,
}

#[derive(Debug, Clone, Copy, Default)]
struct SatSample {
    processing: bool,
    eclipse: bool,
    los: bool,
    soc: f64,
    temperature: f64,
}

fn until(deadline: Rc<Cell<Epoch>>) -> impl FnMut(&View<'_>) -> Progress {
    move |view| {
        let remaining = deadline.get() - view.now();
        if remaining <= view.slice_budget() {
            Progress::Done(remaining.max(0.0))
        } else {
            Progress::Continue
        }
    }
}

fn quantiles(values: &mut [f64]) -> [f64; 5] {
    values.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let x = p * (values.len() - 1) as f64;
        let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
        values[lo] + (values[hi] - values[lo]) * (x - lo as f64)
    };
    [q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)]
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Simulates one satellite in its own engine and returns its per-sample
/// state along with its log.
fn run_satellite(
    config: &ScenarioConfig,
    mut sat: Actor,
    others: &[Actor],
    duration: f64,
    sample_dt: f64,
) -> Result<(Vec<SatSample>, EventLog)> {
    let p = &config.constellation;
    let t0 = config.start_epoch()?;
    let end = t0 + duration;
    let id = sat.id().to_owned();
    let floor = p.processing_soc_floor(sat.orbit().expect("spacecraft"), config.constraint_check_interval);
    sat.set_thermal(ThermalState::new(p.initial_temperature_k, p.thermal)?)?;

    let mut sim = Simulation::new(config.simulation_config(), t0)?;
    sim.add_actor(sat)?;
    for o in others {
        sim.add_actor(o.clone())?;
        sim.disable_snapshots(o.id())?;
    }

    let samples = Rc::new(RefCell::new(Vec::new()));
    {
        let samples = samples.clone();
        let id = id.clone();
        let others: Vec<String> = others.iter().map(|o| o.id().to_owned()).collect();
        let mut next = t0 + sample_dt;
        sim.set_observer(move |s| {
            if s.now() + 1e-9 < next {
                return;
            }
            next += sample_dt;
            let a = s.actor(&id).expect("registered");
            let los = others
                .iter()
                .any(|o| comms::is_visible(a, s.actor(o).expect("registered"), s.now()).unwrap_or(false));
            samples.borrow_mut().push(SatSample {
                processing: s.running_activity(&id).ok().flatten() == Some(PROCESSING),
                eclipse: s.in_eclipse(&id).unwrap_or(false),
                los,
                soc: a.state_of_charge().unwrap_or(f64::NAN),
                temperature: a.temperature_k().unwrap_or(f64::NAN),
            });
        });
    }

    let deadline = Rc::new(Cell::new(t0));
    let max_t = p.max_temperature_k;
    let ready = move |a: &Actor| {
        a.state_of_charge().is_some_and(|s| s >= floor) && a.temperature_k().is_some_and(|t| t <= max_t)
    };
    sim.register_activity(
        &id,
        Activity::new(PROCESSING, p.processing_power_w, until(deadline.clone()))
            .with_constraint(move |v| ready(v.actor())),
    )?;
    sim.register_activity(&id, Activity::new(STANDBY, p.standby_power_w, until(deadline.clone())))?;

    let mut k = 0u64;
    while sim.now() < end {
        k += 1;
        let next = (t0 + k as f64 * p.decision_interval_s).min(end);
        deadline.set(next);
        let sat = sim.actor(&id).expect("registered");
        if ready(sat) {
            let outcome = sim.perform_activity(&id, PROCESSING)?;
            if outcome != ActivityOutcome::Completed && sim.now() < next {
                sim.perform_activity(&id, STANDBY)?;
            }
        } else {
            sim.perform_activity(&id, STANDBY)?;
        }
    }
    let log = sim.take_log();
    drop(sim);
    let samples = Rc::try_unwrap(samples).expect("observer dropped").into_inner();
    Ok((samples, log))
}

/// Runs the constellation scenario. Each satellite gets its own engine with
/// private copies of the ground stations and the relay.
pub fn run_constellation(config: &ScenarioConfig) -> Result<ConstellationRun> {
    if config.kind != ScenarioKind::Constellation {
        return Err(Error::invalid("scenario", "not a constellation config"));
    }
    config.validate()?;
    let p = &config.constellation;
    let duration = config.duration_s.unwrap_or(DEFAULT_DURATION_S);
    let sats = config.spacecraft_actors()?;
    if sats.is_empty() {
        return Err(Error::invalid("constellation", "no spacecraft defined"));
    }
    let mut others = vec![geosat(config)?];
    others.extend(config.ground_station_actors()?);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sample_dt = config.physics_dt;
    let mut per_sat = Vec::with_capacity(sats.len());
    let mut logs = Vec::with_capacity(sats.len());
    let mut walls = Vec::with_capacity(sats.len());
    let period = sats[0].orbit().expect("spacecraft").period();
    for mut sat in sats {
        let soc = rng.random_range(p.initial_soc_min..=p.initial_soc_max);
        sat.set_battery(Battery::with_state_of_charge(p.battery_capacity_j, soc, p.charging_rate_w)?)?;
        let start = Instant::now();
        let (samples, log) = run_satellite(config, sat, &others, duration, sample_dt)?;
        walls.push(start.elapsed());
        per_sat.push(samples);
        logs.push(log);
    }

    let n_samples = per_sat.iter().map(Vec::len).min().unwrap_or(0);
    let n_sats = per_sat.len() as f64;
    let mut samples = Vec::with_capacity(n_samples);
    let mut soc_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_temperature = f64::NEG_INFINITY;
    for k in 0..n_samples {
        let time_s = (k + 1) as f64 * sample_dt;
        let row: Vec<SatSample> = per_sat.iter().map(|s| s[k]).collect();
        let frac = |f: fn(&SatSample) -> bool| row.iter().filter(|s| f(s)).count() as f64 / n_sats;
        let mut socs: Vec<f64> = row.iter().map(|s| s.soc).collect();
        let mut temps: Vec<f64> = row.iter().map(|s| s.temperature).collect();
        if time_s >= period {
            for &s in &socs {
                soc_range = (soc_range.0.min(s), soc_range.1.max(s));
            }
        }
        for &t in &temps {
            max_temperature = max_temperature.max(t);
        }
        samples.push(ConstellationSample {
            time_s,
            fraction_processing: frac(|s| s.processing),
            fraction_in_eclipse: frac(|s| s.eclipse),
            fraction_without_los: frac(|s| !s.los),
            soc_quantiles: quantiles(&mut socs),
            temperature_quantiles: quantiles(&mut temps),
        });
    }
    let summary = ConstellationSummary {
        satellites: per_sat.len(),
        period_s: period,
        mean_fraction_processing: mean(samples.iter().map(|s| s.fraction_processing)),
        mean_fraction_in_eclipse: mean(samples.iter().map(|s| s.fraction_in_eclipse)),
        mean_fraction_without_los: mean(samples.iter().map(|s| s.fraction_without_los)),
        soc_range_after_first_revolution: soc_range,
        max_temperature_k: max_temperature,
        samples,
    };
    Ok(ConstellationRun {
        log: EventLog::merge(logs),
        summary,
        wall_time_per_satellite: walls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_small_set() {
        assert_eq!(quantiles(&mut [3.0, 1.0, 2.0, 5.0, 4.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(quantiles(&mut [7.0]), [7.0; 5]);
    }

    #[test]
    fn reserve_covers_longest_eclipse() {
        let p = ConstellationParams::default();
        let orbit = OrbitState::circular(550e3, 0.0, 0.0, 0.0, Epoch::J2000, crate::CentralBody::earth()).unwrap();
        let floor = p.processing_soc_floor(&orbit, 1.0);
        assert!(floor > 0.2 && floor < 0.21, "{floor}");
        let plain = ConstellationParams { eclipse_reserve: false, ..p };
        assert_eq!(plain.processing_soc_floor(&orbit, 1.0), 0.2);
    }
}
