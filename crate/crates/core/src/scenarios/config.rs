use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::actor::Actor;
use crate::astro::OrbitState;
use crate::body::CentralBody;
use crate::epoch::Epoch;
use crate::power::Battery;
use crate::radiation::RadiationConfig;
use crate::runtime::SimulationConfig;
use crate::thermal::{ThermalProperties, ThermalState};
use crate::{Error, Result};

use super::constellation::ConstellationParams;
use super::fedavg::FedAvgParams;
use super::overhead::OverheadParams;
use super::walker::generate_walker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Overhead,
    Constellation,
    Fedavg,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkerSpec {
    pub total_satellites: usize,
    pub planes: usize,
    pub altitude_m: f64,
    pub inclination_deg: f64,
}

/// Keplerian elements in degrees. Give either `altitude_m` (above the
/// equatorial radius) or `semi_major_axis_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_major_axis_m: Option<f64>,
    #[serde(default)]
    pub eccentricity: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub raan_deg: f64,
    #[serde(default)]
    pub argument_of_periapsis_deg: f64,
    #[serde(default)]
    pub true_anomaly_deg: f64,
}

impl OrbitSpec {
    pub fn to_orbit(&self, epoch: Epoch, body: &CentralBody) -> Result<OrbitState> {
        let a = match (self.altitude_m, self.semi_major_axis_m) {
            (Some(h), None) => body.equatorial_radius_m + h,
            (None, Some(a)) => a,
            _ => {
                return Err(Error::invalid(
                    "orbit",
                    "give exactly one of altitude_m and semi_major_axis_m",
                ))
            }
        };
        OrbitState::new(
            a,
            self.eccentricity,
            self.inclination_deg.to_radians(),
            self.raan_deg.to_radians(),
            self.argument_of_periapsis_deg.to_radians(),
            self.true_anomaly_deg.to_radians(),
            epoch,
            body.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    pub capacity_j: f64,
    pub state_of_charge: f64,
    pub charging_rate_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSpec {
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    #[serde(flatten)]
    pub properties: ThermalProperties,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiationRates {
    pub data_corruption_rate: f64,
    pub interruption_rate: f64,
    pub failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacecraftSpec {
    pub id: String,
    pub orbit: OrbitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<BatterySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiation: Option<RadiationRates>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub comm_devices: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStationSpec {
    pub id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub elevation_m: f64,
    #[serde(default)]
    pub minimum_elevation_deg: f64,
}

impl GroundStationSpec {
    pub fn maspalomas() -> Self {
        Self {
            id: "maspalomas".to_owned(),
            latitude_deg: 27.7629,
            longitude_deg: -15.6338,
            elevation_m: 205.1,
            minimum_elevation_deg: 5.0,
        }
    }

    pub fn to_actor(&self, epoch: Epoch) -> Result<Actor> {
        Actor::ground_station(
            self.id.clone(),
            epoch,
            self.latitude_deg,
            self.longitude_deg,
            self.elevation_m,
            self.minimum_elevation_deg,
        )
    }
}

fn default_dt() -> f64 {
    1.0
}

fn default_epoch() -> String {
    "2022-10-27T12:30:00Z".to_owned()
}

/// A scenario description as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    /// Simulated duration; each built-in scenario has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default = "default_dt")]
    pub physics_dt: f64,
    #[serde(default = "default_dt")]
    pub constraint_check_interval: f64,
    /// Spacing of snapshot rows; defaults to `physics_dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_interval_s: Option<f64>,
    /// Start time, RFC 3339.
    #[serde(default = "default_epoch")]
    pub epoch_utc: String,
    /// CSV log destination, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<PathBuf>,
    #[serde(default)]
    pub body: CentralBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walker: Option<WalkerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spacecraft: Vec<SpacecraftSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ground_stations: Vec<GroundStationSpec>,
    #[serde(default)]
    pub constellation: ConstellationParams,
    #[serde(default)]
    pub fedavg: FedAvgParams,
    #[serde(default)]
    pub overhead: OverheadParams,
}

impl ScenarioConfig {
    /// Reads and validates a config file. A relative `log` path is resolved
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid("scenario config", format!("cannot read {}: {e}", path.display()))
        })?;
        let mut config = Self::from_json(&text).map_err(|e| match e {
            Error::Parse { line, column, message } => Error::invalid(
                "scenario config",
                format!("{}:{line}:{column}: {message}", path.display()),
            ),
            other => other,
        })?;
        if let (Some(log), Some(dir)) = (&config.log, path.parent()) {
            if log.is_relative() {
                config.log = Some(dir.join(log));
            }
        }
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        self.simulation_config().validate()?;
        self.start_epoch()?;
        if let Some(d) = self.duration_s {
            if !(d > 0.0) {
                return Err(Error::invalid("scenario config", "duration_s must be positive"));
            }
        }
        if let Some(w) = &self.walker {
            if w.planes == 0 || w.total_satellites == 0 || w.total_satellites % w.planes != 0 {
                return Err(Error::invalid(
                    "walker",
                    "total_satellites must be a positive multiple of planes",
                ));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for id in self
            .spacecraft
            .iter()
            .map(|s| &s.id)
            .chain(self.ground_stations.iter().map(|g| &g.id))
        {
            if !ids.insert(id) {
                return Err(Error::DuplicateActor(id.clone()));
            }
        }
        match self.kind {
            ScenarioKind::Constellation => self.constellation.validate(),
            ScenarioKind::Fedavg => self.fedavg.validate(),
            ScenarioKind::Overhead => self.overhead.validate(),
            ScenarioKind::Custom => {
                if self.duration_s.is_none() {
                    return Err(Error::invalid("scenario config", "custom scenarios need duration_s"));
                }
                Ok(())
            }
        }
    }

    pub fn start_epoch(&self) -> Result<Epoch> {
        Epoch::parse_rfc3339(&self.epoch_utc)
            .map_err(|e| Error::invalid("scenario config", format!("epoch_utc: {e}")))
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        SimulationConfig {
            physics_dt: self.physics_dt,
            constraint_check_interval: self.constraint_check_interval,
            seed: self.seed,
            snapshot_interval: Some(self.log_interval_s.unwrap_or(self.physics_dt)),
            ..SimulationConfig::default()
        }
    }

    /// Spacecraft from the Walker block (named `sat1`, `sat2`, ...) followed
    /// by the explicit list, each with the models given in its spec.
    pub fn spacecraft_actors(&self) -> Result<Vec<Actor>> {
        let t0 = self.start_epoch()?;
        let mut out = Vec::new();
        if let Some(w) = &self.walker {
            let orbits = generate_walker(
                w.total_satellites,
                w.planes,
                w.altitude_m,
                w.inclination_deg,
                &self.body,
                t0,
            )?;
            for (k, orbit) in orbits.into_iter().enumerate() {
                out.push(Actor::spacecraft(format!("sat{}", k + 1), t0, orbit)?);
            }
        }
        for spec in &self.spacecraft {
            let mut a = Actor::spacecraft(spec.id.clone(), t0, spec.orbit.to_orbit(t0, &self.body)?)?;
            if let Some(b) = spec.battery {
                a.set_battery(Battery::with_state_of_charge(b.capacity_j, b.state_of_charge, b.charging_rate_w)?)?;
            }
            if let Some(t) = spec.thermal {
                a.set_thermal(ThermalState::new(t.temperature_k, t.properties)?)?;
            }
            if let Some(r) = spec.radiation {
                a.set_radiation(RadiationConfig {
                    data_corruption_rate: r.data_corruption_rate,
                    interruption_rate: r.interruption_rate,
                    failure_rate: r.failure_rate,
                    seed: self.seed,
                })?;
            }
            for (name, rate) in &spec.comm_devices {
                a.add_comm_device(name.clone(), *rate)?;
            }
            out.push(a);
        }
        Ok(out)
    }

    pub fn ground_station_actors(&self) -> Result<Vec<Actor>> {
        let t0 = self.start_epoch()?;
        self.ground_stations.iter().map(|g| g.to_actor(t0)).collect()
    }

    /// Every actor the scenario defines, including derived ones such as the
    /// constellation's geosynchronous relay.
    pub fn all_actors(&self) -> Result<Vec<Actor>> {
        let mut actors = self.spacecraft_actors()?;
        if self.kind == ScenarioKind::Constellation {
            actors.push(super::constellation::geosat(self)?);
        }
        actors.extend(self.ground_station_actors()?);
        Ok(actors)
    }
}
