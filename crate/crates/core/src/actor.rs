//! Actors: spacecraft and ground stations with optional physical models.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::astro::{station_inertial_position, OrbitState};
use crate::epoch::Epoch;
use crate::power::Battery;
use crate::radiation::{RadiationConfig, RadiationModel};
use crate::thermal::ThermalState;
use crate::vec3::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    Spacecraft,
    GroundStation,
}

impl ActorKind {
    pub fn name(self) -> &'static str {
        match self {
            ActorKind::Spacecraft => "spacecraft",
            ActorKind::GroundStation => "ground station",
        }
    }
}

/// Geodetic coordinates on the WGS84 ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPosition {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub elevation_m: f64,
}

impl GeodeticPosition {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::invalid(
                "geodetic position",
                format!("latitude {} outside [-90, 90]", self.latitude_deg),
            ));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::invalid(
                "geodetic position",
                format!("longitude {} outside [-180, 180]", self.longitude_deg),
            ));
        }
        if !self.elevation_m.is_finite() {
            return Err(Error::invalid("geodetic position", "elevation must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    id: String,
    kind: ActorKind,
    local_time: Epoch,
    orbit: Option<OrbitState>,
    geodetic: Option<GeodeticPosition>,
    minimum_elevation_deg: f64,
    thermal: Option<ThermalState>,
    battery: Option<Battery>,
    radiation: Option<RadiationModel>,
    comm_devices: BTreeMap<String, f64>,
    known_peers: BTreeSet<String>,
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() {
        Err(Error::invalid("actor id", "must be nonempty"))
    } else {
        Ok(())
    }
}

impl Actor {
    /// A spacecraft following `orbit`, with no models attached.
    pub fn spacecraft(id: impl Into<String>, epoch: Epoch, orbit: OrbitState) -> Result<Self> {
        let id = id.into();
        check_id(&id)?;
        orbit.validate()?;
        Ok(Self {
            id,
            kind: ActorKind::Spacecraft,
            local_time: epoch,
            orbit: Some(orbit),
            geodetic: None,
            minimum_elevation_deg: 0.0,
            thermal: None,
            battery: None,
            radiation: None,
            comm_devices: BTreeMap::new(),
            known_peers: BTreeSet::new(),
        })
    }

    /// A ground station fixed to the rotating Earth.
    pub fn ground_station(
        id: impl Into<String>,
        epoch: Epoch,
        latitude_deg: f64,
        longitude_deg: f64,
        elevation_m: f64,
        minimum_elevation_deg: f64,
    ) -> Result<Self> {
        let id = id.into();
        check_id(&id)?;
        let site = GeodeticPosition {
            latitude_deg,
            longitude_deg,
            elevation_m,
        };
        site.validate()?;
        if !(-90.0..=90.0).contains(&minimum_elevation_deg) {
            return Err(Error::invalid(
                "ground station",
                "minimum elevation must lie in [-90, 90] degrees",
            ));
        }
        Ok(Self {
            id,
            kind: ActorKind::GroundStation,
            local_time: epoch,
            orbit: None,
            geodetic: Some(site),
            minimum_elevation_deg,
            thermal: None,
            battery: None,
            radiation: None,
            comm_devices: BTreeMap::new(),
            known_peers: BTreeSet::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ActorKind {
        self.kind
    }

    pub fn is_spacecraft(&self) -> bool {
        self.kind == ActorKind::Spacecraft
    }

    pub fn local_time(&self) -> Epoch {
        self.local_time
    }

    /// Moves the actor's clock forward. Time never runs backwards.
    pub fn set_local_time(&mut self, t: Epoch) -> Result<()> {
        if t < self.local_time {
            return Err(Error::invalid(
                "local time",
                format!("cannot move `{}` back from {} to {}", self.id, self.local_time, t),
            ));
        }
        self.local_time = t;
        Ok(())
    }

    pub fn orbit(&self) -> Option<&OrbitState> {
        self.orbit.as_ref()
    }

    pub fn geodetic_position(&self) -> Option<&GeodeticPosition> {
        self.geodetic.as_ref()
    }

    pub fn minimum_elevation_deg(&self) -> f64 {
        self.minimum_elevation_deg
    }

    fn require(&self, expected: ActorKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                id: self.id.clone(),
                kind: self.kind.name(),
                expected: expected.name(),
            })
        }
    }

    pub fn set_geodetic_position(&mut self, site: GeodeticPosition) -> Result<()> {
        self.require(ActorKind::GroundStation)?;
        site.validate()?;
        self.geodetic = Some(site);
        Ok(())
    }

    pub fn set_orbit(&mut self, orbit: OrbitState) -> Result<()> {
        self.require(ActorKind::Spacecraft)?;
        orbit.validate()?;
        self.orbit = Some(orbit);
        Ok(())
    }

    pub fn thermal(&self) -> Option<&ThermalState> {
        self.thermal.as_ref()
    }

    pub fn thermal_mut(&mut self) -> Option<&mut ThermalState> {
        self.thermal.as_mut()
    }

    pub fn set_thermal(&mut self, state: ThermalState) -> Result<()> {
        self.require(ActorKind::Spacecraft)?;
        state.properties.validate()?;
        if !(state.temperature_k >= 0.0) {
            return Err(Error::invalid("thermal state", "temperature must be >= 0 K"));
        }
        self.thermal = Some(state);
        Ok(())
    }

    pub fn battery(&self) -> Option<&Battery> {
        self.battery.as_ref()
    }

    pub fn battery_mut(&mut self) -> Option<&mut Battery> {
        self.battery.as_mut()
    }

    pub fn set_battery(&mut self, battery: Battery) -> Result<()> {
        self.require(ActorKind::Spacecraft)?;
        battery.validate()?;
        self.battery = Some(battery);
        Ok(())
    }

    pub fn radiation(&self) -> Option<&RadiationModel> {
        self.radiation.as_ref()
    }

    pub fn radiation_mut(&mut self) -> Option<&mut RadiationModel> {
        self.radiation.as_mut()
    }

    /// Attaches a radiation model whose generator is derived from the
    /// config seed and this actor's id.
    pub fn set_radiation(&mut self, config: RadiationConfig) -> Result<()> {
        self.require(ActorKind::Spacecraft)?;
        self.radiation = Some(RadiationModel::new(config, &self.id)?);
        Ok(())
    }

    pub(crate) fn set_radiation_model(&mut self, model: RadiationModel) {
        self.radiation = Some(model);
    }

    /// True once a radiation-induced device failure occurred.
    pub fn has_failed(&self) -> bool {
        self.radiation.as_ref().is_some_and(|r| r.state.failed)
    }

    pub fn state_of_charge(&self) -> Option<f64> {
        self.battery.map(|b| b.state_of_charge())
    }

    pub fn temperature_k(&self) -> Option<f64> {
        self.thermal.map(|t| t.temperature_k)
    }

    pub fn comm_devices(&self) -> &BTreeMap<String, f64> {
        &self.comm_devices
    }

    pub fn add_comm_device(&mut self, name: impl Into<String>, data_rate_bps: f64) -> Result<()> {
        if !(data_rate_bps > 0.0) || !data_rate_bps.is_finite() {
            return Err(Error::invalid("comm device", "data rate must be positive"));
        }
        self.comm_devices.insert(name.into(), data_rate_bps);
        Ok(())
    }

    pub fn known_peers(&self) -> &BTreeSet<String> {
        &self.known_peers
    }

    pub(crate) fn replace_known_peers(&mut self, peers: BTreeSet<String>) {
        self.known_peers = peers;
    }

    /// Inertial position at `t`.
    pub fn position_at(&self, t: Epoch) -> Result<Vec3> {
        match (&self.orbit, &self.geodetic) {
            (Some(orbit), _) => Ok(orbit.propagate(t)?.position),
            (None, Some(site)) => Ok(station_inertial_position(site, t)),
            (None, None) => Err(Error::invalid("actor", format!("`{}` has no position", self.id))),
        }
    }

    /// Inertial position at the actor's own local time.
    pub fn position(&self) -> Result<Vec3> {
        self.position_at(self.local_time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::CentralBody;
    use crate::power::Battery;

    fn leo() -> OrbitState {
        OrbitState::circular(550e3, 0.0, 0.0, 0.0, Epoch::J2000, CentralBody::earth()).unwrap()
    }

    #[test]
    fn spacecraft_starts_bare() {
        let sc = Actor::spacecraft("sat1", Epoch::J2000, leo()).unwrap();
        assert_eq!(sc.kind(), ActorKind::Spacecraft);
        assert_eq!(sc.local_time(), Epoch::J2000);
        assert!(sc.thermal().is_none() && sc.battery().is_none() && sc.radiation().is_none());
        assert!((crate::vec3::norm(sc.position().unwrap()) - 6_928_137.0).abs() < 1e-3);
    }

    #[test]
    fn empty_id_rejected() {
        assert!(Actor::spacecraft("", Epoch::J2000, leo()).is_err());
    }

    #[test]
    fn kind_mismatch_on_geodetic() {
        let mut sc = Actor::spacecraft("gs", Epoch::J2000, leo()).unwrap();
        let err = sc
            .set_geodetic_position(GeodeticPosition {
                latitude_deg: 0.0,
                longitude_deg: 0.0,
                elevation_m: 0.0,
            })
            .unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
    }

    #[test]
    fn ground_station_validation() {
        let gs = Actor::ground_station("maspalomas", Epoch::J2000, 27.7629, -15.6338, 205.1, 5.0).unwrap();
        assert_eq!(gs.minimum_elevation_deg(), 5.0);
        assert!(Actor::ground_station("x", Epoch::J2000, 91.0, 0.0, 0.0, 0.0).is_err());
        assert!(Actor::ground_station("x", Epoch::J2000, 0.0, -180.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn ground_station_rejects_models() {
        let mut gs = Actor::ground_station("gs", Epoch::J2000, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(gs.set_battery(Battery::new(1.0, 1.0, 0.0).unwrap()).is_err());
        assert!(gs
            .set_radiation(RadiationConfig {
                data_corruption_rate: 0.0,
                interruption_rate: 0.0,
                failure_rate: 0.0,
                seed: 0
            })
            .is_err());
        assert!(gs.set_orbit(leo()).is_err());
    }

    #[test]
    fn local_time_is_monotone() {
        let mut sc = Actor::spacecraft("s", Epoch::J2000, leo()).unwrap();
        sc.set_local_time(Epoch::J2000 + 10.0).unwrap();
        assert!(sc.set_local_time(Epoch::J2000 + 5.0).is_err());
        assert_eq!(sc.local_time(), Epoch::J2000 + 10.0);
    }

    #[test]
    fn comm_device_rate_must_be_positive() {
        let mut sc = Actor::spacecraft("s", Epoch::J2000, leo()).unwrap();
        assert!(sc.add_comm_device("isl", 0.0).is_err());
        sc.add_comm_device("isl", 1e6).unwrap();
        assert_eq!(sc.comm_devices()["isl"], 1e6);
    }
}
